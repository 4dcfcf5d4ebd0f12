#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gendervec/lexicon.hpp"

namespace gendervec {

/// One noun class of the artificial language and the article that agrees
/// with it.
struct SyntheticClass {
  GenderCode code = GenderCode::uter;
  std::string article;
  double prior = 0.5;  // share of noun types
};

/// A toy agreement language: every sentence is
///   filler{0..max_leading} article noun filler{0..max_trailing} "."
/// where the article agrees with the noun's class. Nouns and fillers are
/// drawn with Zipf weights; class membership is independent of frequency.
struct SyntheticSpec {
  std::vector<SyntheticClass> classes = {{GenderCode::uter, "en", 0.7},
                                         {GenderCode::neuter, "ett", 0.3}};
  std::size_t nouns = 1000;
  std::size_t sentences = 100000;
  std::size_t fillers = 300;
  int max_leading_fillers = 3;
  int max_trailing_fillers = 3;
  /// Probability that a non-ambiguous noun's article is swapped for
  /// another class's article.
  double agreement_noise = 0.0;
  /// Share of noun types whose article is drawn uniformly over classes on
  /// every occurrence.
  double ambiguous_share = 0.0;
  double zipf_exponent = 1.0;
  std::uint64_t seed = 1;

  /// Throws ConfigError for < 2 classes, non-distinct or empty articles,
  /// priors not summing to 1 or out-of-range rates.
  void validate() const;
};

struct SyntheticNoun {
  std::string word;
  std::size_t class_index = 0;
  bool ambiguous = false;
};

struct SyntheticLanguage {
  std::vector<std::string> lines;
  GenderLexicon lexicon;
  std::vector<SyntheticNoun> nouns;
  std::size_t article_tokens = 0;
  std::size_t flipped_articles = 0;  // disagreeing articles before non-ambiguous nouns
};

SyntheticLanguage generate_synthetic_language(const SyntheticSpec& spec);

void write_lines(std::ostream& out, const std::vector<std::string>& lines);

/// Share of article tokens directly before a non-ambiguous lexicon noun
/// that disagree with it, recounted from the emitted text.
double measured_agreement_noise(const std::vector<std::string>& lines, const SyntheticSpec& spec,
                                const SyntheticLanguage& lang);

}  // namespace gendervec
