#pragma once

#include <array>
#include <iosfwd>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gendervec/corpus.hpp"
#include "gendervec/embedding.hpp"
#include "gendervec/lexicon.hpp"
#include "json.hpp"

namespace gendervec {

/// The two classes of the prediction task. Values double as class indices.
enum class Gender : int { uter = 0, neuter = 1 };

inline constexpr int kNumClasses = 2;

std::string_view gender_name(Gender g);
Gender parse_gender(std::string_view s);  // "uter"/"u", "neuter"/"n"
inline int class_index(Gender g) { return static_cast<int>(g); }

struct LabeledWord {
  std::string word;
  Gender gender = Gender::uter;
  std::uint64_t frequency = 0;

  bool operator==(const LabeledWord&) const = default;
};

struct LabeledExample {
  std::string word;
  std::vector<double> vector;
  Gender gender = Gender::uter;
  std::uint64_t frequency = 0;
};

/// Words in (vocabulary, core-gender lexicon) with frequency > min_freq,
/// in vocabulary id order. Needs no embedding, so the split can be fixed
/// before any context configuration is tried.
std::vector<LabeledWord> candidate_words(const GenderLexicon& lex, const Vocabulary& vocab,
                                         std::uint64_t min_freq);

/// Candidate words that also have an embedding row, with their vectors.
/// Throws DataError if nothing qualifies.
std::vector<LabeledExample> build_dataset(const EmbeddingMatrix& emb, const GenderLexicon& lex,
                                          const Vocabulary& vocab, std::uint64_t min_freq);

std::vector<LabeledWord> labels_of(std::span<const LabeledExample> data);

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;

  void validate() const;
};

/// Word lists of a train/dev/test partition; enough to rebuild the split.
struct SplitManifest {
  std::uint64_t seed = 0;
  SplitRatios ratios;
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::vector<std::string> test;

  std::string test_digest() const;
  nlohmann::ordered_json to_json() const;
  static SplitManifest from_json(const nlohmann::json& j);
};

struct SplitBundle {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> dev;
  std::vector<LabeledExample> test;
  std::uint64_t seed = 0;
};

/// Per-class seeded shuffle, then largest-remainder apportionment of each
/// class over (train, dev, test). Fractional ties go to the earlier
/// partition. Within a partition words keep their input order.
/// Throws DataError if a class has fewer than 3 members.
SplitManifest split_words(std::span<const LabeledWord> words, const SplitRatios& ratios,
                          std::uint64_t seed);

/// Materializes a manifest over a dataset. Throws DataError if a listed
/// word is missing or listed twice.
SplitBundle apply_split(std::span<const LabeledExample> data, const SplitManifest& manifest);

SplitBundle stratified_split(std::span<const LabeledExample> data, const SplitRatios& ratios,
                             std::uint64_t seed);

struct DecileReport {
  std::array<double, 10> uter_share{};
  std::array<double, 10> neuter_share{};
  std::array<std::size_t, 10> group_size{};
  double mean_uter_share = 0.0;
  double sd_uter_share = 0.0;  // population standard deviation over the 10 groups
};

/// Sorts by descending frequency (ties by word), cuts into 10 groups of
/// near-equal size and reports the class shares. Requires >= 10 words.
DecileReport class_ratio_by_decile(std::span<const LabeledWord> words);

double uter_share(std::span<const LabeledWord> words);
double uter_share(std::span<const LabeledExample> data);

}  // namespace gendervec

namespace gendervec {

/// TSV `word<TAB>gender<TAB>frequency` with gender spelled uter/neuter.
void write_labeled_words(std::ostream& out, std::span<const LabeledWord> words);
std::vector<LabeledWord> read_labeled_words(std::istream& in);

}  // namespace gendervec
