#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gendervec {

/// Literal token substituted for every number in the corpus.
inline constexpr std::string_view kNumberToken = "NUMBER";

/// One normalized sentence: lower-case, whitespace-free, non-empty tokens.
struct Sentence {
  std::vector<std::string> tokens;

  bool operator==(const Sentence&) const = default;
};

/// Normalizes one raw UTF-8 line. Lower-cases letters, splits on
/// whitespace and at word/punctuation boundaries, keeps punctuation marks
/// as single tokens and maps numbers (digit runs with optional internal
/// '.', ',' or ':') to NUMBER.
///
/// Throws DataError naming the byte offset on malformed UTF-8.
Sentence normalize_line(std::string_view raw);

/// Joins tokens with single spaces.
std::string join(const Sentence& s);

/// Reads a one-sentence-per-line corpus. Blank lines yield empty sentences,
/// which are dropped. DataError messages carry the line number.
std::vector<Sentence> read_corpus(std::istream& in);
std::vector<Sentence> read_corpus(const std::filesystem::path& path);

using WordId = std::int32_t;
inline constexpr WordId kNoWord = -1;

/// Word <-> dense id map with corpus frequencies. Ids are ordered by
/// descending frequency, ties broken lexicographically.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Builds from (word, frequency) pairs in any order; assigns ids.
  static Vocabulary from_counts(std::vector<std::pair<std::string, std::uint64_t>> counts);

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  std::optional<WordId> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }
  WordId id(std::string_view word) const;  // throws DataError if absent
  const std::string& word(WordId id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::uint64_t frequency(WordId id) const { return freqs_.at(static_cast<std::size_t>(id)); }
  std::uint64_t total_count() const;

  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::uint64_t>& frequencies() const { return freqs_; }

  bool operator==(const Vocabulary& other) const {
    return words_ == other.words_ && freqs_ == other.freqs_;
  }

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> freqs_;
  std::unordered_map<std::string, WordId> index_;
};

/// Counts tokens over the corpus. Shards are counted in parallel and
/// merged before ids are assigned, so the result does not depend on the
/// worker count.
Vocabulary build_vocabulary(std::span<const Sentence> corpus);

/// Keeps exactly the words with frequency strictly above min_freq and
/// re-densifies ids with the same ordering rule.
Vocabulary filter_by_frequency(const Vocabulary& vocab, std::uint64_t min_freq);

/// TSV `word<TAB>id<TAB>frequency`, sorted by id.
void write_vocabulary(std::ostream& out, const Vocabulary& vocab);
Vocabulary read_vocabulary(std::istream& in);

/// Corpus re-encoded as vocabulary ids (kNoWord for out-of-vocabulary
/// tokens) with sentence offsets, the layout the counting kernels consume.
struct EncodedCorpus {
  std::vector<WordId> ids;
  std::vector<std::size_t> offsets;  // size = sentences + 1

  std::size_t sentence_count() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::span<const WordId> sentence(std::size_t i) const {
    return std::span<const WordId>(ids).subspan(offsets[i], offsets[i + 1] - offsets[i]);
  }
};

EncodedCorpus encode(std::span<const Sentence> corpus, const Vocabulary& vocab);

}  // namespace gendervec
