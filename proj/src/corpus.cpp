#include "gendervec/corpus.hpp"

#include <omp.h>

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "gendervec/errors.hpp"

namespace gendervec {
namespace {

// Decodes one code point at `pos`, advancing it. Rejects overlong forms,
// surrogates and values past U+10FFFF.
[[noreturn]] void bad_utf8(std::size_t pos) {
  throw DataError("invalid UTF-8 at byte offset " + std::to_string(pos));
}

char32_t decode_utf8(std::string_view s, std::size_t& pos) {
  const auto fail = [&] { bad_utf8(pos); };
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int len;
  char32_t cp;
  char32_t min;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2, cp = b0 & 0x1F, min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3, cp = b0 & 0x0F, min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4, cp = b0 & 0x07, min = 0x10000;
  } else {
    bad_utf8(pos);
  }
  if (pos + static_cast<std::size_t>(len) > s.size()) fail();
  for (int i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + static_cast<std::size_t>(i)]);
    if ((b & 0xC0) != 0x80) fail();
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail();
  pos += static_cast<std::size_t>(len);
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_space(char32_t c) {
  return c == ' ' || (c >= 0x09 && c <= 0x0D) || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
         c == 0x205F || c == 0x3000 || c == 0xFEFF;
}

bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }

bool is_punct(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  if (c >= 0xA1 && c <= 0xBF) {
    // ª µ º and the superscript digits behave like word characters
    return c != 0xAA && c != 0xB5 && c != 0xBA && c != 0xB2 && c != 0xB3 && c != 0xB9;
  }
  return c == 0xD7 || c == 0xF7 || (c >= 0x2010 && c <= 0x2027) ||
         (c >= 0x2030 && c <= 0x205E) || (c >= 0x3001 && c <= 0x303F);
}

// Covers ASCII, Latin-1, Latin Extended-A, basic Greek and Cyrillic.
char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 0x20;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  if (c >= 0x100 && c <= 0x137) return (c % 2 == 0) ? c + 1 : c;
  if (c >= 0x139 && c <= 0x148) return (c % 2 == 1) ? c + 1 : c;
  if (c >= 0x14A && c <= 0x177) return (c % 2 == 0) ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (c >= 0x179 && c <= 0x17E) return (c % 2 == 1) ? c + 1 : c;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

bool is_number_token(const std::u32string& t) {
  // digits ([.,:] digits)*
  if (t.empty() || !is_digit(t.front()) || !is_digit(t.back())) return false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const char32_t c = t[i];
    if (is_digit(c)) continue;
    if (c != '.' && c != ',' && c != ':') return false;
    if (!is_digit(t[i - 1]) || !is_digit(t[i + 1])) return false;
  }
  return true;
}

bool is_numeric_prefix(const std::u32string& t) {
  return !t.empty() && std::all_of(t.begin(), t.end(), [](char32_t c) {
    return is_digit(c) || c == '.' || c == ',' || c == ':';
  });
}

void flush(std::u32string& current, Sentence& out) {
  if (current.empty()) return;
  std::string tok;
  if (is_number_token(current)) {
    tok = kNumberToken;
  } else if (current == U"NUMBER") {
    tok = kNumberToken;
  } else {
    for (char32_t c : current) append_utf8(tok, to_lower(c));
  }
  out.tokens.push_back(std::move(tok));
  current.clear();
}

}  // namespace

Sentence normalize_line(std::string_view raw) {
  std::u32string cps;
  cps.reserve(raw.size());
  for (std::size_t pos = 0; pos < raw.size();) cps.push_back(decode_utf8(raw, pos));

  Sentence out;
  std::u32string current;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i];
    if (is_space(c)) {
      flush(current, out);
    } else if (is_punct(c)) {
      const bool number_separator = (c == '.' || c == ',' || c == ':') &&
                                    is_numeric_prefix(current) && i + 1 < cps.size() &&
                                    is_digit(cps[i + 1]);
      if (number_separator) {
        current.push_back(c);
      } else {
        flush(current, out);
        current.push_back(c);
        flush(current, out);
      }
    } else {
      current.push_back(c);
    }
  }
  flush(current, out);
  return out;
}

std::string join(const Sentence& s) {
  std::string out;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += s.tokens[i];
  }
  return out;
}

std::vector<Sentence> read_corpus(std::istream& in) {
  std::vector<Sentence> corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    try {
      auto s = normalize_line(line);
      if (!s.tokens.empty()) corpus.push_back(std::move(s));
    } catch (const DataError& e) {
      throw DataError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return corpus;
}

std::vector<Sentence> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path.string());
  return read_corpus(in);
}

Vocabulary Vocabulary::from_counts(std::vector<std::pair<std::string, std::uint64_t>> counts) {
  std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  v.words_.reserve(counts.size());
  v.freqs_.reserve(counts.size());
  v.index_.reserve(counts.size());
  for (auto& [word, freq] : counts) {
    if (v.index_.contains(word)) throw DataError("duplicate vocabulary entry: " + word);
    v.index_.emplace(word, static_cast<WordId>(v.words_.size()));
    v.words_.push_back(std::move(word));
    v.freqs_.push_back(freq);
  }
  return v;
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

WordId Vocabulary::id(std::string_view word) const {
  if (auto id = find(word)) return *id;
  throw DataError("word not in vocabulary: " + std::string(word));
}

std::uint64_t Vocabulary::total_count() const {
  return std::accumulate(freqs_.begin(), freqs_.end(), std::uint64_t{0});
}

Vocabulary build_vocabulary(std::span<const Sentence> corpus) {
  const auto n = static_cast<std::ptrdiff_t>(corpus.size());
  std::vector<std::unordered_map<std::string, std::uint64_t>> partial;

#pragma omp parallel
  {
#pragma omp single
    partial.resize(static_cast<std::size_t>(omp_get_num_threads()));
    auto& local = partial[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      for (const auto& tok : corpus[static_cast<std::size_t>(i)].tokens) ++local[tok];
    }
  }

  std::unordered_map<std::string, std::uint64_t> merged;
  for (auto& part : partial) {
    for (auto& [word, count] : part) merged[word] += count;
  }
  return Vocabulary::from_counts({merged.begin(), merged.end()});
}

Vocabulary filter_by_frequency(const Vocabulary& vocab, std::uint64_t min_freq) {
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (vocab.frequencies()[i] > min_freq) kept.emplace_back(vocab.words()[i], vocab.frequencies()[i]);
  }
  return Vocabulary::from_counts(std::move(kept));
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.words()[i] << '\t' << i << '\t' << vocab.frequencies()[i] << '\n';
  }
}

Vocabulary read_vocabulary(std::istream& in) {
  std::vector<std::pair<std::string, std::uint64_t>> counts;
  std::vector<std::size_t> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw DataError("vocabulary line " + std::to_string(line_no) + ": expected 3 fields");
    }
    try {
      ids.push_back(std::stoull(line.substr(t1 + 1, t2 - t1 - 1)));
      counts.emplace_back(line.substr(0, t1), std::stoull(line.substr(t2 + 1)));
    } catch (const std::logic_error&) {
      throw DataError("vocabulary line " + std::to_string(line_no) + ": bad number");
    }
  }
  auto vocab = Vocabulary::from_counts(counts);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (static_cast<std::size_t>(vocab.id(counts[i].first)) != ids[i]) {
      throw DataError("vocabulary ids are not in canonical (frequency, word) order near '" +
                      counts[i].first + "'");
    }
  }
  return vocab;
}

EncodedCorpus encode(std::span<const Sentence> corpus, const Vocabulary& vocab) {
  EncodedCorpus enc;
  enc.offsets.reserve(corpus.size() + 1);
  enc.offsets.push_back(0);
  for (const auto& s : corpus) {
    for (const auto& tok : s.tokens) enc.ids.push_back(vocab.find(tok).value_or(kNoWord));
    enc.offsets.push_back(enc.ids.size());
  }
  return enc;
}

}  // namespace gendervec
