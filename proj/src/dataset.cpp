#include "gendervec/dataset.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "gendervec/digest.hpp"
#include "gendervec/errors.hpp"
#include "gendervec/rng.hpp"

namespace gendervec {

std::string_view gender_name(Gender g) { return g == Gender::uter ? "uter" : "neuter"; }

Gender parse_gender(std::string_view s) {
  if (s == "uter" || s == "u") return Gender::uter;
  if (s == "neuter" || s == "n") return Gender::neuter;
  throw DataError("unknown gender label: " + std::string(s));
}

std::vector<LabeledWord> candidate_words(const GenderLexicon& lex, const Vocabulary& vocab,
                                         std::uint64_t min_freq) {
  std::vector<LabeledWord> out;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (vocab.frequencies()[i] <= min_freq) continue;
    const auto code = lex.find(vocab.words()[i]);
    if (code == GenderCode::uter) {
      out.push_back({vocab.words()[i], Gender::uter, vocab.frequencies()[i]});
    } else if (code == GenderCode::neuter) {
      out.push_back({vocab.words()[i], Gender::neuter, vocab.frequencies()[i]});
    }
  }
  return out;
}

std::vector<LabeledExample> build_dataset(const EmbeddingMatrix& emb, const GenderLexicon& lex,
                                          const Vocabulary& vocab, std::uint64_t min_freq) {
  std::unordered_map<std::string_view, std::size_t> rows;
  rows.reserve(emb.size());
  for (std::size_t i = 0; i < emb.size(); ++i) rows.emplace(emb.words[i], i);

  std::vector<LabeledExample> out;
  for (auto& w : candidate_words(lex, vocab, min_freq)) {
    auto it = rows.find(w.word);
    if (it == rows.end()) continue;
    const auto row = emb.vectors.row(static_cast<Eigen::Index>(it->second));
    out.push_back({std::move(w.word), std::vector<double>(row.begin(), row.end()), w.gender,
                   w.frequency});
  }
  if (out.empty()) {
    throw DataError("no word is shared by the embedding, the lexicon and the frequency filter");
  }
  return out;
}

std::vector<LabeledWord> labels_of(std::span<const LabeledExample> data) {
  std::vector<LabeledWord> out;
  out.reserve(data.size());
  for (const auto& e : data) out.push_back({e.word, e.gender, e.frequency});
  return out;
}

void SplitRatios::validate() const {
  if (!(train > 0 && dev > 0 && test > 0)) throw ConfigError("split ratios must be positive");
  if (std::abs(train + dev + test - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
}

std::string SplitManifest::test_digest() const { return word_list_digest(test); }

nlohmann::ordered_json SplitManifest::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["ratios"] = {ratios.train, ratios.dev, ratios.test};
  j["sizes"] = {train.size(), dev.size(), test.size()};
  j["test_digest"] = test_digest();
  j["train"] = train;
  j["dev"] = dev;
  j["test"] = test;
  return j;
}

SplitManifest SplitManifest::from_json(const nlohmann::json& j) {
  SplitManifest m;
  try {
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto r = j.at("ratios").get<std::vector<double>>();
    if (r.size() != 3) throw DataError("split manifest: ratios must have 3 entries");
    m.ratios = {r[0], r[1], r[2]};
    m.train = j.at("train").get<std::vector<std::string>>();
    m.dev = j.at("dev").get<std::vector<std::string>>();
    m.test = j.at("test").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("split manifest: ") + e.what());
  }
  if (j.contains("test_digest") && j["test_digest"].get<std::string>() != m.test_digest()) {
    throw DataError("split manifest: test_digest does not match the listed test words");
  }
  return m;
}

SplitManifest split_words(std::span<const LabeledWord> words, const SplitRatios& ratios,
                          std::uint64_t seed) {
  ratios.validate();
  const std::array<double, 3> r = {ratios.train, ratios.dev, ratios.test};
  std::array<std::vector<std::size_t>, 3> parts;
  Rng rng(seed);

  for (int cls = 0; cls < kNumClasses; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (class_index(words[i].gender) == cls) members.push_back(i);
    }
    if (members.size() < 3) {
      throw DataError("class " + std::string(gender_name(static_cast<Gender>(cls))) + " has " +
                      std::to_string(members.size()) + " members; at least 3 are needed");
    }
    rng.shuffle(std::span<std::size_t>(members));

    const auto n = static_cast<double>(members.size());
    std::array<std::size_t, 3> quota{};
    std::array<double, 3> frac{};
    std::size_t assigned = 0;
    for (int p = 0; p < 3; ++p) {
      const double exact = n * r[static_cast<std::size_t>(p)];
      quota[static_cast<std::size_t>(p)] = static_cast<std::size_t>(std::floor(exact));
      frac[static_cast<std::size_t>(p)] = exact - std::floor(exact);
      assigned += quota[static_cast<std::size_t>(p)];
    }
    std::array<std::size_t, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t i = 0; assigned < members.size(); ++i, ++assigned) ++quota[order[i % 3]];

    std::size_t pos = 0;
    for (std::size_t p = 0; p < 3; ++p) {
      for (std::size_t q = 0; q < quota[p]; ++q) parts[p].push_back(members[pos++]);
    }
  }

  SplitManifest m;
  m.seed = seed;
  m.ratios = ratios;
  std::array<std::vector<std::string>*, 3> dst = {&m.train, &m.dev, &m.test};
  for (std::size_t p = 0; p < 3; ++p) {
    std::sort(parts[p].begin(), parts[p].end());
    for (auto i : parts[p]) dst[p]->push_back(words[i].word);
  }
  return m;
}

SplitBundle apply_split(std::span<const LabeledExample> data, const SplitManifest& manifest) {
  std::unordered_map<std::string_view, const LabeledExample*> by_word;
  for (const auto& e : data) by_word.emplace(e.word, &e);
  std::unordered_set<std::string_view> seen;
  auto take = [&](const std::vector<std::string>& list) {
    std::vector<LabeledExample> out;
    out.reserve(list.size());
    for (const auto& w : list) {
      auto it = by_word.find(w);
      if (it == by_word.end()) throw DataError("split manifest word not in dataset: " + w);
      if (!seen.insert(w).second) throw DataError("split manifest lists '" + w + "' twice");
      out.push_back(*it->second);
    }
    return out;
  };
  SplitBundle b;
  b.seed = manifest.seed;
  b.train = take(manifest.train);
  b.dev = take(manifest.dev);
  b.test = take(manifest.test);
  return b;
}

SplitBundle stratified_split(std::span<const LabeledExample> data, const SplitRatios& ratios,
                             std::uint64_t seed) {
  const auto words = labels_of(data);
  return apply_split(data, split_words(words, ratios, seed));
}

DecileReport class_ratio_by_decile(std::span<const LabeledWord> words) {
  if (words.size() < 10) throw DataError("decile analysis needs at least 10 words");
  std::vector<const LabeledWord*> sorted;
  for (const auto& w : words) sorted.push_back(&w);
  std::sort(sorted.begin(), sorted.end(), [](const LabeledWord* a, const LabeledWord* b) {
    return a->frequency != b->frequency ? a->frequency > b->frequency : a->word < b->word;
  });

  DecileReport rep;
  const std::size_t n = sorted.size();
  for (std::size_t g = 0; g < 10; ++g) {
    const std::size_t lo = g * n / 10;
    const std::size_t hi = (g + 1) * n / 10;
    std::size_t uter = 0;
    for (std::size_t i = lo; i < hi; ++i) uter += sorted[i]->gender == Gender::uter;
    rep.group_size[g] = hi - lo;
    rep.uter_share[g] = static_cast<double>(uter) / static_cast<double>(hi - lo);
    rep.neuter_share[g] = 1.0 - rep.uter_share[g];
  }
  rep.mean_uter_share = std::accumulate(rep.uter_share.begin(), rep.uter_share.end(), 0.0) / 10.0;
  double ss = 0.0;
  for (double s : rep.uter_share) ss += (s - rep.mean_uter_share) * (s - rep.mean_uter_share);
  rep.sd_uter_share = std::sqrt(ss / 10.0);
  return rep;
}

double uter_share(std::span<const LabeledWord> words) {
  if (words.empty()) return 0.0;
  const auto u = std::count_if(words.begin(), words.end(),
                               [](const LabeledWord& w) { return w.gender == Gender::uter; });
  return static_cast<double>(u) / static_cast<double>(words.size());
}

double uter_share(std::span<const LabeledExample> data) {
  if (data.empty()) return 0.0;
  const auto u = std::count_if(data.begin(), data.end(),
                               [](const LabeledExample& e) { return e.gender == Gender::uter; });
  return static_cast<double>(u) / static_cast<double>(data.size());
}

}  // namespace gendervec

namespace gendervec {

void write_labeled_words(std::ostream& out, std::span<const LabeledWord> words) {
  for (const auto& w : words) out << w.word << '\t' << gender_name(w.gender) << '\t' << w.frequency << '\n';
}

std::vector<LabeledWord> read_labeled_words(std::istream& in) {
  std::vector<LabeledWord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw DataError("dataset line " + std::to_string(line_no) + ": expected 3 fields");
    }
    try {
      out.push_back({line.substr(0, t1), parse_gender(line.substr(t1 + 1, t2 - t1 - 1)),
                     std::stoull(line.substr(t2 + 1))});
    } catch (const std::logic_error&) {
      throw DataError("dataset line " + std::to_string(line_no) + ": bad frequency");
    }
  }
  return out;
}

}  // namespace gendervec
