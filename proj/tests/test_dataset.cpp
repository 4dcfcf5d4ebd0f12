#include <set>
#include <sstream>

#include "doctest.h"
#include "gendervec/dataset.hpp"
#include "gendervec/errors.hpp"
#include "gendervec/rng.hpp"

using namespace gendervec;

namespace {

std::vector<LabeledWord> make_words(std::size_t uter, std::size_t neuter, std::uint64_t seed = 1) {
  Rng rng(seed);
  std::vector<LabeledWord> out;
  for (std::size_t i = 0; i < uter + neuter; ++i) {
    out.push_back({"w" + std::to_string(i), i < uter ? Gender::uter : Gender::neuter, 101 + rng.below(5000)});
  }
  rng.shuffle(std::span<LabeledWord>(out));
  return out;
}

std::size_t count_uter(const std::vector<std::string>& part, const std::vector<LabeledWord>& words) {
  std::set<std::string> u;
  for (const auto& w : words)
    if (w.gender == Gender::uter) u.insert(w.word);
  std::size_t n = 0;
  for (const auto& w : part) n += u.count(w);
  return n;
}

GenderLexicon lexicon(std::initializer_list<std::pair<const char*, GenderCode>> rows) {
  GenderLexicon l;
  for (const auto& [w, c] : rows) l.entries[w] = c;
  return l;
}

}  // namespace

TEST_CASE("candidate_words and build_dataset join vocabulary, lexicon and embedding") {
  auto vocab = Vocabulary::from_counts({{"hund", 300}, {"hus", 150}, {"katt", 100}, {"en", 900}});
  auto lex = lexicon({{"hund", GenderCode::uter}, {"hus", GenderCode::neuter}, {"katt", GenderCode::uter},
                      {"bil", GenderCode::uter}});
  auto cands = candidate_words(lex, vocab, 100);
  REQUIRE(cands.size() == 2);
  CHECK(cands[0] == LabeledWord{"hund", Gender::uter, 300});
  CHECK(cands[1] == LabeledWord{"hus", Gender::neuter, 150});

  EmbeddingMatrix emb;
  emb.words = {"en", "hund"};
  emb.vectors = Eigen::MatrixXd(2, 2);
  emb.vectors << 1, 2, 3, 4;
  const auto data = build_dataset(emb, lex, vocab, 100);
  REQUIRE(data.size() == 1);
  CHECK(data[0].word == "hund");
  CHECK(data[0].vector == std::vector<double>{3, 4});

  CHECK_THROWS_AS(build_dataset(emb, lexicon({{"bil", GenderCode::uter}}), vocab, 0), DataError);
}

TEST_CASE("per-class apportionment of 70/30") {
  const auto words = make_words(70, 30);
  const auto m = split_words(words, {}, 42);
  CHECK(m.train.size() == 80);
  CHECK(m.dev.size() == 10);
  CHECK(m.test.size() == 10);
  CHECK(count_uter(m.train, words) == 56);
  CHECK(count_uter(m.dev, words) == 7);
  CHECK(count_uter(m.test, words) == 7);
}

TEST_CASE("split invariants at corpus scale") {
  const auto words = make_words(15002, 6160, 9);
  const double share = 15002.0 / 21162.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto m = split_words(words, {}, seed);
    std::set<std::string> all;
    for (const auto* part : {&m.train, &m.dev, &m.test}) {
      for (const auto& w : *part) CHECK(all.insert(w).second);
      CHECK(std::abs(static_cast<double>(count_uter(*part, words)) / static_cast<double>(part->size()) - share) <= 0.01);
    }
    CHECK(all.size() == words.size());
    CHECK(m.train.size() + m.dev.size() + m.test.size() == 21162);
    CHECK(std::abs(static_cast<double>(m.train.size()) - 16915.0) / 21162.0 < 0.01);
  }
}

TEST_CASE("split is seed-deterministic and manifest round trips") {
  const auto words = make_words(40, 20);
  const auto a = split_words(words, {}, 5);
  const auto b = split_words(words, {}, 5);
  const auto c = split_words(words, {}, 6);
  CHECK(a.to_json() == b.to_json());
  CHECK(a.test != c.test);
  const auto back = SplitManifest::from_json(nlohmann::json::parse(a.to_json().dump()));
  CHECK(back.test == a.test);
  CHECK(back.test_digest() == a.test_digest());
  auto tampered = nlohmann::json::parse(a.to_json().dump());
  tampered["test"][0] = "intruder";
  CHECK_THROWS_AS(SplitManifest::from_json(tampered), DataError);
}

TEST_CASE("split errors") {
  CHECK_THROWS_AS(split_words(make_words(10, 2), {}, 1), DataError);
  CHECK_THROWS_AS(split_words(make_words(10, 0), {}, 1), DataError);
  CHECK_THROWS_AS(split_words(make_words(10, 10), {0.5, 0.5, 0.1}, 1), ConfigError);
  CHECK_THROWS_AS(split_words(make_words(10, 10), {1.0, 0.0, 0.0}, 1), ConfigError);
}

TEST_CASE("apply_split and stratified_split") {
  std::vector<LabeledExample> data;
  for (const auto& w : make_words(30, 12)) data.push_back({w.word, {1.0}, w.gender, w.frequency});
  const auto b = stratified_split(data, {}, 3);
  CHECK(b.train.size() + b.dev.size() + b.test.size() == data.size());
  SplitManifest m;
  m.train = {data[0].word, data[0].word};
  CHECK_THROWS_AS(apply_split(data, m), DataError);
  m.train = {"missing"};
  CHECK_THROWS_AS(apply_split(data, m), DataError);
}

TEST_CASE("frequency deciles") {
  std::vector<LabeledWord> uter;
  for (int i = 0; i < 20; ++i) uter.push_back({"u" + std::to_string(i), Gender::uter, 200});
  const auto all = class_ratio_by_decile(uter);
  for (int g = 0; g < 10; ++g) {
    CHECK(all.uter_share[static_cast<std::size_t>(g)] == 1.0);
    CHECK(all.neuter_share[static_cast<std::size_t>(g)] == 0.0);
  }
  CHECK(all.sd_uter_share == 0.0);

  // Equal frequencies: ties break by word, so pairs (a0,a1), (b0,b1), ... land together.
  std::vector<LabeledWord> alt;
  for (char c = 'a'; c < 'k'; ++c) {
    alt.push_back({std::string(1, c) + "0", Gender::uter, 500});
    alt.push_back({std::string(1, c) + "1", Gender::neuter, 500});
  }
  const auto half = class_ratio_by_decile(alt);
  for (int g = 0; g < 10; ++g) CHECK(half.uter_share[static_cast<std::size_t>(g)] == 0.5);
  CHECK(half.mean_uter_share == 0.5);

  std::vector<LabeledWord> sorted;
  for (int i = 0; i < 10; ++i) sorted.push_back({"x" + std::to_string(i), i < 5 ? Gender::uter : Gender::neuter, static_cast<std::uint64_t>(1000 - i)});
  const auto d = class_ratio_by_decile(sorted);
  CHECK(d.mean_uter_share == 0.5);
  CHECK(d.sd_uter_share == doctest::Approx(0.5));  // population SD of five 1s and five 0s
  CHECK_THROWS_AS(class_ratio_by_decile(std::span<const LabeledWord>(sorted).first(9)), DataError);
}

TEST_CASE("labeled word TSV round trip") {
  const auto words = make_words(5, 4);
  std::stringstream ss;
  write_labeled_words(ss, words);
  CHECK(read_labeled_words(ss) == words);
  std::stringstream bad("hund\tmaskulin\t3\n");
  CHECK_THROWS_AS(read_labeled_words(bad), DataError);
}
