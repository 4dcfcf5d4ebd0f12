#include <sstream>

#include "doctest.h"
#include "gendervec/corpus.hpp"
#include "gendervec/errors.hpp"
#include "gendervec/synthetic.hpp"

using namespace gendervec;

TEST_CASE("class allocation follows the prior") {
  SyntheticSpec s;
  s.sentences = 2000;
  const auto lang = generate_synthetic_language(s);
  CHECK(lang.lexicon.size() == 1000);
  CHECK(lang.lexicon.count(GenderCode::uter) == 700);
  CHECK(lang.lexicon.count(GenderCode::neuter) == 300);
  CHECK(lang.lines.size() == 2000);
}

TEST_CASE("sentences have the filler article noun filler shape with agreement") {
  SyntheticSpec s;
  s.nouns = 50;
  s.sentences = 500;
  s.fillers = 20;
  const auto lang = generate_synthetic_language(s);
  for (const auto& line : lang.lines) {
    const auto t = normalize_line(line).tokens;
    REQUIRE(t.size() >= 3);
    CHECK(t.back() == ".");
    std::size_t nouns = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto code = lang.lexicon.find(t[i]);
      if (!code) continue;
      ++nouns;
      REQUIRE(i > 0);
      CHECK(t[i - 1] == (*code == GenderCode::uter ? "en" : "ett"));
    }
    CHECK(nouns == 1);
    CHECK(normalize_line(line).tokens.size() == t.size());
  }
  CHECK(measured_agreement_noise(lang.lines, s, lang) == 0.0);
}

TEST_CASE("minimal language") {
  SyntheticSpec s;
  s.nouns = 2;
  s.sentences = 2;
  s.classes[0].prior = 0.5;
  s.classes[1].prior = 0.5;
  const auto lang = generate_synthetic_language(s);
  CHECK(lang.lines.size() == 2);
  CHECK(lang.lexicon.size() == 2);
}

TEST_CASE("agreement noise is measurable from the text") {
  SyntheticSpec s;
  s.sentences = 50000;
  s.agreement_noise = 0.1;
  const auto lang = generate_synthetic_language(s);
  const double measured = measured_agreement_noise(lang.lines, s, lang);
  CHECK(measured == doctest::Approx(static_cast<double>(lang.flipped_articles) / static_cast<double>(lang.article_tokens)));
  CHECK(std::abs(measured - 0.1) < 0.01);
}

TEST_CASE("generation is seed-deterministic") {
  SyntheticSpec s;
  s.sentences = 300;
  const auto a = generate_synthetic_language(s);
  const auto b = generate_synthetic_language(s);
  CHECK(a.lines == b.lines);
  s.seed = 2;
  CHECK(generate_synthetic_language(s).lines != a.lines);
}

TEST_CASE("invalid specs") {
  SyntheticSpec s;
  s.classes.pop_back();
  CHECK_THROWS_AS(s.validate(), ConfigError);
  SyntheticSpec dup;
  dup.classes[1].article = "en";
  CHECK_THROWS_AS(dup.validate(), ConfigError);
  SyntheticSpec prior;
  prior.classes[0].prior = 0.9;
  CHECK_THROWS_AS(prior.validate(), ConfigError);
  SyntheticSpec noise;
  noise.agreement_noise = 1.5;
  CHECK_THROWS_AS(noise.validate(), ConfigError);
  SyntheticSpec clash;
  clash.classes[0].article = "nx";
  CHECK_THROWS_AS(clash.validate(), ConfigError);
}
