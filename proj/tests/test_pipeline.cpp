#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gendervec/digest.hpp"
#include "gendervec/errors.hpp"
#include "gendervec/pipeline.hpp"
#include "gendervec/report.hpp"
#include "gendervec/synthetic.hpp"

using namespace gendervec;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A small agreement language written to disk with a two-cell grid.
struct Fixture {
  fs::path dir;
  ExperimentConfig cfg;

  explicit Fixture(const std::string& name) {
    dir = fs::temp_directory_path() / ("gendervec_pipeline_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    SyntheticSpec s;
    s.nouns = 120;
    s.sentences = 6000;
    s.fillers = 40;
    s.agreement_noise = 0.05;
    s.ambiguous_share = 0.05;
    const auto lang = generate_synthetic_language(s);
    {
      std::ofstream out(dir / "corpus.txt");
      write_lines(out, lang.lines);
    }
    {
      std::ofstream out(dir / "lexicon.tsv");
      write_lexicon(out, lang.lexicon);
    }
    cfg.corpus = (dir / "corpus.txt").string();
    cfg.lexicon = (dir / "lexicon.tsv").string();
    cfg.grid = {{ContextType::asymmetric_forward, 1}, {ContextType::asymmetric_backward, 1}};
    cfg.embedding.dim = 10;
    cfg.training.max_epochs = 40;
    cfg.min_freq = 2;
    cfg.vocab_min_freq = 0;
    cfg.n_perm = 500;
  }
  ~Fixture() { fs::remove_all(dir); }
};

}  // namespace

TEST_CASE("config JSON round trip and validation") {
  ExperimentConfig c;
  c.corpus = "c.txt";
  c.min_freq = 7;
  c.vocab_min_freq = 3;
  c.training.activation = Activation::tanh;
  const auto back = ExperimentConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  CHECK(back.to_json() == c.to_json());
  CHECK(back.grid.size() == 15);

  auto j = nlohmann::json::parse(R"({"context_types":["backward","symmetric"],"window_sizes":[1,2,3],"K":20})");
  const auto g = ExperimentConfig::from_json(j);
  CHECK(g.grid.size() == 6);
  CHECK(g.embedding.dim == 20);
  const auto one = ExperimentConfig::from_json(nlohmann::json::parse(R"({"context_type":"forward","window_size":2})"));
  REQUIRE(one.grid.size() == 1);
  CHECK(one.grid[0] == ContextConfig{ContextType::asymmetric_forward, 2});

  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"windw_size":2})")), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"K":"fifty"})")), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"window_size":9})")).validate(), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/config.json"), ConfigError);

  ExperimentConfig inc;
  inc.inclusive_threshold = true;
  CHECK(inc.strict_min_freq() == 99);
  CHECK(c.strict_vocab_min_freq() == 3);
}

TEST_CASE("grid tie break prefers small windows, then backward, symmetric, forward") {
  CHECK(grid_tie_break({ContextType::asymmetric_forward, 1}, {ContextType::asymmetric_backward, 2}));
  CHECK(grid_tie_break({ContextType::asymmetric_backward, 3}, {ContextType::symmetric, 3}));
  CHECK(grid_tie_break({ContextType::symmetric, 3}, {ContextType::asymmetric_forward, 3}));
  CHECK(!grid_tie_break({ContextType::asymmetric_forward, 3}, {ContextType::asymmetric_backward, 3}));
}

TEST_CASE("tune then evaluate on a small agreement language") {
  Fixture f("small");
  const auto run = f.dir / "run";
  const auto t = tune(f.cfg, run);
  for (const auto* name : {"run_manifest.json", "split.json", "grid.json", "dataset.tsv", "vocab.tsv",
                           "embedding.bin", "model.bin", "deciles.json"}) {
    CHECK(fs::exists(run / name));
  }
  REQUIRE(t.grid.best.has_value());
  CHECK(t.grid.best_cell().config.context_type == ContextType::asymmetric_backward);
  CHECK(t.grid.cells[1].dev_accuracy > t.grid.cells[0].dev_accuracy);
  CHECK(t.manifest.lexicon_sha256 == sha256_file(f.cfg.lexicon));

  const auto ev = evaluate_run(run / "run_manifest.json", run);
  CHECK(ev.evaluation.report.accuracy > ev.evaluation.report.baseline_accuracy);
  CHECK(ev.report["test_digest"] == t.split.test_digest());
  CHECK(ev.report.contains("dev_accuracy"));
  CHECK(ev.report.contains("test_accuracy"));
  for (const auto* name : {"eval_report.json", "predictions.csv", "errors.csv", "projection.csv", "entropy_frequency.csv"}) {
    CHECK(fs::exists(run / name));
  }
  const auto preds = read_csv(run / "predictions.csv");
  CHECK(preds.rows.size() == t.split.test.size());
  const auto errs = read_csv(run / "errors.csv");
  CHECK(errs.header == std::vector<std::string>{"word", "gold", "predicted", "entropy", "frequency"});
  CHECK(errs.rows.size() == ev.evaluation.report.confusion.total() - ev.evaluation.report.confusion.correct());

  const auto plots = render_report(run);
  CHECK(plots.size() == 6);
  for (const auto& p : plots) CHECK(slurp(run / p).rfind("<svg", 0) == 0);

  SUBCASE("a second run reproduces the reports byte for byte") {
    const auto run2 = f.dir / "run2";
    tune(f.cfg, run2);
    evaluate_run(run2 / "run_manifest.json", run2);
    CHECK(slurp(run / "eval_report.json") == slurp(run2 / "eval_report.json"));
    CHECK(slurp(run / "split.json") == slurp(run2 / "split.json"));
    CHECK(slurp(run / "predictions.csv") == slurp(run2 / "predictions.csv"));
  }
  SUBCASE("a tampered test list is rejected") {
    auto split = read_json_file(run / "split.json");
    std::swap(split["test"], split["dev"]);
    split.erase("test_digest");
    write_json_file(run / "split.json", nlohmann::ordered_json(split));
    CHECK_THROWS_AS(evaluate_run(run / "run_manifest.json", run), DataError);
  }
  SUBCASE("a changed lexicon is rejected") {
    std::ofstream(f.cfg.lexicon, std::ios::app) << "extra\tu\n";
    CHECK_THROWS_AS(evaluate_run(run / "run_manifest.json", run), DataError);
  }
}

TEST_CASE("final_evaluate refuses a test set that differs from the manifest") {
  std::vector<LabeledExample> test = {{"a", {1.0, 0.0}, Gender::uter, 5}, {"b", {0.0, 1.0}, Gender::neuter, 9}};
  SplitManifest m;
  m.test = {"a", "b"};
  const auto model = MLPModel::initialize(2, 4, Activation::relu, 1);
  CHECK_NOTHROW(final_evaluate(model, test, m, m.test_digest(), 100, 1));
  CHECK_THROWS_AS(final_evaluate(model, test, m, "0000", 100, 1), DataError);
  SplitManifest other;
  other.test = {"a", "c"};
  CHECK_THROWS_AS(final_evaluate(model, test, other, other.test_digest(), 100, 1), DataError);
}

TEST_CASE("failing grid cells are recorded and skipped") {
  Fixture f("failing");
  f.cfg.embedding.dim = 100000;
  const auto run = f.dir / "run";
  CHECK_THROWS_AS(tune(f.cfg, run), DataError);
  const auto grid = read_json_file(run / "grid.json");
  CHECK(grid["cells"].size() == 2);
  CHECK(grid["cells"][0]["ok"] == false);
  CHECK(grid["best"].is_null());
}

TEST_CASE("zero-rule records") {
  std::vector<LabeledExample> test = {{"a", {1.0}, Gender::uter, 5}, {"b", {0.0}, Gender::neuter, 9}};
  const auto r = zero_rule_records(test, Gender::uter);
  CHECK(make_eval_report(r).accuracy == 0.5);
}
