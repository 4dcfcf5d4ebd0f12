// Acceptance harness: one PASS/FAIL/SKIP line per criterion. Exits
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gendervec/classifier.hpp"
#include "gendervec/errors.hpp"
#include "gendervec/linalg.hpp"
#include "gendervec/metrics.hpp"
#include "gendervec/pipeline.hpp"
#include "gendervec/rng.hpp"
#include "gendervec/stats.hpp"
#include "gendervec/synthetic.hpp"
#include "oracles.hpp"

using namespace gendervec;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void skip(const std::string& name, const std::string& detail) {
  std::printf("SKIP %s: %s\n", name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool within_pp(double value, double expected_percent, double tol = 0.05) {
  return std::abs(100.0 * value - expected_percent) <= tol;
}

void published_counts() {
  ConfusionMatrix cm;
  cm.counts[class_index(Gender::neuter)][class_index(Gender::neuter)] = 542;
  cm.counts[class_index(Gender::neuter)][class_index(Gender::uter)] = 102;
  cm.counts[class_index(Gender::uter)][class_index(Gender::uter)] = 1430;
  cm.counts[class_index(Gender::uter)][class_index(Gender::neuter)] = 69;
  const double acc = accuracy(cm);
  const auto n = precision_recall_f(cm, Gender::neuter);
  const auto u = precision_recall_f(cm, Gender::uter);
  const bool ok = within_pp(acc, 92.02) && within_pp(n.precision, 88.70) && within_pp(n.recall, 84.16) &&
                  within_pp(n.f_score, 86.37) && within_pp(u.precision, 93.34) &&
                  within_pp(u.recall, 95.40) && within_pp(u.f_score, 94.36);
  verdict(ok, "metrics from published confusion counts",
          fmt("acc %.3f; neuter P/R/F %.3f/%.3f/%.3f; uter P/R/F %.3f/%.3f/%.3f (tol 0.05pp)", 100 * acc,
              100 * n.precision, 100 * n.recall, 100 * n.f_score, 100 * u.precision, 100 * u.recall,
              100 * u.f_score));
}

void weighted_formula() {
  const std::map<Gender, double> priors{{Gender::neuter, 0.29}, {Gender::uter, 0.71}};
  const double a = weighted_accuracy({{Gender::neuter, 0.846}, {Gender::uter, 0.971}}, priors);
  const double b = weighted_accuracy({{Gender::neuter, 0.393}, {Gender::uter, 0.946}}, priors);
  verdict(within_pp(a, 93.48) && within_pp(b, 78.56), "weighted accuracy formula",
          fmt("%.4f (expect 93.48), %.4f (expect 78.56), tol 0.05", 100 * a, 100 * b));
}

void svd_oracle() {
  Rng rng(20240501);
  double worst = 0.0;
  int failed = 0;
  for (int t = 0; t < 200; ++t) {
    const auto rows = static_cast<Eigen::Index>(1 + rng.below(64));
    const auto cols = static_cast<Eigen::Index>(1 + rng.below(64));
    Eigen::MatrixXd m(rows, cols);
    oracle::Dense d{static_cast<std::size_t>(rows), static_cast<std::size_t>(cols),
                    std::vector<double>(static_cast<std::size_t>(rows * cols))};
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        m(i, j) = rng.normal();
        d(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m(i, j);
      }
    }
    const auto kmax = static_cast<std::size_t>(std::min(rows, cols));
    const std::size_t k = 1 + rng.below(kmax);
    try {
      SvdOptions opts;
      opts.seed = derive_seed(7, static_cast<std::uint64_t>(t));
      const auto r = truncated_svd(DenseOperator(m), k, opts);
      const auto ref = oracle::singular_values(d);
      for (std::size_t i = 0; i < k; ++i) {
        worst = std::max(worst, std::abs(r.singular_values(static_cast<Eigen::Index>(i)) - ref[i]));
      }
    } catch (const std::exception&) {
      ++failed;
    }
  }
  verdict(failed == 0 && worst <= 1e-6, "truncated SVD vs dense oracle",
          fmt("200 matrices, dims <= 64, max |dsigma| = %.3g (tol 1e-6), %d errors", worst, failed));
}

void gradient_oracle() {
  Rng rng(99);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int k = 2 + static_cast<int>(rng.below(30));
    const int h = 1 + static_cast<int>(rng.below(64));
    const auto act = t % 2 == 0 ? Activation::relu : Activation::tanh;
    const auto model = MLPModel::initialize(k, h, act, derive_seed(3, static_cast<std::uint64_t>(t)));
    Batch b;
    const auto n = static_cast<Eigen::Index>(1 + rng.below(40));
    b.x.resize(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int j = 0; j < k; ++j) b.x(i, j) = rng.normal();
      b.y.push_back(static_cast<int>(rng.below(2)));
    }
    worst = std::max(worst, gradient_check(model, b));
  }
  verdict(worst <= 1e-4, "classifier gradient check",
          fmt("20 random models, max relative error %.3g (tol 1e-4)", worst));
}

void kendall_oracle() {
  Rng rng(31337);
  int mismatches = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.below(199);
    std::vector<double> x(n), y(n);
    do {
      const auto levels_x = 1 + rng.below(8), levels_y = 1 + rng.below(8);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = static_cast<double>(rng.below(levels_x));
        y[i] = static_cast<double>(rng.below(levels_y));
      }
    } while (std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end() ||
             std::adjacent_find(y.begin(), y.end(), std::not_equal_to<>()) == y.end());
    const auto c = kendall_counts(x, y);
    const auto ref = oracle::kendall_pairs(x, y);
    const bool counts_equal = c.s == ref.concordant - ref.discordant &&
                              c.ties_x == static_cast<std::uint64_t>(ref.ties_x) &&
                              c.ties_y == static_cast<std::uint64_t>(ref.ties_y) &&
                              c.ties_xy == static_cast<std::uint64_t>(ref.ties_both);
    if (!counts_equal || kendall_tau_b(x, y).statistic != oracle::kendall_tau_b(x, y)) ++mismatches;
  }
  verdict(mismatches == 0, "Kendall tau-b vs pairwise oracle",
          fmt("100 tied vectors, n <= 200, %d inexact", mismatches));
}

void exhaustive_permutation() {
  const std::vector<double> a{0, 0, 0, 0}, b{10, 10, 10, 10};
  const auto r = fisher_pitman_permutation(a, b);
  const double ref = oracle::exhaustive_permutation_p(a, b);
  const bool ok = r.exhaustive && r.permutations == 70 && std::abs(r.p - 2.0 / 70.0) <= 1e-15 &&
                  std::abs(ref - 2.0 / 70.0) <= 1e-15;
  verdict(ok, "exhaustive Fisher-Pitman",
          fmt("p = %.17g (expect 2/70 = %.17g), %llu relabelings", r.p, 2.0 / 70.0,
              static_cast<unsigned long long>(r.permutations)));
}

void calibration() {
  int rejections = 0;
  const int trials = 500;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(555, static_cast<std::uint64_t>(t)));
    std::vector<double> a(20), b(20);
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = rng.normal();
    const auto r = fisher_pitman_permutation(a, b, 999, derive_seed(777, static_cast<std::uint64_t>(t)));
    if (r.p < 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / trials;
  verdict(rate >= 0.03 && rate <= 0.07, "permutation test calibration",
          fmt("%d/%d null trials with p < 0.05, rate %.3f (allowed [0.03, 0.07])", rejections, trials, rate));
}

struct SyntheticFiles {
  fs::path dir;
  ExperimentConfig cfg;
};

SyntheticFiles write_synthetic(const fs::path& dir, const SyntheticSpec& spec) {
  fs::create_directories(dir);
  const auto lang = generate_synthetic_language(spec);
  {
    std::ofstream out(dir / "corpus.txt");
    write_lines(out, lang.lines);
  }
  {
    std::ofstream out(dir / "lexicon.tsv");
    write_lexicon(out, lang.lexicon);
  }
  SyntheticFiles f{dir, {}};
  f.cfg.corpus = (dir / "corpus.txt").string();
  f.cfg.lexicon = (dir / "lexicon.tsv").string();
  f.cfg.min_freq = 5;
  f.cfg.vocab_min_freq = 0;
  f.cfg.embedding.dim = 50;
  return f;
}

EvalOutputs run_single(const SyntheticFiles& f, ContextConfig ctx, const std::string& name) {
  auto cfg = f.cfg;
  cfg.grid = {ctx};
  return run_experiment(cfg, f.dir / name);
}

void synthetic_experiment(const fs::path& root) {
  SyntheticSpec spec;  // 1000 nouns, 0.7/0.3 prior, 100k sentences
  const auto t0 = std::chrono::steady_clock::now();
  const auto f = write_synthetic(root / "clean", spec);
  // The full 15-cell experiment, timed end to end.
  const auto full = run_experiment(f.cfg, f.dir / "full");
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto grid = read_json_file(f.dir / "full" / "grid.json");

  const auto bw1 = run_single(f, {ContextType::asymmetric_backward, 1}, "backward1");
  const auto fw1 = run_single(f, {ContextType::asymmetric_forward, 1}, "forward1");
  const auto bw5 = run_single(f, {ContextType::asymmetric_backward, 5}, "backward5");

  const auto& rb1 = bw1.evaluation.report;
  const auto& rf1 = fw1.evaluation.report;
  const auto& rb5 = bw5.evaluation.report;
  verdict(rb1.accuracy >= 0.95, "synthetic backward w=1 test accuracy",
          fmt("%.4f (need >= 0.95), zero-rule %.4f", rb1.accuracy, rb1.baseline_accuracy));
  verdict(std::abs(rf1.accuracy - rf1.baseline_accuracy) <= 0.03, "synthetic forward w=1 near zero-rule",
          fmt("%.4f vs zero-rule %.4f (need within 0.03)", rf1.accuracy, rf1.baseline_accuracy));
  verdict(rb1.accuracy >= rb5.accuracy, "synthetic backward w=1 >= backward w=5",
          fmt("test %.4f vs %.4f; dev %.4f vs %.4f", rb1.accuracy, rb5.accuracy,
              bw1.report["dev_accuracy"].get<double>(), bw5.report["dev_accuracy"].get<double>()));
  verdict(seconds <= 180.0, "synthetic experiment runtime",
          fmt("generate + 15-cell grid + test evaluation in %.1f s (limit 180 s); best %s, test %.4f",
              seconds, grid["best"].dump().c_str(), full.evaluation.report.accuracy));
}

void entropy_ordering(const fs::path& root) {
  // The noiseless language is classified without error, which leaves no
  // error group; agreement noise and ambiguous nouns provide one.
  SyntheticSpec spec;
  spec.agreement_noise = 0.05;
  spec.ambiguous_share = 0.05;
  const auto f = write_synthetic(root / "noisy", spec);
  const auto ev = run_single(f, {ContextType::asymmetric_backward, 1}, "run");
  const auto& r = ev.evaluation.report;
  const auto& perm = ev.evaluation.entropy_frequency.entropy_permutation;
  if (!perm || r.entropy_error.count == 0) {
    verdict(false, "entropy ordering", "no erroneous predictions to compare");
    return;
  }
  const bool ok = r.entropy_error.mean > r.entropy_correct.mean && perm->p < 0.01;
  verdict(ok, "entropy ordering",
          fmt("agreement_noise 0.05, ambiguous_share 0.05: error mean %.4f (n=%zu) vs correct mean %.4f "
              "(n=%zu), Fisher-Pitman p = %.3g, z = %.2f",
              r.entropy_error.mean, r.entropy_error.count, r.entropy_correct.mean, r.entropy_correct.count,
              perm->p, perm->z));
}

void determinism(const fs::path& root) {
  SyntheticSpec spec;
  spec.nouns = 300;
  spec.sentences = 20000;
  spec.agreement_noise = 0.05;
  const auto f = write_synthetic(root / "determinism", spec);
  auto cfg = f.cfg;
  cfg.grid = {{ContextType::asymmetric_backward, 1}, {ContextType::symmetric, 2}};
  cfg.embedding.dim = 20;
  run_experiment(cfg, f.dir / "a");
  const auto manifest = RunManifest::from_json(read_json_file(f.dir / "a" / "run_manifest.json"));
  run_experiment(manifest.config, f.dir / "b");
  const bool report_same = slurp(f.dir / "a" / "eval_report.json") == slurp(f.dir / "b" / "eval_report.json");
  const bool split_same = slurp(f.dir / "a" / "split.json") == slurp(f.dir / "b" / "split.json");
  verdict(report_same && split_same, "determinism from one run manifest",
          fmt("eval_report.json %s, split.json %s", report_same ? "identical" : "differs",
              split_same ? "identical" : "differs"));
}

void swedish() {
  const char* corpus = std::getenv("GENDERVEC_SWEDISH_CORPUS");
  const char* lexicon = std::getenv("GENDERVEC_SWEDISH_LEXICON");
  if (!corpus || !lexicon) {
    skip("Swedish corpus statistics and accuracy",
         "set GENDERVEC_SWEDISH_CORPUS and GENDERVEC_SWEDISH_LEXICON to run");
    return;
  }
  ExperimentConfig cfg;
  cfg.corpus = corpus;
  cfg.lexicon = lexicon;
  const auto dir = fs::temp_directory_path() / "gendervec_acceptance_swedish";
  fs::remove_all(dir);
  const auto ev = run_experiment(cfg, dir);
  const auto& d = ev.report["dataset"];
  const auto nouns = d["examples"].get<std::size_t>();
  const double uter = d["uter_share"].get<double>();
  const double sd = 100.0 * read_json_file(dir / "deciles.json")["sd_uter_share"].get<double>();
  const double acc = 100.0 * ev.evaluation.report.accuracy;
  const bool ok = nouns == 21162 && std::abs(100.0 * uter - 70.89) <= 0.5 && sd < 2.0 && acc >= 90.0 &&
                  acc <= 94.0;
  verdict(ok, "Swedish corpus statistics and accuracy",
          fmt("%zu nouns (expect 21162), uter %.2f%% (70.89 +/- 0.5), decile sd %.2f (< 2), test accuracy %.2f "
              "(in [90, 94])",
              nouns, 100.0 * uter, sd, acc));
}

}  // namespace

int main() {
  const auto root = fs::temp_directory_path() / "gendervec_acceptance";
  fs::remove_all(root);
  try {
    published_counts();
    weighted_formula();
    synthetic_experiment(root);
    entropy_ordering(root);
    svd_oracle();
    gradient_oracle();
    kendall_oracle();
    exhaustive_permutation();
    calibration();
    determinism(root);
    swedish();
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance harness aborted: %s\n", e.what());
    ++failures;
  }
  fs::remove_all(root);
  std::printf("%d failed\n", failures);
  return failures == 0 ? 0 : 1;
}
