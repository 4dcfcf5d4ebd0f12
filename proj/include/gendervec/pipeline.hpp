#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gendervec/classifier.hpp"
#include "gendervec/cooccurrence.hpp"
#include "gendervec/corpus.hpp"
#include "gendervec/dataset.hpp"
#include "gendervec/embedding.hpp"
#include "gendervec/lexicon.hpp"
#include "gendervec/metrics.hpp"
#include "gendervec/projection.hpp"
#include "gendervec/stats.hpp"
#include "json.hpp"

namespace gendervec {

/// 3 context types x window sizes 1..5.
std::vector<ContextConfig> default_grid();

/// Every knob of a run. JSON keys use the field names of ContextConfig,
/// EmbeddingConfig (K, alpha, sigma_power) and TrainConfig.
struct ExperimentConfig {
  std::string corpus;
  std::string lexicon;
  std::vector<ContextConfig> grid = default_grid();
  EmbeddingConfig embedding;
  TrainConfig training;
  std::uint64_t min_freq = 100;
  /// Frequency filter of the matrix vocabulary; defaults to min_freq.
  std::optional<std::uint64_t> vocab_min_freq;
  /// Treat min_freq as ">=" instead of ">".
  bool inclusive_threshold = false;
  SplitRatios ratios;
  std::uint64_t split_seed = 1;
  std::uint64_t n_perm = 10000;
  std::uint64_t perm_seed = 2024;
  double log_frequency_cut = 8.0;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  /// Missing keys keep their defaults; unknown keys are a ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// The strict threshold the frequency filters apply.
  std::uint64_t strict_min_freq() const;
  std::uint64_t strict_vocab_min_freq() const;
};

/// Corpus and lexicon after normalization, filtering and restriction.
struct PreparedData {
  std::vector<Sentence> sentences;
  Vocabulary vocab;  // filtered matrix vocabulary
  EncodedCorpus encoded;
  GenderLexicon lexicon;  // uter/neuter only
  std::vector<LabeledWord> candidates;
};

PreparedData prepare_data(std::vector<Sentence> sentences, const GenderLexicon& lexicon,
                          const ExperimentConfig& cfg);

struct GridCell {
  ContextConfig config;
  bool ok = false;
  std::string error;
  double dev_accuracy = 0.0;
  std::array<double, kNumClasses> dev_class_accuracy{};
  double dev_weighted_accuracy = 0.0;  // class accuracies weighted by dataset shares
  int best_epoch = 0;
  std::size_t examples = 0;
};

struct GridResult {
  std::vector<GridCell> cells;
  std::optional<std::size_t> best;

  const GridCell& best_cell() const;
};

nlohmann::ordered_json to_json(const GridResult& g);

/// Everything produced for one grid cell.
struct CellRun {
  EmbeddingMatrix embedding;
  SplitBundle split;
  TrainResult training;
};

/// Runs cooc -> embed -> label -> split -> train -> dev-evaluate for one
/// configuration using the fixed word split.
CellRun run_cell(const PreparedData& data, const ContextConfig& ctx, const ExperimentConfig& cfg,
                 const SplitManifest& split);

/// true if cell a should win over cell b at equal dev accuracy:
/// smaller window first, then backward < symmetric < forward.
bool grid_tie_break(const ContextConfig& a, const ContextConfig& b);

/// Evaluates every grid cell. A failing cell is recorded and skipped. When
/// `best_run` is given it receives the artifacts of the winning cell.
GridResult grid_search(const PreparedData& data, const ExperimentConfig& cfg,
                       const SplitManifest& split, CellRun* best_run = nullptr);

struct ProjectedPoint {
  std::string word;
  Gender gold;
  Gender predicted;
  double x;
  double y;
};

struct FinalEvaluation {
  EvalReport report;
  std::vector<PredictionRecord> records;
  EntropyFrequencyReport entropy_frequency;
  std::vector<ProjectedPoint> projection;
  std::vector<std::string> warnings;
};

/// One evaluation pass over the test set. `expected_test_digest` is the
/// digest recorded before tuning; a mismatch with the manifest or with the
/// supplied test words is treated as contamination and throws DataError.
FinalEvaluation final_evaluate(const MLPModel& model, std::span<const LabeledExample> test_set,
                               const SplitManifest& manifest,
                               const std::string& expected_test_digest, std::uint64_t n_perm,
                               std::uint64_t perm_seed, double log_frequency_cut = 8.0);

/// Same, with a constant-class predictor in place of the network.
std::vector<PredictionRecord> zero_rule_records(std::span<const LabeledExample> test_set,
                                                Gender majority);

/// Reproduction record of a run.
struct RunManifest {
  ExperimentConfig config;
  std::string corpus_sha256;
  std::string lexicon_sha256;
  std::string test_digest;
  std::vector<std::pair<std::string, std::string>> artifacts;  // name -> path relative to the run dir

  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
  std::string artifact(const std::string& name) const;
};

struct TuneOutputs {
  RunManifest manifest;
  GridResult grid;
  SplitManifest split;
  DecileReport deciles;
};

/// Ingests corpus and lexicon, fixes the split (and its test digest), runs
/// the grid and writes run_manifest.json, split.json, grid.json,
/// dataset.tsv, deciles.json, vocab.tsv, embedding.bin and model.bin into
/// out_dir.
TuneOutputs tune(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct EvalOutputs {
  FinalEvaluation evaluation;
  nlohmann::ordered_json report;
};

/// Reloads a tuned run, verifies input and split digests, evaluates on the
/// test set once and writes eval_report.json, predictions.csv, errors.csv,
/// projection.csv and entropy_frequency.csv into out_dir.
EvalOutputs evaluate_run(const std::filesystem::path& run_manifest_path,
                         const std::filesystem::path& out_dir);

/// tune() followed by evaluate_run() in the same directory.
EvalOutputs run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace gendervec
