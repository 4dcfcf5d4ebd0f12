#include "gendervec/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "gendervec/digest.hpp"
#include "gendervec/errors.hpp"

namespace gendervec {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::vector<ContextConfig> default_grid() {
  std::vector<ContextConfig> grid;
  for (auto t : {ContextType::asymmetric_backward, ContextType::asymmetric_forward,
                 ContextType::symmetric}) {
    for (int w = 1; w <= 5; ++w) grid.push_back({t, w, false, false});
  }
  return grid;
}

// ---------------------------------------------------------------------------
// configuration

namespace {

ordered_json context_json(const ContextConfig& c) {
  return {{"context_type", to_string(c.context_type)},
          {"window_size", c.window_size},
          {"distance_weighting", c.distance_weighting}};
}

ContextConfig context_from_json(const json& j, bool allow_large) {
  ContextConfig c;
  c.context_type = parse_context_type(j.at("context_type").get<std::string>());
  c.window_size = j.at("window_size").get<int>();
  c.distance_weighting = j.value("distance_weighting", false);
  c.allow_large_window = allow_large;
  return c;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (grid.empty()) throw ConfigError("the context grid is empty");
  for (const auto& c : grid) c.validate();
  embedding.validate();
  training.validate();
  ratios.validate();
  if (n_perm < 1) throw ConfigError("n_perm must be >= 1");
}

std::uint64_t ExperimentConfig::strict_min_freq() const {
  return inclusive_threshold && min_freq > 0 ? min_freq - 1 : min_freq;
}

std::uint64_t ExperimentConfig::strict_vocab_min_freq() const {
  const auto v = vocab_min_freq.value_or(min_freq);
  return inclusive_threshold && v > 0 ? v - 1 : v;
}

ordered_json ExperimentConfig::to_json() const {
  ordered_json j;
  j["corpus"] = corpus;
  j["lexicon"] = lexicon;
  j["grid"] = ordered_json::array();
  for (const auto& c : grid) j["grid"].push_back(context_json(c));
  j["allow_large_window"] =
      std::any_of(grid.begin(), grid.end(), [](const auto& c) { return c.allow_large_window; });
  j["K"] = embedding.dim;
  j["alpha"] = embedding.alpha;
  j["sigma_power"] = embedding.sigma_power;
  j["svd_seed"] = embedding.seed;
  j["svd_tolerance"] = embedding.svd_tolerance;
  j["learning_rate"] = training.learning_rate;
  j["momentum"] = training.momentum;
  j["batch_size"] = training.batch_size;
  j["max_epochs"] = training.max_epochs;
  j["patience"] = training.patience;
  j["seed"] = training.seed;
  j["hidden"] = training.hidden;
  j["activation"] = to_string(training.activation);
  j["standardize"] = training.standardize;
  j["min_freq"] = min_freq;
  j["vocab_min_freq"] = vocab_min_freq ? json(*vocab_min_freq) : json(nullptr);
  j["inclusive_threshold"] = inclusive_threshold;
  j["ratios"] = {ratios.train, ratios.dev, ratios.test};
  j["split_seed"] = split_seed;
  j["n_perm"] = n_perm;
  j["perm_seed"] = perm_seed;
  j["log_frequency_cut"] = log_frequency_cut;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  static const std::set<std::string> known = {
      "corpus", "lexicon", "grid", "context_types", "window_sizes", "context_type",
      "window_size", "distance_weighting", "allow_large_window", "K", "alpha", "sigma_power",
      "svd_seed", "svd_tolerance", "learning_rate", "momentum", "batch_size", "max_epochs",
      "patience", "seed", "hidden", "activation", "standardize", "min_freq", "vocab_min_freq",
      "inclusive_threshold", "ratios", "split_seed", "n_perm", "perm_seed",
      "log_frequency_cut"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key: " + key);
  }
  ExperimentConfig c;
  try {
    c.corpus = j.value("corpus", c.corpus);
    c.lexicon = j.value("lexicon", c.lexicon);
    const bool large = j.value("allow_large_window", false);
    const bool weighting = j.value("distance_weighting", false);
    if (j.contains("grid")) {
      c.grid.clear();
      for (const auto& cell : j.at("grid")) c.grid.push_back(context_from_json(cell, large));
    } else if (j.contains("context_types") || j.contains("window_sizes") ||
               j.contains("context_type") || j.contains("window_size")) {
      std::vector<std::string> types;
      std::vector<int> windows;
      if (j.contains("context_types")) {
        types = j.at("context_types").get<std::vector<std::string>>();
      } else if (j.contains("context_type")) {
        types = {j.at("context_type").get<std::string>()};
      } else {
        types = {"asymmetric_backward", "asymmetric_forward", "symmetric"};
      }
      if (j.contains("window_sizes")) {
        windows = j.at("window_sizes").get<std::vector<int>>();
      } else if (j.contains("window_size")) {
        windows = {j.at("window_size").get<int>()};
      } else {
        windows = {1, 2, 3, 4, 5};
      }
      c.grid.clear();
      for (const auto& t : types) {
        for (int w : windows) c.grid.push_back({parse_context_type(t), w, weighting, large});
      }
    }
    c.embedding.dim = j.value("K", c.embedding.dim);
    c.embedding.alpha = j.value("alpha", c.embedding.alpha);
    c.embedding.sigma_power = j.value("sigma_power", c.embedding.sigma_power);
    c.embedding.seed = j.value("svd_seed", c.embedding.seed);
    c.embedding.svd_tolerance = j.value("svd_tolerance", c.embedding.svd_tolerance);
    c.training.learning_rate = j.value("learning_rate", c.training.learning_rate);
    c.training.momentum = j.value("momentum", c.training.momentum);
    c.training.batch_size = j.value("batch_size", c.training.batch_size);
    c.training.max_epochs = j.value("max_epochs", c.training.max_epochs);
    c.training.patience = j.value("patience", c.training.patience);
    c.training.seed = j.value("seed", c.training.seed);
    c.training.hidden = j.value("hidden", c.training.hidden);
    if (j.contains("activation")) c.training.activation = parse_activation(j["activation"].get<std::string>());
    c.training.standardize = j.value("standardize", c.training.standardize);
    c.min_freq = j.value("min_freq", c.min_freq);
    if (j.contains("vocab_min_freq") && !j["vocab_min_freq"].is_null()) {
      c.vocab_min_freq = j["vocab_min_freq"].get<std::uint64_t>();
    }
    c.inclusive_threshold = j.value("inclusive_threshold", c.inclusive_threshold);
    if (j.contains("ratios")) {
      const auto r = j["ratios"].get<std::vector<double>>();
      if (r.size() != 3) throw ConfigError("ratios must have 3 entries");
      c.ratios = {r[0], r[1], r[2]};
    }
    c.split_seed = j.value("split_seed", c.split_seed);
    c.n_perm = j.value("n_perm", c.n_perm);
    c.perm_seed = j.value("perm_seed", c.perm_seed);
    c.log_frequency_cut = j.value("log_frequency_cut", c.log_frequency_cut);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// experiment stages

PreparedData prepare_data(std::vector<Sentence> sentences, const GenderLexicon& lexicon,
                          const ExperimentConfig& cfg) {
  PreparedData d;
  d.sentences = std::move(sentences);
  d.vocab = filter_by_frequency(build_vocabulary(d.sentences), cfg.strict_vocab_min_freq());
  d.encoded = encode(d.sentences, d.vocab);
  d.lexicon = restrict_to_core_genders(lexicon);
  d.candidates = candidate_words(d.lexicon, d.vocab, cfg.strict_min_freq());
  if (d.candidates.empty()) {
    throw DataError("no lexicon noun passes the frequency filter in this corpus");
  }
  return d;
}

const GridCell& GridResult::best_cell() const {
  if (!best) throw DataError("grid search produced no successful cell");
  return cells.at(*best);
}

ordered_json to_json(const GridResult& g) {
  ordered_json j;
  j["cells"] = ordered_json::array();
  for (const auto& c : g.cells) {
    ordered_json cell = context_json(c.config);
    cell["ok"] = c.ok;
    if (c.ok) {
      cell["dev_accuracy"] = c.dev_accuracy;
      cell["dev_accuracy_uter"] = c.dev_class_accuracy[0];
      cell["dev_accuracy_neuter"] = c.dev_class_accuracy[1];
      cell["dev_weighted_accuracy"] = c.dev_weighted_accuracy;
      cell["best_epoch"] = c.best_epoch;
      cell["examples"] = c.examples;
    } else {
      cell["error"] = c.error;
    }
    j["cells"].push_back(cell);
  }
  j["best"] = g.best ? ordered_json(context_json(g.cells[*g.best].config)) : ordered_json(nullptr);
  return j;
}

CellRun run_cell(const PreparedData& data, const ContextConfig& ctx, const ExperimentConfig& cfg,
                 const SplitManifest& split) {
  CellRun run;
  const auto cooc = count_cooccurrences(data.encoded, data.vocab.size(), ctx);
  run.embedding = embed_matrix(cooc, data.vocab, cfg.embedding);
  const auto dataset = build_dataset(run.embedding, data.lexicon, data.vocab, cfg.strict_min_freq());
  run.split = apply_split(dataset, split);
  run.training = train(run.split.train, run.split.dev, cfg.training);
  return run;
}

bool grid_tie_break(const ContextConfig& a, const ContextConfig& b) {
  auto rank = [](ContextType t) {
    switch (t) {
      case ContextType::asymmetric_backward: return 0;
      case ContextType::symmetric: return 1;
      case ContextType::asymmetric_forward: return 2;
    }
    return 3;
  };
  if (a.window_size != b.window_size) return a.window_size < b.window_size;
  return rank(a.context_type) < rank(b.context_type);
}

GridResult grid_search(const PreparedData& data, const ExperimentConfig& cfg,
                       const SplitManifest& split, CellRun* best_run) {
  GridResult res;
  const double share_u = uter_share(data.candidates);
  for (const auto& ctx : cfg.grid) {
    GridCell cell;
    cell.config = ctx;
    try {
      CellRun run = run_cell(data, ctx, cfg, split);
      const auto records = predict_records(run.training.model, run.split.dev);
      const auto cm = ConfusionMatrix::from_records(records);
      cell.dev_accuracy = accuracy(cm);
      cell.dev_class_accuracy = {class_accuracy(cm, Gender::uter), class_accuracy(cm, Gender::neuter)};
      cell.dev_weighted_accuracy =
          weighted_accuracy({{Gender::uter, cell.dev_class_accuracy[0]},
                             {Gender::neuter, cell.dev_class_accuracy[1]}},
                            {{Gender::uter, share_u}, {Gender::neuter, 1.0 - share_u}});
      cell.best_epoch = run.training.best_epoch;
      cell.examples = run.split.train.size() + run.split.dev.size() + run.split.test.size();
      cell.ok = true;

      const bool wins = !res.best || cell.dev_accuracy > res.cells[*res.best].dev_accuracy ||
                        (cell.dev_accuracy == res.cells[*res.best].dev_accuracy &&
                         grid_tie_break(ctx, res.cells[*res.best].config));
      if (wins) {
        res.best = res.cells.size();
        if (best_run) *best_run = std::move(run);
      }
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
    }
    res.cells.push_back(std::move(cell));
  }
  return res;
}

FinalEvaluation final_evaluate(const MLPModel& model, std::span<const LabeledExample> test_set,
                               const SplitManifest& manifest,
                               const std::string& expected_test_digest, std::uint64_t n_perm,
                               std::uint64_t perm_seed, double log_frequency_cut) {
  if (test_set.empty()) throw DataError("the test set is empty");
  if (manifest.test_digest() != expected_test_digest) {
    throw DataError("test contamination: split manifest digest differs from the one fixed before tuning");
  }
  if (test_set.size() != manifest.test.size()) {
    throw DataError("test contamination: test set does not match the split manifest");
  }
  for (std::size_t i = 0; i < test_set.size(); ++i) {
    if (test_set[i].word != manifest.test[i]) {
      throw DataError("test contamination: unexpected test word '" + test_set[i].word + "'");
    }
  }

  FinalEvaluation ev;
  ev.records = predict_records(model, test_set);
  ev.report = make_eval_report(ev.records);
  ev.entropy_frequency =
      entropy_frequency_analysis(ev.records, n_perm, perm_seed, log_frequency_cut);

  Eigen::MatrixXd vectors(static_cast<Eigen::Index>(test_set.size()),
                          static_cast<Eigen::Index>(test_set.front().vector.size()));
  for (std::size_t i = 0; i < test_set.size(); ++i) {
    for (std::size_t c = 0; c < test_set[i].vector.size(); ++c) {
      vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = test_set[i].vector[c];
    }
  }
  try {
    const auto proj = project_2d(vectors);
    for (std::size_t i = 0; i < ev.records.size(); ++i) {
      ev.projection.push_back({ev.records[i].word, ev.records[i].gold, ev.records[i].predicted,
                               proj.coords[i][0], proj.coords[i][1]});
    }
  } catch (const DataError& e) {
    ev.warnings.push_back(std::string("projection skipped: ") + e.what());
  }
  return ev;
}

std::vector<PredictionRecord> zero_rule_records(std::span<const LabeledExample> test_set,
                                                Gender majority) {
  std::vector<PredictionRecord> out;
  for (const auto& e : test_set) {
    const Distribution d = majority == Gender::uter ? Distribution{1.0, 0.0} : Distribution{0.0, 1.0};
    out.push_back({e.word, e.gender, majority, d[0], d[1], 0.0, e.frequency});
  }
  return out;
}

// ---------------------------------------------------------------------------
// manifests and files

ordered_json RunManifest::to_json() const {
  ordered_json j;
  j["config"] = config.to_json();
  j["inputs"]["corpus_sha256"] = corpus_sha256;
  j["inputs"]["lexicon_sha256"] = lexicon_sha256;
  j["test_digest"] = test_digest;
  ordered_json a = ordered_json::object();
  for (const auto& [k, v] : artifacts) a[k] = v;
  j["artifacts"] = a;
  return j;
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  try {
    m.config = ExperimentConfig::from_json(j.at("config"));
    m.corpus_sha256 = j.at("inputs").at("corpus_sha256").get<std::string>();
    m.lexicon_sha256 = j.at("inputs").at("lexicon_sha256").get<std::string>();
    m.test_digest = j.at("test_digest").get<std::string>();
    for (const auto& [k, v] : j.at("artifacts").items()) m.artifacts.emplace_back(k, v.get<std::string>());
  } catch (const json::exception& e) {
    throw DataError(std::string("bad run manifest: ") + e.what());
  }
  return m;
}

std::string RunManifest::artifact(const std::string& name) const {
  for (const auto& [k, v] : artifacts) {
    if (k == name) return v;
  }
  throw DataError("run manifest has no artifact '" + name + "'");
}

void write_json_file(const fs::path& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

namespace {

template <class Fn>
void write_text(const fs::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  fn(out);
}

ordered_json deciles_json(const DecileReport& d) {
  ordered_json j;
  j["uter_share"] = d.uter_share;
  j["neuter_share"] = d.neuter_share;
  j["group_size"] = d.group_size;
  j["mean_uter_share"] = d.mean_uter_share;
  j["sd_uter_share"] = d.sd_uter_share;
  return j;
}

}  // namespace

TuneOutputs tune(const ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  TuneOutputs out;
  auto sentences = read_corpus(cfg.corpus);
  const auto lexicon = read_lexicon(cfg.lexicon);
  const auto data = prepare_data(std::move(sentences), lexicon, cfg);

  // The test partition is fixed, and its digest recorded, before any
  // configuration is scored.
  out.split = split_words(data.candidates, cfg.ratios, cfg.split_seed);
  out.manifest.config = cfg;
  out.manifest.corpus_sha256 = sha256_file(cfg.corpus);
  out.manifest.lexicon_sha256 = sha256_file(cfg.lexicon);
  out.manifest.test_digest = out.split.test_digest();
  write_json_file(out_dir / "split.json", out.split.to_json());
  write_text(out_dir / "vocab.tsv", [&](std::ostream& o) { write_vocabulary(o, data.vocab); });
  write_text(out_dir / "dataset.tsv",
             [&](std::ostream& o) { write_labeled_words(o, data.candidates); });
  if (data.candidates.size() >= 10) {
    out.deciles = class_ratio_by_decile(data.candidates);
    write_json_file(out_dir / "deciles.json", deciles_json(out.deciles));
  }

  CellRun best;
  out.grid = grid_search(data, cfg, out.split, &best);
  write_json_file(out_dir / "grid.json", to_json(out.grid));
  if (!out.grid.best) {
    std::string why = out.grid.cells.empty() ? "empty grid" : out.grid.cells.front().error;
    throw DataError("every grid cell failed; first error: " + why);
  }
  write_embedding(out_dir / "embedding.bin", best.embedding, true);
  save_model(out_dir / "model.bin", best.training.model);

  out.manifest.artifacts = {{"split", "split.json"},     {"vocab", "vocab.tsv"},
                            {"dataset", "dataset.tsv"},  {"grid", "grid.json"},
                            {"embedding", "embedding.bin"}, {"model", "model.bin"}};
  if (data.candidates.size() >= 10) out.manifest.artifacts.emplace_back("deciles", "deciles.json");
  write_json_file(out_dir / "run_manifest.json", out.manifest.to_json());
  return out;
}

EvalOutputs evaluate_run(const fs::path& run_manifest_path, const fs::path& out_dir) {
  const fs::path run_dir = run_manifest_path.parent_path();
  const auto rm = RunManifest::from_json(read_json_file(run_manifest_path));
  const auto& cfg = rm.config;
  if (sha256_file(cfg.lexicon) != rm.lexicon_sha256) {
    throw DataError("lexicon " + cfg.lexicon + " changed since tuning");
  }
  if (fs::exists(cfg.corpus) && sha256_file(cfg.corpus) != rm.corpus_sha256) {
    throw DataError("corpus " + cfg.corpus + " changed since tuning");
  }
  fs::create_directories(out_dir);

  Vocabulary vocab;
  {
    std::ifstream in(run_dir / rm.artifact("vocab"));
    if (!in) throw DataError("cannot open vocabulary artifact");
    vocab = read_vocabulary(in);
  }
  const auto embedding = read_embedding(run_dir / rm.artifact("embedding"));
  const auto model = load_model(run_dir / rm.artifact("model"));
  const auto split = SplitManifest::from_json(read_json_file(run_dir / rm.artifact("split")));
  const auto grid = read_json_file(run_dir / rm.artifact("grid"));
  const auto lexicon = restrict_to_core_genders(read_lexicon(cfg.lexicon));

  const auto dataset = build_dataset(embedding, lexicon, vocab, cfg.strict_min_freq());
  const auto bundle = apply_split(dataset, split);

  EvalOutputs out;
  out.evaluation = final_evaluate(model, bundle.test, split, rm.test_digest, cfg.n_perm,
                                  cfg.perm_seed, cfg.log_frequency_cut);
  const auto& ev = out.evaluation;
  const auto& cm = ev.report.confusion;
  const double test_u = uter_share(std::span<const LabeledExample>(bundle.test));
  const std::map<Gender, double> class_acc = {{Gender::uter, class_accuracy(cm, Gender::uter)},
                                              {Gender::neuter, class_accuracy(cm, Gender::neuter)}};

  ordered_json& r = out.report;
  r["best_config"] = grid.at("best");
  double dev_acc = 0.0;
  for (const auto& cell : grid.at("cells")) {
    if (cell.value("ok", false) && cell.at("context_type") == grid["best"]["context_type"] &&
        cell.at("window_size") == grid["best"]["window_size"]) {
      dev_acc = cell.at("dev_accuracy").get<double>();
    }
  }
  r["dev_accuracy"] = dev_acc;
  r["test_accuracy"] = ev.report.accuracy;
  r["test"] = to_json(ev.report);
  r["weighted_accuracy"]["test_shares"] =
      weighted_accuracy(class_acc, {{Gender::uter, test_u}, {Gender::neuter, 1.0 - test_u}});
  r["weighted_accuracy"]["priors_0.71_0.29"] =
      weighted_accuracy(class_acc, {{Gender::uter, 0.71}, {Gender::neuter, 0.29}});
  r["entropy_frequency"] = to_json(ev.entropy_frequency);
  r["dataset"]["examples"] = dataset.size();
  r["dataset"]["uter_share"] = uter_share(std::span<const LabeledExample>(dataset));
  r["dataset"]["split_sizes"] = {bundle.train.size(), bundle.dev.size(), bundle.test.size()};
  r["dataset"]["test_uter_share"] = test_u;
  r["seeds"] = {{"split_seed", cfg.split_seed},
                {"train_seed", cfg.training.seed},
                {"svd_seed", cfg.embedding.seed},
                {"perm_seed", cfg.perm_seed}};
  r["test_digest"] = rm.test_digest;
  r["errors"] = cm.total() - cm.correct();
  r["warnings"] = ev.warnings;

  write_json_file(out_dir / "eval_report.json", r);
  write_text(out_dir / "predictions.csv",
             [&](std::ostream& o) { write_predictions_csv(o, ev.records); });
  write_text(out_dir / "errors.csv", [&](std::ostream& o) {
    o << "word,gold,predicted,entropy,frequency\n";
    o.precision(17);
    for (const auto& rec : ev.records) {
      if (rec.correct()) continue;
      o << csv_field(rec.word) << ',' << gender_name(rec.gold) << ',' << gender_name(rec.predicted)
        << ',' << rec.entropy << ',' << rec.frequency << '\n';
    }
  });
  write_text(out_dir / "projection.csv", [&](std::ostream& o) {
    o << "word,gold,predicted,x,y\n";
    o.precision(17);
    for (const auto& p : ev.projection) {
      o << csv_field(p.word) << ',' << gender_name(p.gold) << ',' << gender_name(p.predicted) << ','
        << p.x << ',' << p.y << '\n';
    }
  });
  write_text(out_dir / "entropy_frequency.csv", [&](std::ostream& o) {
    o << "word,entropy,log_frequency,correct\n";
    o.precision(17);
    for (const auto& p : ev.entropy_frequency.points) {
      o << csv_field(p.word) << ',' << p.entropy << ',' << p.log_frequency << ','
        << (p.correct ? 1 : 0) << '\n';
    }
  });
  return out;
}

EvalOutputs run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
  tune(cfg, out_dir);
  return evaluate_run(out_dir / "run_manifest.json", out_dir);
}

}  // namespace gendervec
