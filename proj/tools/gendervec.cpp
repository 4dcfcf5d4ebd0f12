// Command-line front end. Every subcommand accepts --config <json>; flags
// given on the command line override the file.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "gendervec/digest.hpp"
#include "gendervec/errors.hpp"
#include "gendervec/parallel.hpp"
#include "gendervec/pipeline.hpp"
#include "gendervec/report.hpp"
#include "gendervec/synthetic.hpp"

using namespace gendervec;
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

int exit_code(ExitCode c) { return static_cast<int>(c); }

// Options shared by the subcommands that read an experiment config.
struct ConfigFlags {
  std::string config_path;
  std::string corpus, lexicon, context_type, activation;
  int window = 1, K = 50, batch_size = 64, max_epochs = 200, patience = 10, hidden = 64;
  bool distance_weighting = false, allow_large_window = false, inclusive = false;
  double alpha = 0.5, sigma_power = 0.0, learning_rate = 0.05, momentum = 0.9;
  std::uint64_t svd_seed = 42, seed = 7, min_freq = 100, vocab_min_freq = 100, split_seed = 1,
                n_perm = 10000, perm_seed = 2024;
  std::vector<double> ratios;
  CLI::App* app = nullptr;

  void attach(CLI::App* sub, bool with_grid) {
    app = sub;
    sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--corpus", corpus, "corpus text file");
    sub->add_option("--lexicon", lexicon, "gender lexicon TSV");
    if (with_grid) {
      sub->add_option("--context-type", context_type, "backward | forward | symmetric");
      sub->add_option("--window", window, "window size");
      sub->add_flag("--distance-weighting", distance_weighting, "weight counts by 1/distance");
      sub->add_flag("--allow-large-window", allow_large_window, "permit windows above 5");
    }
    sub->add_option("--K,--dim", K, "embedding dimension");
    sub->add_option("--alpha", alpha, "power-transform exponent");
    sub->add_option("--sigma-power", sigma_power, "singular value exponent");
    sub->add_option("--svd-seed", svd_seed, "Lanczos start seed");
    sub->add_option("--learning-rate", learning_rate);
    sub->add_option("--momentum", momentum);
    sub->add_option("--batch-size", batch_size);
    sub->add_option("--max-epochs", max_epochs);
    sub->add_option("--patience", patience);
    sub->add_option("--seed", seed, "training seed");
    sub->add_option("--hidden", hidden, "hidden units");
    sub->add_option("--activation", activation, "relu | tanh");
    sub->add_option("--min-freq", min_freq, "noun frequency threshold");
    sub->add_option("--vocab-min-freq", vocab_min_freq, "matrix vocabulary frequency threshold");
    sub->add_flag("--inclusive-threshold", inclusive, "use >= instead of >");
    sub->add_option("--split-seed", split_seed);
    sub->add_option("--ratios", ratios, "train dev test")->expected(3);
    sub->add_option("--n-perm", n_perm, "permutations for the entropy test");
    sub->add_option("--perm-seed", perm_seed);
  }

  bool given(const std::string& name) const {
    const auto* opt = app->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
    if (given("--corpus")) c.corpus = corpus;
    if (given("--lexicon")) c.lexicon = lexicon;
    const bool ctx = given("--context-type") || given("--window");
    if (ctx) {
      ContextConfig cell = c.grid.size() == 1 ? c.grid.front() : ContextConfig{};
      if (given("--context-type")) cell.context_type = parse_context_type(context_type);
      if (given("--window")) cell.window_size = window;
      c.grid = {cell};
    }
    for (auto& cell : c.grid) {
      if (given("--distance-weighting")) cell.distance_weighting = distance_weighting;
      if (given("--allow-large-window")) cell.allow_large_window = allow_large_window;
    }
    if (given("--K")) c.embedding.dim = K;
    if (given("--alpha")) c.embedding.alpha = alpha;
    if (given("--sigma-power")) c.embedding.sigma_power = sigma_power;
    if (given("--svd-seed")) c.embedding.seed = svd_seed;
    if (given("--learning-rate")) c.training.learning_rate = learning_rate;
    if (given("--momentum")) c.training.momentum = momentum;
    if (given("--batch-size")) c.training.batch_size = batch_size;
    if (given("--max-epochs")) c.training.max_epochs = max_epochs;
    if (given("--patience")) c.training.patience = patience;
    if (given("--seed")) c.training.seed = seed;
    if (given("--hidden")) c.training.hidden = hidden;
    if (given("--activation")) c.training.activation = parse_activation(activation);
    if (given("--min-freq")) c.min_freq = min_freq;
    if (given("--vocab-min-freq")) c.vocab_min_freq = vocab_min_freq;
    if (given("--inclusive-threshold")) c.inclusive_threshold = inclusive;
    if (given("--split-seed")) c.split_seed = split_seed;
    if (given("--ratios")) c.ratios = {ratios[0], ratios[1], ratios[2]};
    if (given("--n-perm")) c.n_perm = n_perm;
    if (given("--perm-seed")) c.perm_seed = perm_seed;
    c.validate();
    return c;
  }
};

void require(const std::string& value, const std::string& what) {
  if (value.empty()) throw ConfigError(what + " is required (flag or config)");
}

Vocabulary load_vocab(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_vocabulary(in);
}

template <class Fn>
void write_to(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  fn(out);
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

ordered_json decile_json(const DecileReport& d) {
  return {{"uter_share", d.uter_share},
          {"neuter_share", d.neuter_share},
          {"group_size", d.group_size},
          {"mean_uter_share", d.mean_uter_share},
          {"sd_uter_share", d.sd_uter_share}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grammatical gender classification from count-based word embeddings"};
  app.require_subcommand(1);

  // ingest
  ConfigFlags ingest_f;
  std::string ingest_vocab_out, ingest_text_out;
  auto* ingest = app.add_subcommand("ingest", "normalize a corpus and count its vocabulary");
  ingest_f.attach(ingest, false);
  ingest->add_option("--vocab-out", ingest_vocab_out, "vocabulary TSV (default stdout)");
  ingest->add_option("--normalized-out", ingest_text_out, "write the normalized corpus here");

  // cooc
  ConfigFlags cooc_f;
  std::string cooc_vocab, cooc_out;
  auto* cooc = app.add_subcommand("cooc", "count context-target co-occurrences");
  cooc_f.attach(cooc, true);
  cooc->add_option("--vocab", cooc_vocab, "vocabulary TSV (default: built from the corpus)");
  cooc->add_option("--out", cooc_out, "co-occurrence file (default stdout)");

  // embed
  ConfigFlags embed_f;
  std::string embed_cooc, embed_vocab, embed_out;
  bool embed_text = false;
  auto* embed_cmd = app.add_subcommand("embed", "power transform and truncated SVD");
  embed_f.attach(embed_cmd, false);
  embed_cmd->add_option("--cooc", embed_cooc, "co-occurrence file")->required();
  embed_cmd->add_option("--vocab", embed_vocab, "vocabulary TSV")->required();
  embed_cmd->add_option("--out", embed_out, "embedding file")->required();
  embed_cmd->add_flag("--text", embed_text, "write the text format instead of binary");

  // label
  ConfigFlags label_f;
  std::string label_vocab, label_out;
  auto* label = app.add_subcommand("label", "select lexicon nouns that pass the frequency filter");
  label_f.attach(label, false);
  label->add_option("--vocab", label_vocab, "vocabulary TSV")->required();
  label->add_option("--out", label_out, "labeled word TSV")->required();

  // split
  ConfigFlags split_f;
  std::string split_dataset, split_out;
  auto* split_cmd = app.add_subcommand("split", "stratified train/dev/test split of labeled words");
  split_f.attach(split_cmd, false);
  split_cmd->add_option("--dataset", split_dataset, "labeled word TSV")->required();
  split_cmd->add_option("--out", split_out, "split manifest JSON")->required();

  // train
  ConfigFlags train_f;
  std::string train_emb, train_vocab, train_split, train_out;
  auto* train_cmd = app.add_subcommand("train", "train the classifier on one embedding");
  train_f.attach(train_cmd, false);
  train_cmd->add_option("--embedding", train_emb, "embedding file")->required();
  train_cmd->add_option("--vocab", train_vocab, "vocabulary TSV")->required();
  train_cmd->add_option("--split", train_split, "split manifest JSON")->required();
  train_cmd->add_option("--out", train_out, "model file")->required();

  // tune
  ConfigFlags tune_f;
  std::string tune_out;
  bool tune_eval = false;
  auto* tune_cmd = app.add_subcommand("tune", "grid search over context configurations");
  tune_f.attach(tune_cmd, true);
  tune_cmd->add_option("--out", tune_out, "run directory")->required();
  tune_cmd->add_flag("--eval", tune_eval, "evaluate on the test set afterwards");

  // eval
  std::string eval_run, eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "single evaluation pass of a tuned run on its test set");
  eval_cmd->add_option("--run", eval_run, "run_manifest.json written by tune")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_out, "output directory (default: the run directory)");

  // report
  std::string report_dir;
  auto* report_cmd = app.add_subcommand("report", "render SVG plots from run artifacts");
  report_cmd->add_option("--dir", report_dir, "run directory")->required()->check(CLI::ExistingDirectory);

  // synth
  SyntheticSpec spec;
  std::string synth_out;
  double synth_prior = 0.7;
  bool synth_config = true;
  auto* synth = app.add_subcommand("synth", "generate an artificial agreement language");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--nouns", spec.nouns);
  synth->add_option("--sentences", spec.sentences);
  synth->add_option("--fillers", spec.fillers);
  synth->add_option("--prior", synth_prior, "share of the first (uter) class");
  synth->add_option("--agreement-noise", spec.agreement_noise);
  synth->add_option("--ambiguous-share", spec.ambiguous_share);
  synth->add_option("--zipf", spec.zipf_exponent);
  synth->add_option("--seed", spec.seed);
  synth->add_flag("!--no-config", synth_config, "do not write config.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code(ExitCode::config_error);
  }

  try {
    apply_thread_limit_from_env();

    if (*ingest) {
      const auto cfg = ingest_f.resolve();
      require(cfg.corpus, "corpus");
      const auto sentences = read_corpus(cfg.corpus);
      const auto full = build_vocabulary(sentences);
      const auto vocab = filter_by_frequency(full, cfg.strict_vocab_min_freq());
      write_to(ingest_vocab_out, [&](std::ostream& o) { write_vocabulary(o, vocab); });
      if (!ingest_text_out.empty()) {
        write_to(ingest_text_out, [&](std::ostream& o) {
          for (const auto& s : sentences) o << join(s) << '\n';
        });
      }
      std::cerr << ordered_json{{"sentences", sentences.size()},
                                {"tokens", full.total_count()},
                                {"types", full.size()},
                                {"kept_types", vocab.size()},
                                {"corpus_sha256", sha256_file(cfg.corpus)}}
                       .dump()
                << '\n';
    } else if (*cooc) {
      const auto cfg = cooc_f.resolve();
      require(cfg.corpus, "corpus");
      if (cfg.grid.size() != 1) throw ConfigError("cooc needs exactly one context configuration");
      const auto sentences = read_corpus(cfg.corpus);
      const auto vocab = cooc_vocab.empty()
                             ? filter_by_frequency(build_vocabulary(sentences), cfg.strict_vocab_min_freq())
                             : load_vocab(cooc_vocab);
      const auto m = count_cooccurrences(sentences, vocab, cfg.grid.front());
      write_to(cooc_out, [&](std::ostream& o) { write_cooc(o, m); });
    } else if (*embed_cmd) {
      const auto cfg = embed_f.resolve();
      std::ifstream in(embed_cooc);
      if (!in) throw DataError("cannot open " + embed_cooc);
      const auto m = read_cooc(in);
      const auto e = embed_matrix(m, load_vocab(embed_vocab), cfg.embedding);
      write_embedding(embed_out, e, !embed_text);
    } else if (*label) {
      const auto cfg = label_f.resolve();
      require(cfg.lexicon, "lexicon");
      const auto lex = read_lexicon(cfg.lexicon);
      print_warnings(lex.warnings);
      const auto words =
          candidate_words(restrict_to_core_genders(lex), load_vocab(label_vocab), cfg.strict_min_freq());
      if (words.empty()) throw DataError("no lexicon noun passes the frequency filter");
      write_to(label_out, [&](std::ostream& o) { write_labeled_words(o, words); });
      ordered_json summary = ordered_json::parse(code_count_summary_json(lex));
      summary["kept"] = words.size();
      summary["uter_share"] = uter_share(std::span<const LabeledWord>(words));
      if (words.size() >= 10) summary["deciles"] = decile_json(class_ratio_by_decile(words));
      std::cout << summary.dump(2) << '\n';
    } else if (*split_cmd) {
      const auto cfg = split_f.resolve();
      std::ifstream in(split_dataset);
      if (!in) throw DataError("cannot open " + split_dataset);
      const auto words = read_labeled_words(in);
      const auto m = split_words(words, cfg.ratios, cfg.split_seed);
      write_json_file(split_out, m.to_json());
      std::cout << ordered_json{{"train", m.train.size()},
                                {"dev", m.dev.size()},
                                {"test", m.test.size()},
                                {"test_digest", m.test_digest()}}
                       .dump()
                << '\n';
    } else if (*train_cmd) {
      const auto cfg = train_f.resolve();
      require(cfg.lexicon, "lexicon");
      const auto emb = read_embedding(train_emb);
      const auto lex = restrict_to_core_genders(read_lexicon(cfg.lexicon));
      const auto data = build_dataset(emb, lex, load_vocab(train_vocab), cfg.strict_min_freq());
      const auto manifest = SplitManifest::from_json(read_json_file(train_split));
      const auto bundle = apply_split(data, manifest);
      const auto result = train(bundle.train, bundle.dev, cfg.training);
      save_model(train_out, result.model);
      std::cout << ordered_json{{"best_epoch", result.best_epoch},
                                {"epochs_run", result.epochs_run},
                                {"dev_accuracy", result.best_dev_accuracy}}
                       .dump()
                << '\n';
    } else if (*tune_cmd) {
      const auto cfg = tune_f.resolve();
      require(cfg.corpus, "corpus");
      require(cfg.lexicon, "lexicon");
      const auto out = tune(cfg, tune_out);
      const auto& best = out.grid.best_cell();
      std::cout << ordered_json{{"best_context_type", to_string(best.config.context_type)},
                                {"best_window_size", best.config.window_size},
                                {"dev_accuracy", best.dev_accuracy},
                                {"run_manifest", (fs::path(tune_out) / "run_manifest.json").string()}}
                       .dump()
                << '\n';
      for (const auto& c : out.grid.cells) {
        if (!c.ok) std::cerr << "warning: cell " << to_string(c.config.context_type) << " w=" << c.config.window_size << " failed: " << c.error << '\n';
      }
      if (tune_eval) {
        const auto ev = evaluate_run(fs::path(tune_out) / "run_manifest.json", tune_out);
        print_warnings(ev.evaluation.warnings);
        std::cout << ordered_json{{"test_accuracy", ev.evaluation.report.accuracy}}.dump() << '\n';
      }
    } else if (*eval_cmd) {
      const fs::path out = eval_out.empty() ? fs::path(eval_run).parent_path() : fs::path(eval_out);
      const auto ev = evaluate_run(eval_run, out);
      print_warnings(ev.evaluation.warnings);
      print_warnings(ev.evaluation.entropy_frequency.warnings);
      std::cout << ordered_json{{"dev_accuracy", ev.report["dev_accuracy"]},
                                {"test_accuracy", ev.evaluation.report.accuracy},
                                {"baseline_accuracy", ev.evaluation.report.baseline_accuracy}}
                       .dump()
                << '\n';
    } else if (*report_cmd) {
      for (const auto& f : render_report(report_dir)) std::cout << f << '\n';
    } else if (*synth) {
      spec.classes[0].prior = synth_prior;
      spec.classes[1].prior = 1.0 - synth_prior;
      spec.validate();
      const auto lang = generate_synthetic_language(spec);
      fs::create_directories(synth_out);
      const fs::path dir(synth_out);
      write_to((dir / "corpus.txt").string(), [&](std::ostream& o) { write_lines(o, lang.lines); });
      write_to((dir / "lexicon.tsv").string(), [&](std::ostream& o) { write_lexicon(o, lang.lexicon); });
      if (synth_config) {
        ExperimentConfig c;
        c.corpus = fs::absolute(dir / "corpus.txt").string();
        c.lexicon = fs::absolute(dir / "lexicon.tsv").string();
        c.min_freq = 5;
        c.vocab_min_freq = 0;
        write_json_file(dir / "config.json", c.to_json());
      }
      std::cout << ordered_json{{"nouns", lang.nouns.size()},
                                {"uter", lang.lexicon.count(GenderCode::uter)},
                                {"neuter", lang.lexicon.count(GenderCode::neuter)},
                                {"sentences", lang.lines.size()},
                                {"measured_agreement_noise", measured_agreement_noise(lang.lines, spec, lang)}}
                       .dump()
                << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return exit_code(ExitCode::config_error);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return exit_code(ExitCode::numerical_failure);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return exit_code(ExitCode::data_error);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return exit_code(ExitCode::data_error);
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return exit_code(ExitCode::data_error);
  }
  return exit_code(ExitCode::success);
}
