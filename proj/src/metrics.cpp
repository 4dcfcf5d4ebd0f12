#include "gendervec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gendervec/errors.hpp"

namespace gendervec {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts) t += row[0] + row[1];
  return t;
}

std::uint64_t ConfusionMatrix::correct() const { return counts[0][0] + counts[1][1]; }

std::uint64_t ConfusionMatrix::gold_total(Gender g) const {
  const auto& row = counts[class_index(g)];
  return row[0] + row[1];
}

std::uint64_t ConfusionMatrix::predicted_total(Gender g) const {
  return counts[0][class_index(g)] + counts[1][class_index(g)];
}

ConfusionMatrix ConfusionMatrix::from_records(std::span<const PredictionRecord> records) {
  ConfusionMatrix cm;
  for (const auto& r : records) cm.add(r.gold, r.predicted);
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw DataError("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.correct()) / static_cast<double>(cm.total());
}

PrecisionRecallF precision_recall_f(const ConfusionMatrix& cm, Gender cls) {
  PrecisionRecallF r;
  const auto tp = static_cast<double>(cm.at(cls, cls));
  const auto predicted = static_cast<double>(cm.predicted_total(cls));
  const auto gold = static_cast<double>(cm.gold_total(cls));
  if (predicted > 0) {
    r.precision = tp / predicted;
  } else {
    r.degenerate = true;
  }
  if (gold > 0) {
    r.recall = tp / gold;
  } else {
    r.degenerate = true;
  }
  if (r.precision + r.recall > 0) {
    r.f_score = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

PrecisionRecallF overall_precision_recall_f(const ConfusionMatrix& cm) {
  PrecisionRecallF out;
  const auto total = static_cast<double>(cm.total());
  if (total == 0) {
    out.degenerate = true;
    return out;
  }
  for (auto g : {Gender::uter, Gender::neuter}) {
    const double w = static_cast<double>(cm.gold_total(g)) / total;
    const auto prf = precision_recall_f(cm, g);
    out.precision += w * prf.precision;
    out.recall += w * prf.recall;
    out.f_score += w * prf.f_score;
    out.degenerate = out.degenerate || prf.degenerate;
  }
  return out;
}

double class_accuracy(const ConfusionMatrix& cm, Gender cls) {
  return precision_recall_f(cm, cls).recall;
}

double weighted_accuracy(const std::map<Gender, double>& per_class,
                         const std::map<Gender, double>& priors) {
  double sum = 0.0;
  for (const auto& [g, p] : priors) {
    if (p < 0.0) throw ConfigError("priors must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("priors must sum to 1");
  double acc = 0.0;
  for (const auto& [g, a] : per_class) {
    auto it = priors.find(g);
    if (it == priors.end()) throw ConfigError("missing prior for " + std::string(gender_name(g)));
    acc += a * it->second;
  }
  return acc;
}

double zero_rule_baseline(std::span<const Gender> labels) {
  if (labels.empty()) throw DataError("zero-rule baseline of an empty set");
  const auto u = std::count(labels.begin(), labels.end(), Gender::uter);
  const auto n = static_cast<std::ptrdiff_t>(labels.size()) - u;
  return static_cast<double>(std::max(u, n)) / static_cast<double>(labels.size());
}

double zero_rule_baseline(std::span<const LabeledWord> words) {
  std::vector<Gender> labels;
  labels.reserve(words.size());
  for (const auto& w : words) labels.push_back(w.gender);
  return zero_rule_baseline(labels);
}

EntropySummary summarize(std::vector<double> values) {
  EntropySummary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  s.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  return s;
}

EvalReport make_eval_report(std::span<const PredictionRecord> records) {
  if (records.empty()) throw DataError("cannot evaluate an empty prediction set");
  EvalReport r;
  r.confusion = ConfusionMatrix::from_records(records);
  r.accuracy = accuracy(r.confusion);
  for (auto g : {Gender::uter, Gender::neuter}) {
    r.per_class[class_index(g)] = precision_recall_f(r.confusion, g);
    if (r.per_class[class_index(g)].degenerate) {
      r.warnings.push_back(std::string("precision/recall for ") + std::string(gender_name(g)) +
                           " has an empty denominator; reported as 0");
    }
  }
  r.overall = overall_precision_recall_f(r.confusion);

  std::vector<Gender> gold;
  std::vector<double> ok, bad;
  std::array<std::array<std::vector<double>, 2>, kNumClasses> by_class;
  for (const auto& rec : records) {
    gold.push_back(rec.gold);
    (rec.correct() ? ok : bad).push_back(rec.entropy);
    by_class[class_index(rec.gold)][rec.correct() ? 0 : 1].push_back(rec.entropy);
  }
  r.baseline_accuracy = zero_rule_baseline(gold);
  r.entropy_correct = summarize(std::move(ok));
  r.entropy_error = summarize(std::move(bad));
  for (int c = 0; c < kNumClasses; ++c) {
    for (int k = 0; k < 2; ++k) r.entropy_by_class[c][k] = summarize(std::move(by_class[c][k]));
  }
  return r;
}

nlohmann::ordered_json to_json(const ConfusionMatrix& cm) {
  nlohmann::ordered_json j;
  for (auto g : {Gender::uter, Gender::neuter}) {
    for (auto p : {Gender::uter, Gender::neuter}) {
      j[std::string(gender_name(g)) + "->" + std::string(gender_name(p))] = cm.at(g, p);
    }
  }
  j["total"] = cm.total();
  return j;
}

nlohmann::ordered_json to_json(const PrecisionRecallF& prf) {
  return {{"precision", prf.precision},
          {"recall", prf.recall},
          {"f_score", prf.f_score},
          {"degenerate", prf.degenerate}};
}

namespace {
nlohmann::ordered_json to_json(const EntropySummary& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"median", s.median}};
}
}  // namespace

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["confusion"] = to_json(r.confusion);
  j["accuracy"] = r.accuracy;
  j["baseline_accuracy"] = r.baseline_accuracy;
  j["per_class"]["uter"] = to_json(r.per_class[0]);
  j["per_class"]["neuter"] = to_json(r.per_class[1]);
  j["overall"] = to_json(r.overall);
  j["overall"]["aggregation"] = "gold-share-weighted mean of per-class values";
  j["entropy_unit"] = "nats";
  j["entropy"]["correct"] = to_json(r.entropy_correct);
  j["entropy"]["error"] = to_json(r.entropy_error);
  for (auto g : {Gender::uter, Gender::neuter}) {
    const auto name = std::string(gender_name(g));
    j["entropy"]["by_class"][name]["correct"] = to_json(r.entropy_by_class[class_index(g)][0]);
    j["entropy"]["by_class"][name]["error"] = to_json(r.entropy_by_class[class_index(g)][1]);
  }
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace gendervec
