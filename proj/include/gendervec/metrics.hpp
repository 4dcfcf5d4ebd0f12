#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gendervec/classifier.hpp"
#include "gendervec/dataset.hpp"
#include "json.hpp"

namespace gendervec {

/// counts[gold][predicted], indexed by class_index().
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

  void add(Gender gold, Gender predicted) { ++counts[class_index(gold)][class_index(predicted)]; }
  std::uint64_t at(Gender gold, Gender predicted) const {
    return counts[class_index(gold)][class_index(predicted)];
  }
  std::uint64_t total() const;
  std::uint64_t correct() const;
  std::uint64_t gold_total(Gender g) const;
  std::uint64_t predicted_total(Gender g) const;

  static ConfusionMatrix from_records(std::span<const PredictionRecord> records);
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Correct / total. Throws DataError on an empty matrix.
double accuracy(const ConfusionMatrix& cm);

struct PrecisionRecallF {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  /// Set when a denominator was zero and the affected value defaulted to 0.
  bool degenerate = false;
};

PrecisionRecallF precision_recall_f(const ConfusionMatrix& cm, Gender cls);

/// Share-weighted average of the per-class values, weights = gold shares.
PrecisionRecallF overall_precision_recall_f(const ConfusionMatrix& cm);

/// Recall of one class, i.e. the accuracy on words of that gold class.
double class_accuracy(const ConfusionMatrix& cm, Gender cls);

/// sum_c accuracy_c * prior_c. Throws ConfigError unless the priors sum to
/// 1 within 1e-9 and cover every class in `per_class`.
double weighted_accuracy(const std::map<Gender, double>& per_class,
                         const std::map<Gender, double>& priors);

/// Largest class share. Throws DataError on empty input.
double zero_rule_baseline(std::span<const Gender> labels);
double zero_rule_baseline(std::span<const LabeledWord> words);

struct EntropySummary {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
};

EntropySummary summarize(std::vector<double> values);

struct EvalReport {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  std::array<PrecisionRecallF, kNumClasses> per_class{};
  PrecisionRecallF overall;
  double baseline_accuracy = 0.0;
  EntropySummary entropy_correct;
  EntropySummary entropy_error;
  /// [class][0 = correct, 1 = error]
  std::array<std::array<EntropySummary, 2>, kNumClasses> entropy_by_class{};
  std::vector<std::string> warnings;
};

/// Builds every field from the prediction records alone.
EvalReport make_eval_report(std::span<const PredictionRecord> records);

nlohmann::ordered_json to_json(const EvalReport& r);
nlohmann::ordered_json to_json(const ConfusionMatrix& cm);
nlohmann::ordered_json to_json(const PrecisionRecallF& prf);

}  // namespace gendervec
