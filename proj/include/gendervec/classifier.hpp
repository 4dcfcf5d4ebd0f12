#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gendervec/dataset.hpp"

namespace gendervec {

enum class Activation { relu, tanh };

std::string to_string(Activation a);
Activation parse_activation(std::string_view s);

/// Feed-forward network [K, H, 2] with a softmax output.
///
/// All trainable parameters live in one flat vector laid out as
/// W1 (H x K, row-major), b1 (H), W2 (2 x H, row-major), b2 (2). Inputs
/// are standardized with the fixed per-feature shift/scale taken from the
/// training set; those are not trained.
struct MLPModel {
  int input_dim = 0;
  int hidden = 0;
  Activation activation = Activation::relu;
  std::uint64_t seed = 0;
  std::vector<double> params;
  std::vector<double> input_mean;
  std::vector<double> input_scale;

  /// He/Glorot-uniform weights, zero biases, identity standardization.
  static MLPModel initialize(int input_dim, int hidden, Activation act, std::uint64_t seed);
  /// All parameters zero.
  static MLPModel zeros(int input_dim, int hidden, Activation act);

  static std::size_t parameter_count(int input_dim, int hidden) {
    return static_cast<std::size_t>(hidden) * static_cast<std::size_t>(input_dim + 1) +
           static_cast<std::size_t>(kNumClasses) * static_cast<std::size_t>(hidden + 1);
  }
  std::array<int, 3> layer_sizes() const { return {input_dim, hidden, kNumClasses}; }
  bool operator==(const MLPModel&) const = default;
};

struct TrainConfig {
  double learning_rate = 0.05;
  double momentum = 0.9;
  int batch_size = 64;
  int max_epochs = 200;
  int patience = 10;
  std::uint64_t seed = 7;
  int hidden = 64;
  Activation activation = Activation::relu;
  bool standardize = true;

  void validate() const;
};

struct TrainResult {
  MLPModel model;  // parameters of the best dev epoch
  int best_epoch = 0;  // 1-based
  double best_dev_accuracy = 0.0;
  int epochs_run = 0;
  std::vector<double> train_loss;    // per epoch, mean over batches
  std::vector<double> dev_accuracy;  // per epoch
};

/// Mini-batch gradient descent with momentum on mean cross-entropy. Keeps
/// the epoch with the highest dev accuracy (earliest on ties) and stops
/// after `patience` epochs without improvement. Single-threaded and
/// deterministic given the seed.
///
/// Throws DataError on empty sets or dimension mismatch and
/// NumericalError on a non-finite loss.
TrainResult train(std::span<const LabeledExample> train_set, std::span<const LabeledExample> dev_set,
                  const TrainConfig& cfg);

/// (p_uter, p_neuter)
using Distribution = std::array<double, kNumClasses>;

Distribution predict(const MLPModel& model, std::span<const double> x);
Gender predicted_gender(const Distribution& d);

/// -sum p ln p in nats, with 0 ln 0 = 0. Throws ConfigError for negative
/// or non-normalized input.
double output_entropy(const Distribution& d);

double accuracy_on(const MLPModel& model, std::span<const LabeledExample> data);

/// Row-per-example design matrix and class indices.
struct Batch {
  Eigen::MatrixXd x;
  std::vector<int> y;
};

Batch make_batch(std::span<const LabeledExample> data);

/// Mean cross-entropy; fills `grad` (same layout as params) by backprop.
double loss_and_gradient(const MLPModel& model, const Batch& batch, std::vector<double>& grad);
double loss(const MLPModel& model, const Batch& batch);

using GradientFn = std::function<double(const MLPModel&, const Batch&, std::vector<double>&)>;

/// Max over parameters of |analytic - numeric| / max(|analytic| + |numeric|, 1e-6),
/// numeric gradients by central differences with step epsilon.
double gradient_check(const MLPModel& model, const Batch& batch, double epsilon = 1e-5,
                      const GradientFn& analytic = loss_and_gradient);

/// One JSON header line, then the parameters, input means and input scales
/// as little-endian float64.
void write_model(std::ostream& out, const MLPModel& m);
MLPModel read_model(std::istream& in);
void save_model(const std::filesystem::path& path, const MLPModel& m);
MLPModel load_model(const std::filesystem::path& path);

struct PredictionRecord {
  std::string word;
  Gender gold = Gender::uter;
  Gender predicted = Gender::uter;
  double p_uter = 0.5;
  double p_neuter = 0.5;
  double entropy = 0.0;  // nats
  std::uint64_t frequency = 0;

  bool correct() const { return gold == predicted; }
};

std::vector<PredictionRecord> predict_records(const MLPModel& model,
                                              std::span<const LabeledExample> data);

/// Quotes a CSV field when it contains a comma, quote or line break.
std::string csv_field(const std::string& s);

/// CSV `word,gold,predicted,p_uter,p_neuter,entropy,frequency`.
void write_predictions_csv(std::ostream& out, std::span<const PredictionRecord> records);

}  // namespace gendervec
