#include "gendervec/classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "gendervec/errors.hpp"
#include "gendervec/rng.hpp"
#include "json.hpp"

namespace gendervec {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Eigen::Index;

// Views into the flat parameter block.
template <class Ptr>
struct Layers {
  Eigen::Map<std::conditional_t<std::is_const_v<std::remove_pointer_t<Ptr>>, const RowMajor, RowMajor>> w1;
  Eigen::Map<std::conditional_t<std::is_const_v<std::remove_pointer_t<Ptr>>, const Eigen::VectorXd,
                                Eigen::VectorXd>>
      b1;
  Eigen::Map<std::conditional_t<std::is_const_v<std::remove_pointer_t<Ptr>>, const RowMajor, RowMajor>> w2;
  Eigen::Map<std::conditional_t<std::is_const_v<std::remove_pointer_t<Ptr>>, const Eigen::VectorXd,
                                Eigen::VectorXd>>
      b2;

  Layers(Ptr p, int k, int h)
      : w1(p, h, k),
        b1(p + static_cast<std::ptrdiff_t>(h) * k, h),
        w2(p + static_cast<std::ptrdiff_t>(h) * (k + 1), kNumClasses, h),
        b2(p + static_cast<std::ptrdiff_t>(h) * (k + 1) + kNumClasses * h, kNumClasses) {}
};

Layers<const double*> view(const MLPModel& m) { return {m.params.data(), m.input_dim, m.hidden}; }
Layers<double*> view(std::vector<double>& p, int k, int h) { return {p.data(), k, h}; }

Eigen::MatrixXd standardized(const MLPModel& m, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = x;
  for (Index c = 0; c < x.cols(); ++c) {
    const auto uc = static_cast<std::size_t>(c);
    out.col(c) = (out.col(c).array() - m.input_mean[uc]) * m.input_scale[uc];
  }
  return out;
}

Eigen::MatrixXd activate(const MLPModel& m, const Eigen::MatrixXd& z) {
  return m.activation == Activation::relu ? Eigen::MatrixXd(z.cwiseMax(0.0))
                                          : Eigen::MatrixXd(z.array().tanh().matrix());
}

Eigen::MatrixXd activation_derivative(const MLPModel& m, const Eigen::MatrixXd& z,
                                      const Eigen::MatrixXd& a) {
  if (m.activation == Activation::relu) {
    return (z.array() > 0.0).cast<double>().matrix();
  }
  return (1.0 - a.array().square()).matrix();
}

// Row-wise log-softmax of the logits.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    const double lse = mx + std::log((logits.row(i).array() - mx).exp().sum());
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

struct Forward {
  Eigen::MatrixXd x, z1, a1, log_p;
};

Forward forward(const MLPModel& m, const Eigen::MatrixXd& raw) {
  const auto l = view(m);
  Forward f;
  f.x = standardized(m, raw);
  f.z1 = (f.x * l.w1.transpose()).rowwise() + l.b1.transpose();
  f.a1 = activate(m, f.z1);
  const Eigen::MatrixXd logits = (f.a1 * l.w2.transpose()).rowwise() + l.b2.transpose();
  f.log_p = log_softmax(logits);
  return f;
}

void check_dims(const MLPModel& m, Index cols) {
  if (cols != m.input_dim) {
    throw DataError("input dimension " + std::to_string(cols) + " does not match model K=" +
                    std::to_string(m.input_dim));
  }
}

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation: " + std::string(s));
}

MLPModel MLPModel::zeros(int input_dim, int hidden, Activation act) {
  MLPModel m;
  m.input_dim = input_dim;
  m.hidden = hidden;
  m.activation = act;
  m.params.assign(parameter_count(input_dim, hidden), 0.0);
  m.input_mean.assign(static_cast<std::size_t>(input_dim), 0.0);
  m.input_scale.assign(static_cast<std::size_t>(input_dim), 1.0);
  return m;
}

MLPModel MLPModel::initialize(int input_dim, int hidden, Activation act, std::uint64_t seed) {
  if (input_dim < 1 || hidden < 1) throw ConfigError("layer sizes must be >= 1");
  MLPModel m = zeros(input_dim, hidden, act);
  m.seed = seed;
  Rng rng(seed);
  auto l = view(m.params, input_dim, hidden);
  const double gain = act == Activation::relu ? 6.0 : 3.0;
  const double r1 = std::sqrt(gain / input_dim);
  for (Index i = 0; i < l.w1.size(); ++i) l.w1.data()[i] = r1 * (2.0 * rng.uniform() - 1.0);
  const double r2 = std::sqrt(6.0 / (hidden + kNumClasses));
  for (Index i = 0; i < l.w2.size(); ++i) l.w2.data()[i] = r2 * (2.0 * rng.uniform() - 1.0);
  return m;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (hidden < 1) throw ConfigError("hidden must be >= 1");
}

Batch make_batch(std::span<const LabeledExample> data) {
  Batch b;
  if (data.empty()) return b;
  const auto k = static_cast<Index>(data.front().vector.size());
  b.x.resize(static_cast<Index>(data.size()), k);
  b.y.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (static_cast<Index>(data[i].vector.size()) != k) {
      throw DataError("inconsistent vector dimensionality at '" + data[i].word + "'");
    }
    b.x.row(static_cast<Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(data[i].vector.data(), k);
    b.y.push_back(class_index(data[i].gender));
  }
  return b;
}

double loss_and_gradient(const MLPModel& m, const Batch& batch, std::vector<double>& grad) {
  grad.assign(m.params.size(), 0.0);
  const Index n = batch.x.rows();
  if (n == 0) return 0.0;
  check_dims(m, batch.x.cols());
  const auto l = view(m);
  const Forward f = forward(m, batch.x);

  double total = 0.0;
  Eigen::MatrixXd dz = f.log_p.array().exp();  // softmax
  for (Index i = 0; i < n; ++i) {
    const auto y = batch.y[static_cast<std::size_t>(i)];
    total -= f.log_p(i, y);
    dz(i, y) -= 1.0;
  }
  dz /= static_cast<double>(n);

  auto g = view(grad, m.input_dim, m.hidden);
  g.w2 = dz.transpose() * f.a1;
  g.b2 = dz.colwise().sum().transpose();
  const Eigen::MatrixXd da1 = dz * l.w2;
  const Eigen::MatrixXd dz1 = da1.cwiseProduct(activation_derivative(m, f.z1, f.a1));
  g.w1 = dz1.transpose() * f.x;
  g.b1 = dz1.colwise().sum().transpose();
  return total / static_cast<double>(n);
}

double loss(const MLPModel& m, const Batch& batch) {
  const Index n = batch.x.rows();
  if (n == 0) return 0.0;
  check_dims(m, batch.x.cols());
  const Forward f = forward(m, batch.x);
  double total = 0.0;
  for (Index i = 0; i < n; ++i) total -= f.log_p(i, batch.y[static_cast<std::size_t>(i)]);
  return total / static_cast<double>(n);
}

double gradient_check(const MLPModel& model, const Batch& batch, double epsilon,
                      const GradientFn& analytic) {
  if (!(epsilon > 0.0)) throw ConfigError("gradient_check epsilon must be > 0");
  std::vector<double> grad;
  analytic(model, batch, grad);
  MLPModel probe = model;
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.params.size(); ++i) {
    const double orig = probe.params[i];
    probe.params[i] = orig + epsilon;
    const double up = loss(probe, batch);
    probe.params[i] = orig - epsilon;
    const double down = loss(probe, batch);
    probe.params[i] = orig;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double denom = std::max(std::abs(grad[i]) + std::abs(numeric), 1e-6);
    worst = std::max(worst, std::abs(grad[i] - numeric) / denom);
  }
  return worst;
}

Distribution predict(const MLPModel& m, std::span<const double> x) {
  check_dims(m, static_cast<Index>(x.size()));
  Eigen::MatrixXd row = Eigen::Map<const Eigen::RowVectorXd>(x.data(), static_cast<Index>(x.size()));
  const Forward f = forward(m, row);
  Distribution d{std::exp(f.log_p(0, 0)), std::exp(f.log_p(0, 1))};
  // renormalize so the pair sums to 1 up to a single rounding
  const double s = d[0] + d[1];
  d[0] /= s;
  d[1] = 1.0 - d[0];
  return d;
}

Gender predicted_gender(const Distribution& d) {
  return d[1] > d[0] ? Gender::neuter : Gender::uter;
}

double output_entropy(const Distribution& d) {
  if (d[0] < 0.0 || d[1] < 0.0) throw ConfigError("probabilities must be non-negative");
  if (std::abs(d[0] + d[1] - 1.0) > 1e-9) throw ConfigError("probabilities must sum to 1");
  double h = 0.0;
  for (double p : d) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double accuracy_on(const MLPModel& model, std::span<const LabeledExample> data) {
  if (data.empty()) return 0.0;
  const Batch b = make_batch(data);
  check_dims(model, b.x.cols());
  const Forward f = forward(model, b.x);
  std::size_t correct = 0;
  for (Index i = 0; i < b.x.rows(); ++i) {
    const int pred = f.log_p(i, 1) > f.log_p(i, 0) ? 1 : 0;
    correct += pred == b.y[static_cast<std::size_t>(i)];
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainResult train(std::span<const LabeledExample> train_set, std::span<const LabeledExample> dev_set,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) throw DataError("training set is empty");
  if (dev_set.empty()) throw DataError("development set is empty");
  const Batch all = make_batch(train_set);
  const int k = static_cast<int>(all.x.cols());
  for (const auto& e : dev_set) {
    if (static_cast<int>(e.vector.size()) != k) throw DataError("dev vector dimensionality mismatch");
  }

  TrainResult res;
  MLPModel model = MLPModel::initialize(k, cfg.hidden, cfg.activation, cfg.seed);
  if (cfg.standardize) {
    const double n = static_cast<double>(all.x.rows());
    for (int c = 0; c < k; ++c) {
      const double mean = all.x.col(c).sum() / n;
      const double var = (all.x.col(c).array() - mean).square().sum() / n;
      model.input_mean[static_cast<std::size_t>(c)] = mean;
      model.input_scale[static_cast<std::size_t>(c)] = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    }
  }

  std::vector<double> velocity(model.params.size(), 0.0);
  std::vector<double> grad;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffler(derive_seed(cfg.seed, 1));
  const auto bs = static_cast<std::size_t>(cfg.batch_size);

  res.model = model;
  res.best_dev_accuracy = -1.0;
  int stale = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffler.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t stop = std::min(order.size(), start + bs);
      Batch b;
      b.x.resize(static_cast<Index>(stop - start), k);
      for (std::size_t i = start; i < stop; ++i) {
        b.x.row(static_cast<Index>(i - start)) = all.x.row(static_cast<Index>(order[i]));
        b.y.push_back(all.y[order[i]]);
      }
      const double l = loss_and_gradient(model, b, grad);
      if (!std::isfinite(l)) {
        throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batches + 1));
      }
      for (std::size_t p = 0; p < velocity.size(); ++p) {
        velocity[p] = cfg.momentum * velocity[p] - cfg.learning_rate * grad[p];
        model.params[p] += velocity[p];
      }
      epoch_loss += l;
      ++batches;
    }
    res.train_loss.push_back(epoch_loss / static_cast<double>(batches));
    const double acc = accuracy_on(model, dev_set);
    res.dev_accuracy.push_back(acc);
    res.epochs_run = epoch;
    if (acc > res.best_dev_accuracy) {
      res.best_dev_accuracy = acc;
      res.best_epoch = epoch;
      res.model = model;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  return res;
}

void write_model(std::ostream& out, const MLPModel& m) {
  nlohmann::ordered_json h;
  h["format"] = "gendervec-mlp";
  h["version"] = 1;
  h["layer_sizes"] = m.layer_sizes();
  h["activation"] = to_string(m.activation);
  h["output"] = "softmax";
  h["seed"] = m.seed;
  h["parameter_count"] = m.params.size();
  h["layout"] = "W1,b1,W2,b2,input_mean,input_scale; float64 little-endian; row-major";
  out << h.dump() << '\n';
  for (double v : m.params) put(out, v);
  for (double v : m.input_mean) put(out, v);
  for (double v : m.input_scale) put(out, v);
}

MLPModel read_model(std::istream& in) {
  static_assert(std::endian::native == std::endian::little);
  std::string line;
  if (!std::getline(in, line)) throw DataError("model file is empty");
  MLPModel m;
  try {
    const auto h = nlohmann::json::parse(line);
    if (h.at("format") != "gendervec-mlp") throw DataError("not a gendervec model file");
    const auto sizes = h.at("layer_sizes").get<std::vector<int>>();
    if (sizes.size() != 3 || sizes[2] != kNumClasses) throw DataError("bad layer sizes");
    m = MLPModel::zeros(sizes[0], sizes[1], parse_activation(h.at("activation").get<std::string>()));
    m.seed = h.at("seed").get<std::uint64_t>();
    if (h.at("parameter_count").get<std::size_t>() != m.params.size()) {
      throw DataError("parameter count does not match layer sizes");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad model header: ") + e.what());
  }
  auto read_block = [&](std::vector<double>& v) {
    if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * 8))) {
      throw DataError("truncated model parameter block");
    }
  };
  read_block(m.params);
  read_block(m.input_mean);
  read_block(m.input_scale);
  return m;
}

void save_model(const std::filesystem::path& path, const MLPModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_model(out, m);
}

MLPModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model " + path.string());
  return read_model(in);
}

std::vector<PredictionRecord> predict_records(const MLPModel& model,
                                              std::span<const LabeledExample> data) {
  std::vector<PredictionRecord> out;
  out.reserve(data.size());
  for (const auto& e : data) {
    const auto d = predict(model, e.vector);
    out.push_back({e.word, e.gender, predicted_gender(d), d[0], d[1], output_entropy(d), e.frequency});
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_predictions_csv(std::ostream& out, std::span<const PredictionRecord> records) {
  out << "word,gold,predicted,p_uter,p_neuter,entropy,frequency\n";
  const auto old = out.precision(17);
  for (const auto& r : records) {
    out << csv_field(r.word) << ',' << gender_name(r.gold) << ',' << gender_name(r.predicted) << ','
        << r.p_uter << ',' << r.p_neuter << ',' << r.entropy << ',' << r.frequency << '\n';
  }
  out.precision(old);
}

}  // namespace gendervec
