#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "gendervec/classifier.hpp"
#include "gendervec/errors.hpp"
#include "gendervec/rng.hpp"

using namespace gendervec;

namespace {

// Two Gaussian blobs in 2-D, separated along the first axis.
std::vector<LabeledExample> blobs(std::size_t n, std::uint64_t seed, double gap = 4.0) {
  Rng rng(seed);
  std::vector<LabeledExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool neuter = i % 3 == 0;
    const double cx = neuter ? gap / 2 : -gap / 2;
    out.push_back({"b" + std::to_string(i), {cx + 0.5 * rng.normal(), 0.5 * rng.normal()},
                   neuter ? Gender::neuter : Gender::uter, 100 + i});
  }
  return out;
}

Batch random_batch(std::size_t n, int k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledExample> data;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(static_cast<std::size_t>(k));
    for (auto& x : v) x = rng.normal();
    data.push_back({"r", v, rng.below(2) ? Gender::neuter : Gender::uter, 1});
  }
  return make_batch(data);
}

// Backprop with the output-layer bias gradient deliberately wrong.
double corrupted(const MLPModel& m, const Batch& b, std::vector<double>& g) {
  const double l = loss_and_gradient(m, b, g);
  g.back() *= 1.5;
  g[0] += 0.1;
  return l;
}

}  // namespace

TEST_CASE("output entropy") {
  CHECK(output_entropy({0.5, 0.5}) == doctest::Approx(0.693147180559945).epsilon(1e-14));
  CHECK(output_entropy({1.0, 0.0}) == 0.0);
  CHECK(output_entropy({0.9, 0.1}) == doctest::Approx(0.325082973391448).epsilon(1e-14));
  CHECK_THROWS_AS(output_entropy({0.7, 0.7}), ConfigError);
  CHECK_THROWS_AS(output_entropy({-0.1, 1.1}), ConfigError);
}

TEST_CASE("prediction is a valid distribution") {
  const auto zero = MLPModel::zeros(3, 8, Activation::relu);
  const auto d = predict(zero, std::vector<double>{1, 2, 3});
  CHECK(d[0] == 0.5);
  CHECK(d[1] == 0.5);
  CHECK(predicted_gender(d) == Gender::uter);

  Rng rng(2);
  for (auto act : {Activation::relu, Activation::tanh}) {
    const auto m = MLPModel::initialize(5, 16, act, 3);
    for (int t = 0; t < 200; ++t) {
      std::vector<double> x(5);
      for (auto& v : x) v = 3.0 * rng.normal();
      const auto p = predict(m, x);
      CHECK(p[0] > 0.0);
      CHECK(p[1] > 0.0);
      CHECK(std::abs(p[0] + p[1] - 1.0) <= 1e-12);
      const double h = output_entropy(p);
      CHECK(h >= 0.0);
      CHECK(h <= std::log(2.0) + 1e-15);
    }
  }
  CHECK_THROWS_AS(predict(zero, std::vector<double>{1, 2}), DataError);
}

TEST_CASE("gradient check at initialization and after training") {
  for (auto act : {Activation::relu, Activation::tanh}) {
    auto m = MLPModel::initialize(6, 10, act, 11);
    const auto batch = random_batch(32, 6, 12);
    CHECK(gradient_check(m, batch) <= 1e-4);

    const auto data = blobs(120, 4);
    TrainConfig cfg;
    cfg.max_epochs = 1;
    cfg.hidden = 10;
    cfg.activation = act;
    std::vector<LabeledExample> wide;
    for (const auto& e : data) wide.push_back({e.word, {e.vector[0], e.vector[1], 0.3, -e.vector[0], 1.0, e.vector[1]}, e.gender, e.frequency});
    auto trained = train(wide, wide, cfg).model;
    CHECK(gradient_check(trained, batch) <= 1e-4);
  }
  // empty batch: zero gradient, the checker still passes
  const auto m = MLPModel::initialize(4, 6, Activation::relu, 1);
  Batch empty{Eigen::MatrixXd(0, 4), {}};
  CHECK(gradient_check(m, empty) <= 1e-4);
}

TEST_CASE("gradient check catches corrupted backprop") {
  const auto m = MLPModel::initialize(6, 10, Activation::relu, 11);
  const auto batch = random_batch(32, 6, 12);
  CHECK(gradient_check(m, batch, 1e-5, corrupted) > 1e-2);
}

TEST_CASE("separable blobs reach dev accuracy 1 within 50 epochs") {
  const auto tr = blobs(300, 1), dev = blobs(60, 2);
  TrainConfig cfg;
  cfg.max_epochs = 50;
  const auto r = train(tr, dev, cfg);
  CHECK(r.best_dev_accuracy == 1.0);
  CHECK(r.best_epoch <= 50);
  for (const auto& e : tr) CHECK(predicted_gender(predict(r.model, e.vector)) == e.gender);
}

TEST_CASE("single-class training predicts that class everywhere") {
  auto tr = blobs(60, 3);
  for (auto& e : tr) e.gender = Gender::uter;
  const auto dev = blobs(30, 5);
  const auto r = train(tr, dev, {});
  std::size_t uter = 0;
  for (const auto& e : dev) {
    CHECK(predicted_gender(predict(r.model, e.vector)) == Gender::uter);
    uter += e.gender == Gender::uter;
  }
  CHECK(r.best_dev_accuracy == doctest::Approx(static_cast<double>(uter) / 30.0));
}

TEST_CASE("full-batch gradient descent has non-increasing loss") {
  const auto data = blobs(90, 7);
  const auto batch = make_batch(data);
  auto m = MLPModel::initialize(2, 16, Activation::tanh, 3);
  const double lr = 0.05;
  double prev = loss(m, batch);
  std::vector<double> g;
  for (int step = 0; step < 200; ++step) {
    loss_and_gradient(m, batch, g);
    for (std::size_t i = 0; i < g.size(); ++i) m.params[i] -= lr * g[i];
    const double now = loss(m, batch);
    CHECK(now <= prev + 1e-12);
    prev = now;
  }
}

TEST_CASE("training is deterministic and validates its input") {
  const auto tr = blobs(100, 8, 1.0), dev = blobs(40, 9, 1.0);
  TrainConfig cfg;
  cfg.max_epochs = 15;
  const auto a = train(tr, dev, cfg), b = train(tr, dev, cfg);
  CHECK(a.model == b.model);
  CHECK(a.train_loss == b.train_loss);
  cfg.seed = 8;
  CHECK(!(train(tr, dev, cfg).model == a.model));

  CHECK_THROWS_AS(train({}, dev, {}), DataError);
  auto bad = dev;
  bad[0].vector.push_back(1.0);
  CHECK_THROWS_AS(train(tr, bad, {}), DataError);
  TrainConfig huge;
  huge.learning_rate = 1e200;
  huge.standardize = false;
  auto big = tr;
  for (auto& e : big) e.vector[0] *= 1e150;
  CHECK_THROWS_AS(train(big, dev, huge), NumericalError);
  TrainConfig neg;
  neg.learning_rate = -1;
  CHECK_THROWS_AS(neg.validate(), ConfigError);
}

TEST_CASE("model file round trip") {
  const auto tr = blobs(80, 10);
  TrainConfig cfg;
  cfg.max_epochs = 5;
  const auto m = train(tr, tr, cfg).model;
  std::stringstream ss;
  write_model(ss, m);
  const auto header = ss.str().substr(0, ss.str().find('\n'));
  CHECK(header.find("\"layer_sizes\":[2,64,2]") != std::string::npos);
  CHECK(read_model(ss) == m);
  std::stringstream truncated(ss.str().substr(0, ss.str().size() / 2));
  CHECK_THROWS_AS(read_model(truncated), DataError);
  const auto path = std::filesystem::temp_directory_path() / "gendervec_model_test.bin";
  save_model(path, m);
  CHECK(load_model(path) == m);
  std::filesystem::remove(path);
}

TEST_CASE("prediction records and CSV") {
  std::vector<LabeledExample> data = {{"a,b", {0.0, 0.0}, Gender::neuter, 9}};
  const auto recs = predict_records(MLPModel::zeros(2, 4, Activation::relu), data);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].predicted == Gender::uter);
  CHECK(recs[0].entropy == doctest::Approx(std::log(2.0)));
  std::ostringstream out;
  write_predictions_csv(out, recs);
  CHECK(out.str() == "word,gold,predicted,p_uter,p_neuter,entropy,frequency\n\"a,b\",neuter,uter,0.5,0.5,0.69314718055994529,9\n");
}
