#include <omp.h>

#include "doctest.h"
#include "gendervec/corpus.hpp"
#include "gendervec/kernels.hpp"
#include "gendervec/rng.hpp"

using namespace gendervec;

namespace {

struct Threads {
  int saved = omp_get_max_threads();
  explicit Threads(int n) { omp_set_num_threads(n); }
  ~Threads() { omp_set_num_threads(saved); }
};

EncodedCorpus random_encoded(std::uint64_t seed, int sentences, int types) {
  Rng rng(seed);
  EncodedCorpus e;
  e.offsets.push_back(0);
  for (int s = 0; s < sentences; ++s) {
    const auto len = rng.below(20);
    for (std::uint64_t i = 0; i < len; ++i) {
      e.ids.push_back(rng.below(10) == 0 ? kNoWord : static_cast<WordId>(rng.below(types)));
    }
    e.offsets.push_back(e.ids.size());
  }
  return e;
}

CsrMatrix random_csr(std::uint64_t seed, std::size_t rows, std::size_t cols, double density) {
  Rng rng(seed);
  CsrMatrix m{rows, cols, {0}, {}, {}};
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (rng.uniform() < density) {
        m.col_idx.push_back(static_cast<std::int32_t>(c));
        m.values.push_back(rng.normal());
      }
    }
    m.row_ptr.push_back(m.values.size());
  }
  return m;
}

}  // namespace

TEST_CASE("count_pairs: parallel equals serial for every configuration and thread count") {
  const auto corpus = random_encoded(1, 500, 60);
  for (int threads : {1, 2, 3, 8}) {
    Threads t(threads);
    for (auto type : {ContextType::asymmetric_backward, ContextType::asymmetric_forward, ContextType::symmetric}) {
      for (int w : {1, 3, 5}) {
        for (bool dw : {false, true}) {
          const ContextConfig cfg{type, w, dw};
          CHECK(kernels::count_pairs(corpus, cfg) == kernels::serial::count_pairs(corpus, cfg));
        }
      }
    }
  }
}

TEST_CASE("spmv: parallel equals serial bitwise") {
  const auto a = random_csr(2, 300, 170, 0.05);
  std::vector<double> x(170);
  Rng rng(3);
  for (auto& v : x) v = rng.normal();
  std::vector<double> y1(300), y2(300);
  kernels::serial::spmv(a, x, y1);
  for (int threads : {1, 4}) {
    Threads t(threads);
    kernels::spmv(a, x, y2);
    CHECK(y1 == y2);
  }
  // against a dense product
  for (std::size_t r = 0; r < a.rows; ++r) {
    double s = 0;
    for (auto k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) s += a.values[k] * x[static_cast<std::size_t>(a.col_idx[k])];
    CHECK(y1[r] == doctest::Approx(s).epsilon(1e-13));
  }
}

TEST_CASE("transpose twice is the identity") {
  const auto a = random_csr(4, 40, 25, 0.2);
  const auto tt = transpose(transpose(a));
  CHECK(tt.row_ptr == a.row_ptr);
  CHECK(tt.col_idx == a.col_idx);
  CHECK(tt.values == a.values);
}

TEST_CASE("project_out: parallel equals serial and removes the basis components") {
  const std::size_t n = 2000, k = 12;
  Rng rng(5);
  std::vector<double> basis(n * k);
  // Orthonormal basis by modified Gram-Schmidt in the test itself.
  for (std::size_t j = 0; j < k; ++j) {
    double* col = basis.data() + j * n;
    for (std::size_t i = 0; i < n; ++i) col[i] = rng.normal();
    for (std::size_t p = 0; p < j; ++p) {
      const double* q = basis.data() + p * n;
      double d = 0;
      for (std::size_t i = 0; i < n; ++i) d += q[i] * col[i];
      for (std::size_t i = 0; i < n; ++i) col[i] -= d * q[i];
    }
    double norm = 0;
    for (std::size_t i = 0; i < n; ++i) norm += col[i] * col[i];
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) col[i] /= norm;
  }
  std::vector<double> w(n);
  for (auto& v : w) v = rng.normal();
  auto w1 = w, w2 = w;
  kernels::serial::project_out(basis, n, k, w1);
  {
    Threads t(4);
    kernels::project_out(basis, n, k, w2);
  }
  CHECK(w1 == w2);
  for (std::size_t j = 0; j < k; ++j) {
    double d = 0;
    for (std::size_t i = 0; i < n; ++i) d += basis[j * n + i] * w1[i];
    CHECK(std::abs(d) < 1e-12);
  }
}

TEST_CASE("permutation_tally: parallel equals serial for any thread count") {
  Rng rng(6);
  std::vector<double> pooled(300);
  for (auto& v : pooled) v = rng.normal();
  const auto ref = kernels::serial::permutation_tally(pooled, 120, 0.1, 5000, 99);
  CHECK(ref.count == 5000);
  for (int threads : {1, 2, 5}) {
    Threads t(threads);
    const auto got = kernels::permutation_tally(pooled, 120, 0.1, 5000, 99);
    CHECK(got.extreme == ref.extreme);
    CHECK(got.sum == ref.sum);
    CHECK(got.sum_sq == ref.sum_sq);
    CHECK(got.count == ref.count);
  }
  // A different seed draws different relabelings.
  const auto other = kernels::serial::permutation_tally(pooled, 120, 0.1, 5000, 100);
  CHECK(other.sum != ref.sum);
}
