// Serial vs OpenMP kernels. Run with OMP_NUM_THREADS / GENDERVEC_THREADS
// set to compare worker counts.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <vector>

#include "gendervec/kernels.hpp"
#include "gendervec/rng.hpp"

using namespace gendervec;

namespace {

EncodedCorpus random_corpus(std::size_t sentences, std::int32_t vocab) {
  Rng rng(1);
  EncodedCorpus c;
  c.offsets.push_back(0);
  for (std::size_t s = 0; s < sentences; ++s) {
    const auto len = 4 + rng.below(12);
    for (std::uint64_t i = 0; i < len; ++i) {
      // skewed ids, some out of vocabulary
      const auto r = rng.uniform();
      c.ids.push_back(r < 0.05 ? kNoWord : static_cast<WordId>(r * r * vocab));
    }
    c.offsets.push_back(c.ids.size());
  }
  return c;
}

CsrMatrix random_csr(std::size_t rows, std::size_t cols, std::size_t per_row) {
  Rng rng(2);
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.push_back(0);
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<std::int32_t> idx;
    for (std::size_t k = 0; k < per_row; ++k) idx.push_back(static_cast<std::int32_t>(rng.below(cols)));
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    for (auto j : idx) {
      m.col_idx.push_back(j);
      m.values.push_back(rng.uniform());
    }
    m.row_ptr.push_back(m.col_idx.size());
  }
  return m;
}

const EncodedCorpus& corpus() {
  static const auto c = random_corpus(30000, 5000);
  return c;
}

const CsrMatrix& matrix() {
  static const auto m = random_csr(50000, 50000, 40);
  return m;
}

template <bool Parallel>
void BM_count_pairs(benchmark::State& state) {
  const ContextConfig cfg{ContextType::symmetric, static_cast<int>(state.range(0))};
  for (auto _ : state) {
    auto e = Parallel ? kernels::count_pairs(corpus(), cfg) : kernels::serial::count_pairs(corpus(), cfg);
    benchmark::DoNotOptimize(e.data());
  }
}

template <bool Parallel>
void BM_spmv(benchmark::State& state) {
  const auto& a = matrix();
  std::vector<double> x(a.cols, 1.0), y(a.rows);
  for (auto _ : state) {
    if (Parallel) {
      kernels::spmv(a, x, y);
    } else {
      kernels::serial::spmv(a, x, y);
    }
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Parallel>
void BM_permutation_tally(benchmark::State& state) {
  Rng rng(3);
  std::vector<double> pooled(2000);
  for (auto& v : pooled) v = rng.normal();
  const auto n_perm = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    auto t = Parallel ? kernels::permutation_tally(pooled, 100, 0.1, n_perm, 9)
                      : kernels::serial::permutation_tally(pooled, 100, 0.1, n_perm, 9);
    benchmark::DoNotOptimize(t);
  }
}

}  // namespace

BENCHMARK(BM_count_pairs<false>)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_count_pairs<true>)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_spmv<false>)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_spmv<true>)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_permutation_tally<false>)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_permutation_tally<true>)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
