#include "gendervec/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "gendervec/errors.hpp"
#include "gendervec/rng.hpp"

namespace gendervec {
namespace {

// Distance weights 1/d are accumulated as integer multiples of 1/L with
// L = lcm(1..w), which keeps the sums exact and order-independent.
std::uint64_t weight_denominator(const ContextConfig& cfg) {
  if (!cfg.distance_weighting) return 1;
  if (cfg.window_size > 20) throw ConfigError("distance weighting supports window_size <= 20");
  std::uint64_t l = 1;
  for (std::uint64_t d = 2; d <= static_cast<std::uint64_t>(cfg.window_size); ++d) {
    l = std::lcm(l, d);
  }
  return l;
}

std::uint64_t pair_key(WordId ctx, WordId tgt) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ctx)) << 32) |
         static_cast<std::uint32_t>(tgt);
}

template <class Emit>
void for_each_pair(std::span<const WordId> sentence, const ContextConfig& cfg,
                   std::uint64_t denom, Emit&& emit) {
  const auto n = static_cast<std::ptrdiff_t>(sentence.size());
  const bool back = cfg.context_type != ContextType::asymmetric_forward;
  const bool fwd = cfg.context_type != ContextType::asymmetric_backward;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const WordId tgt = sentence[static_cast<std::size_t>(i)];
    if (tgt == kNoWord) continue;
    for (std::ptrdiff_t d = 1; d <= cfg.window_size; ++d) {
      const std::uint64_t units = cfg.distance_weighting ? denom / static_cast<std::uint64_t>(d) : 1;
      if (back && i - d >= 0) {
        const WordId ctx = sentence[static_cast<std::size_t>(i - d)];
        if (ctx != kNoWord) emit(pair_key(ctx, tgt), units);
      }
      if (fwd && i + d < n) {
        const WordId ctx = sentence[static_cast<std::size_t>(i + d)];
        if (ctx != kNoWord) emit(pair_key(ctx, tgt), units);
      }
    }
  }
}

template <class Map>
std::vector<CoocEntry> to_entries(const Map& counts, std::uint64_t denom) {
  std::vector<CoocEntry> out;
  out.reserve(counts.size());
  for (const auto& [key, units] : counts) {
    out.push_back({static_cast<std::int32_t>(key >> 32),
                   static_cast<std::int32_t>(key & 0xffffffffu),
                   static_cast<double>(units) / static_cast<double>(denom)});
  }
  return out;
}

void sort_entries(std::vector<CoocEntry>& e) {
  std::sort(e.begin(), e.end(), [](const CoocEntry& a, const CoocEntry& b) {
    return a.context != b.context ? a.context < b.context : a.target < b.target;
  });
}

PermutationTally tally_block(std::span<const double> pooled, std::size_t k, double total,
                             double observed, std::uint64_t draws, std::uint64_t block_seed) {
  const std::size_t n = pooled.size();
  const double tol = 1e-9 * std::max(1.0, std::abs(observed));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(block_seed);
  PermutationTally t;
  for (std::uint64_t p = 0; p < draws; ++p) {
    double sum_a = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(n - i));
      std::swap(idx[i], idx[j]);
      sum_a += pooled[idx[i]];
    }
    const double stat = sum_a / static_cast<double>(k) - (total - sum_a) / static_cast<double>(n - k);
    if (std::abs(stat) >= std::abs(observed) - tol) ++t.extreme;
    t.sum += stat;
    t.sum_sq += stat * stat;
    ++t.count;
  }
  return t;
}

PermutationTally combine(const std::vector<PermutationTally>& blocks) {
  PermutationTally out;
  for (const auto& b : blocks) {
    out.extreme += b.extreme;
    out.sum += b.sum;
    out.sum_sq += b.sum_sq;
    out.count += b.count;
  }
  return out;
}

void check_permutation_args(std::span<const double> pooled, std::size_t k) {
  if (k == 0 || k >= pooled.size()) throw ConfigError("permutation groups must be non-empty");
}

}  // namespace

CsrMatrix transpose(const CsrMatrix& m) {
  CsrMatrix t;
  t.rows = m.cols;
  t.cols = m.rows;
  t.row_ptr.assign(t.rows + 1, 0);
  for (auto c : m.col_idx) ++t.row_ptr[static_cast<std::size_t>(c) + 1];
  std::partial_sum(t.row_ptr.begin(), t.row_ptr.end(), t.row_ptr.begin());
  t.col_idx.resize(m.nnz());
  t.values.resize(m.nnz());
  auto next = t.row_ptr;
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t p = m.row_ptr[r]; p < m.row_ptr[r + 1]; ++p) {
      const auto dst = next[static_cast<std::size_t>(m.col_idx[p])]++;
      t.col_idx[dst] = static_cast<std::int32_t>(r);
      t.values[dst] = m.values[p];
    }
  }
  return t;
}

namespace kernels {

std::vector<CoocEntry> count_pairs(const EncodedCorpus& corpus, const ContextConfig& cfg) {
  const std::uint64_t denom = weight_denominator(cfg);
  const auto n = static_cast<std::ptrdiff_t>(corpus.sentence_count());
  std::vector<std::unordered_map<std::uint64_t, std::uint64_t>> partial;

#pragma omp parallel
  {
#pragma omp single
    partial.resize(static_cast<std::size_t>(omp_get_num_threads()));
    auto& local = partial[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(dynamic, 1024)
    for (std::ptrdiff_t s = 0; s < n; ++s) {
      for_each_pair(corpus.sentence(static_cast<std::size_t>(s)), cfg, denom,
                    [&](std::uint64_t key, std::uint64_t units) { local[key] += units; });
    }
  }

  auto& merged = partial.front();
  for (std::size_t i = 1; i < partial.size(); ++i) {
    for (const auto& [key, units] : partial[i]) merged[key] += units;
  }
  auto entries = to_entries(merged, denom);
  sort_entries(entries);
  return entries;
}

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  const auto rows = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const auto ur = static_cast<std::size_t>(r);
    double acc = 0.0;
    for (std::size_t p = a.row_ptr[ur]; p < a.row_ptr[ur + 1]; ++p) {
      acc += a.values[p] * x[static_cast<std::size_t>(a.col_idx[p])];
    }
    y[ur] = acc;
  }
}

void project_out(std::span<const double> basis, std::size_t n, std::size_t k,
                 std::span<double> w) {
  std::vector<double> coef(k);
  const auto sk = static_cast<std::ptrdiff_t>(k);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < sk; ++j) {
    const double* b = basis.data() + static_cast<std::size_t>(j) * n;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += b[i] * w[i];
    coef[static_cast<std::size_t>(j)] = acc;
  }
  const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < sn; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += coef[j] * basis[j * n + ui];
    w[ui] -= acc;
  }
}

PermutationTally permutation_tally(std::span<const double> pooled, std::size_t group_a_size,
                                   double observed, std::uint64_t n_perm, std::uint64_t seed) {
  check_permutation_args(pooled, group_a_size);
  const double total = std::accumulate(pooled.begin(), pooled.end(), 0.0);
  const std::uint64_t blocks = (n_perm + kPermutationBlock - 1) / kPermutationBlock;
  std::vector<PermutationTally> tallies(blocks);
  const auto sb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t b = 0; b < sb; ++b) {
    const auto ub = static_cast<std::uint64_t>(b);
    const std::uint64_t draws = std::min(kPermutationBlock, n_perm - ub * kPermutationBlock);
    tallies[static_cast<std::size_t>(b)] =
        tally_block(pooled, group_a_size, total, observed, draws, derive_seed(seed, ub));
  }
  return combine(tallies);
}

namespace serial {

std::vector<CoocEntry> count_pairs(const EncodedCorpus& corpus, const ContextConfig& cfg) {
  const std::uint64_t denom = weight_denominator(cfg);
  std::map<std::uint64_t, std::uint64_t> counts;
  for (std::size_t s = 0; s < corpus.sentence_count(); ++s) {
    for_each_pair(corpus.sentence(s), cfg, denom,
                  [&](std::uint64_t key, std::uint64_t units) { counts[key] += units; });
  }
  return to_entries(counts, denom);  // std::map iterates in key order
}

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  for (std::size_t r = 0; r < a.rows; ++r) {
    double acc = 0.0;
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      acc += a.values[p] * x[static_cast<std::size_t>(a.col_idx[p])];
    }
    y[r] = acc;
  }
}

void project_out(std::span<const double> basis, std::size_t n, std::size_t k,
                 std::span<double> w) {
  std::vector<double> coef(k);
  for (std::size_t j = 0; j < k; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += basis[j * n + i] * w[i];
    coef[j] = acc;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += coef[j] * basis[j * n + i];
    w[i] -= acc;
  }
}

PermutationTally permutation_tally(std::span<const double> pooled, std::size_t group_a_size,
                                   double observed, std::uint64_t n_perm, std::uint64_t seed) {
  check_permutation_args(pooled, group_a_size);
  const double total = std::accumulate(pooled.begin(), pooled.end(), 0.0);
  const std::uint64_t blocks = (n_perm + kPermutationBlock - 1) / kPermutationBlock;
  std::vector<PermutationTally> tallies;
  for (std::uint64_t b = 0; b < blocks; ++b) {
    const std::uint64_t draws = std::min(kPermutationBlock, n_perm - b * kPermutationBlock);
    tallies.push_back(
        tally_block(pooled, group_a_size, total, observed, draws, derive_seed(seed, b)));
  }
  return combine(tallies);
}

}  // namespace serial
}  // namespace kernels
}  // namespace gendervec
