#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version and a plain
// serial version in kernels::serial; the two produce bit-identical output
// for any worker count, and the tests hold them to that.

#include <cstdint>
#include <span>
#include <vector>

#include "gendervec/cooccurrence.hpp"

namespace gendervec {

/// Compressed sparse row matrix.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr;  // rows + 1
  std::vector<std::int32_t> col_idx;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }
};

CsrMatrix transpose(const CsrMatrix& m);

/// Per-block sums produced by the Monte-Carlo relabeling kernel.
struct PermutationTally {
  std::uint64_t extreme = 0;  // |stat| >= |observed|
  double sum = 0.0;
  double sum_sq = 0.0;
  std::uint64_t count = 0;
};

namespace kernels {

/// Counts pairs into canonical sorted entries.
std::vector<CoocEntry> count_pairs(const EncodedCorpus& corpus, const ContextConfig& cfg);

/// y = A x
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);

/// Projects w onto the orthogonal complement of the first `k` columns of
/// the column-major basis (length n each), one classical Gram-Schmidt pass.
void project_out(std::span<const double> basis, std::size_t n, std::size_t k,
                 std::span<double> w);

/// Monte-Carlo relabeling of the pooled sample: each of the n_perm draws
/// picks group_a_size items as group A and evaluates mean(A) - mean(B).
/// Draws are split into fixed blocks whose seeds derive from (seed, block).
PermutationTally permutation_tally(std::span<const double> pooled, std::size_t group_a_size,
                                   double observed, std::uint64_t n_perm, std::uint64_t seed);

inline constexpr std::uint64_t kPermutationBlock = 256;

namespace serial {

std::vector<CoocEntry> count_pairs(const EncodedCorpus& corpus, const ContextConfig& cfg);
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
void project_out(std::span<const double> basis, std::size_t n, std::size_t k,
                 std::span<double> w);
PermutationTally permutation_tally(std::span<const double> pooled, std::size_t group_a_size,
                                   double observed, std::uint64_t n_perm, std::uint64_t seed);

}  // namespace serial
}  // namespace kernels
}  // namespace gendervec
