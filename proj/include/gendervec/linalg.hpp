#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>

#include "gendervec/kernels.hpp"

namespace gendervec {

/// A matrix known only through products with it and its transpose.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  /// y = A x
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
  /// y = A^T x
  virtual void apply_transpose(std::span<const double> x, std::span<double> y) const = 0;
};

/// Sparse operator backed by CSR copies of A and A^T, so both products are
/// row-parallel with a fixed per-row summation order.
class SparseOperator final : public LinearOperator {
 public:
  explicit SparseOperator(CsrMatrix a);

  std::size_t rows() const override { return a_.rows; }
  std::size_t cols() const override { return a_.cols; }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_transpose(std::span<const double> x, std::span<double> y) const override;

  const CsrMatrix& matrix() const { return a_; }

 private:
  CsrMatrix a_;
  CsrMatrix at_;
};

class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(const Eigen::MatrixXd& a) : a_(a) {}

  std::size_t rows() const override { return static_cast<std::size_t>(a_.rows()); }
  std::size_t cols() const override { return static_cast<std::size_t>(a_.cols()); }
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_transpose(std::span<const double> x, std::span<double> y) const override;

 private:
  const Eigen::MatrixXd& a_;
};

struct SvdOptions {
  std::uint64_t seed = 42;
  /// Converged when every requested residual ||A^T u - sigma v|| is at
  /// most tolerance * sigma_1.
  double tolerance = 1e-12;
  /// Krylov dimension cap; 0 means min(rows, cols).
  std::size_t max_basis = 0;
};

struct TruncatedSvd {
  Eigen::VectorXd singular_values;  // K, descending
  Eigen::MatrixXd right;            // cols x K, orthonormal columns
  Eigen::MatrixXd left;             // rows x K
  std::size_t basis_size = 0;       // Krylov vectors used
  double max_residual = 0.0;
};

/// Top-K singular triplets by Golub-Kahan-Lanczos bidiagonalization with
/// full reorthogonalization. Sign convention: the largest-magnitude entry
/// of every right singular vector is non-negative.
///
/// Throws ConfigError when k is outside [1, min(rows, cols)] and
/// NumericalError when the residual does not reach the tolerance.
TruncatedSvd truncated_svd(const LinearOperator& a, std::size_t k, const SvdOptions& opts = {});

}  // namespace gendervec
