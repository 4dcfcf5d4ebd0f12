#include "gendervec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "gendervec/errors.hpp"
#include "gendervec/rng.hpp"

namespace gendervec {

SparseOperator::SparseOperator(CsrMatrix a) : a_(std::move(a)), at_(transpose(a_)) {}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
  kernels::spmv(a_, x, y);
}

void SparseOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
  kernels::spmv(at_, x, y);
}

void DenseOperator::apply(std::span<const double> x, std::span<double> y) const {
  Eigen::Map<Eigen::VectorXd>(y.data(), a_.rows()) =
      a_ * Eigen::Map<const Eigen::VectorXd>(x.data(), a_.cols());
}

void DenseOperator::apply_transpose(std::span<const double> x, std::span<double> y) const {
  Eigen::Map<Eigen::VectorXd>(y.data(), a_.cols()) =
      a_.transpose() * Eigen::Map<const Eigen::VectorXd>(x.data(), a_.rows());
}

namespace {

using Eigen::Index;

// Column-major growing basis of unit vectors.
class Basis {
 public:
  explicit Basis(std::size_t dim) : dim_(dim) {}

  std::size_t size() const { return data_.size() / dim_; }
  std::span<double> col(std::size_t j) { return {data_.data() + j * dim_, dim_}; }
  std::span<const double> col(std::size_t j) const { return {data_.data() + j * dim_, dim_}; }

  void push(std::span<const double> v) { data_.insert(data_.end(), v.begin(), v.end()); }

  // Twice-is-enough classical Gram-Schmidt against the first k vectors.
  void orthogonalize(std::span<double> w, std::size_t k) const {
    if (k == 0) return;
    kernels::project_out(data_, dim_, k, w);
    kernels::project_out(data_, dim_, k, w);
  }

  Eigen::Map<const Eigen::MatrixXd> matrix(std::size_t k) const {
    return {data_.data(), static_cast<Index>(dim_), static_cast<Index>(k)};
  }

 private:
  std::size_t dim_;
  std::vector<double> data_;
};

double norm(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size())).norm();
}

void scale(std::span<double> v, double s) {
  for (auto& x : v) x *= s;
}

// Fills w with a random unit vector orthogonal to the first k basis vectors.
void random_orthogonal(std::span<double> w, const Basis& basis, std::size_t k, Rng& rng) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    for (auto& x : w) x = rng.uniform() - 0.5;
    basis.orthogonalize(w, k);
    const double nrm = norm(w);
    if (nrm > 1e-8) {
      scale(w, 1.0 / nrm);
      return;
    }
  }
  throw NumericalError("truncated_svd: cannot extend the Krylov basis");
}

}  // namespace

TruncatedSvd truncated_svd(const LinearOperator& a, std::size_t k, const SvdOptions& opts) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const std::size_t r = std::min(m, n);
  if (r == 0) throw ConfigError("truncated_svd: empty matrix");
  if (k < 1 || k > r) {
    throw ConfigError("truncated_svd: rank " + std::to_string(k) + " outside [1, " +
                      std::to_string(r) + "]");
  }
  const std::size_t cap =
      std::min(r, opts.max_basis ? std::max(opts.max_basis, k) : std::max(8 * k + 200, k));
  const std::size_t check_every = 8;

  Rng rng(opts.seed);
  Basis vs(n), us(m);
  std::vector<double> alpha, beta;
  std::vector<double> wn(n), wm(m);

  for (auto& x : wn) x = rng.uniform() - 0.5;
  scale(wn, 1.0 / norm(wn));
  vs.push(wn);

  double op_norm = 0.0;  // running estimate for breakdown detection
  auto breakdown = [&](double v) { return v <= 1e-14 * std::max(op_norm, 1e-300) || v == 0.0; };

  TruncatedSvd result;
  for (std::size_t j = 0;; ++j) {
    // u_j = A v_j - beta_{j-1} u_{j-1}
    a.apply(vs.col(j), wm);
    if (j > 0) {
      const auto prev = us.col(j - 1);
      for (std::size_t i = 0; i < m; ++i) wm[i] -= beta[j - 1] * prev[i];
    }
    us.orthogonalize(wm, j);
    double aj = norm(wm);
    op_norm = std::max(op_norm, aj);
    if (breakdown(aj)) {
      aj = 0.0;
      random_orthogonal(wm, us, j, rng);
    } else {
      scale(wm, 1.0 / aj);
    }
    alpha.push_back(aj);
    us.push(wm);

    // v_{j+1} = A^T u_j - alpha_j v_j
    a.apply_transpose(us.col(j), wn);
    {
      const auto cur = vs.col(j);
      for (std::size_t i = 0; i < n; ++i) wn[i] -= aj * cur[i];
    }
    vs.orthogonalize(wn, j + 1);
    double bj = norm(wn);
    op_norm = std::max(op_norm, bj);
    const std::size_t size = j + 1;
    if (size == n) bj = 0.0;  // V spans everything; the residual is exact zero
    beta.push_back(bj);

    const bool at_cap = size == cap;
    const bool u_exhausted = size == m && size < n;
    if (size < n) {
      if (breakdown(bj)) {
        bj = 0.0;
        beta.back() = 0.0;
        random_orthogonal(wn, vs, size, rng);
      } else {
        scale(wn, 1.0 / bj);
      }
      vs.push(wn);
    }

    if (size < k || (!at_cap && (size - k) % check_every != 0)) continue;

    // Ritz step on the projected bidiagonal matrix. Once U spans R^m the
    // extended k x (k+1) projection is exact.
    const Index cols_b = u_exhausted ? static_cast<Index>(size + 1) : static_cast<Index>(size);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Index>(size), cols_b);
    for (std::size_t i = 0; i < size; ++i) {
      const auto ii = static_cast<Index>(i);
      b(ii, ii) = alpha[i];
      if (ii + 1 < cols_b) b(ii, ii + 1) = beta[i];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double s1 = sv.size() ? sv(0) : 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double res = u_exhausted ? 0.0
                                     : std::abs(beta[size - 1] *
                                                svd.matrixU()(static_cast<Index>(size - 1),
                                                              static_cast<Index>(i)));
      worst = std::max(worst, res);
    }
    const bool converged = worst <= opts.tolerance * std::max(s1, 1e-300) || s1 == 0.0;
    if (!converged && !at_cap) continue;
    if (!converged) {
      std::ostringstream msg;
      msg << "truncated_svd: no convergence with " << size
          << " Krylov vectors; max residual " << worst << " (sigma_1 = " << s1 << ")";
      throw NumericalError(msg.str());
    }

    const auto kk = static_cast<Index>(k);
    result.singular_values = sv.head(kk);
    result.right = vs.matrix(static_cast<std::size_t>(cols_b)) * svd.matrixV().leftCols(kk);
    result.left = us.matrix(size) * svd.matrixU().leftCols(kk);
    result.basis_size = size;
    result.max_residual = worst;
    break;
  }

  for (Index c = 0; c < result.right.cols(); ++c) {
    Index arg = 0;
    for (Index i = 1; i < result.right.rows(); ++i) {
      if (std::abs(result.right(i, c)) > std::abs(result.right(arg, c))) arg = i;
    }
    if (result.right(arg, c) < 0) {
      result.right.col(c) *= -1.0;
      result.left.col(c) *= -1.0;
    }
  }
  return result;
}

}  // namespace gendervec
