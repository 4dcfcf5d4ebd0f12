#include "gendervec/projection.hpp"

#include "gendervec/errors.hpp"
#include "gendervec/linalg.hpp"

namespace gendervec {

Projection2D project_2d(const Eigen::MatrixXd& vectors) {
  if (vectors.rows() < 2 || vectors.cols() < 2) {
    throw DataError("2-D projection needs at least 2 vectors of dimension >= 2");
  }
  const Eigen::MatrixXd centered = vectors.rowwise() - vectors.colwise().mean();
  const DenseOperator op(centered);
  const auto svd = truncated_svd(op, 2);
  const double s1 = svd.singular_values(0);
  const double s2 = svd.singular_values(1);
  if (!(s1 > 0.0) || s2 <= 1e-10 * s1) {
    throw DataError("2-D projection: input has numerical rank below 2");
  }
  Projection2D p;
  p.singular_values = {s1, s2};
  const Eigen::MatrixXd scores = centered * svd.right;
  p.coords.reserve(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) p.coords.push_back({scores(i, 0), scores(i, 1)});
  return p;
}

}  // namespace gendervec
