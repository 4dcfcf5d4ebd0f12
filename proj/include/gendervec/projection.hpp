#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace gendervec {

struct Projection2D {
  std::vector<std::array<double, 2>> coords;  // one per input row
  std::array<double, 2> singular_values{};
};

/// Rank-2 truncated SVD of the mean-centered row matrix: each row maps to
/// its scores on the top two principal directions. Throws DataError for
/// fewer than 2 rows or numerical rank below 2.
Projection2D project_2d(const Eigen::MatrixXd& vectors);

}  // namespace gendervec
