#pragma once

#include <Eigen/Dense>

namespace mgg {

/// Dense row-major matrix of 64-bit reals; every numeric object in the
/// pipeline (features, similarities, weights, centralities) is one of these.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

} // namespace mgg
