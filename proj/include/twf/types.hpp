#pragma once

#include <Eigen/Core>

namespace twf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Design matrix storage: one sensing vector per row, row-major so the
/// serialized blob layout matches the in-memory layout.
using DesignMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr const char* kToolVersion = "twf 1.0.0";

}  // namespace twf
