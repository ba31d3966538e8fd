#pragma once

#include <Eigen/Dense>

namespace lexbridge {

/// One row per word. Row-major so a word vector is contiguous.
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Scales every row to unit Euclidean length; zero rows are left as is.
void normalize_rows(RowMatrix& m);

bool all_finite(const Eigen::Ref<const Matrix>& m);

}  // namespace lexbridge
