// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

namespace gaze {

inline constexpr double kDegenerateNorm = 1e-12;

/// Column-wise L2 normalization with the norms kept for the backward pass.
struct Normalized {
  Eigen::MatrixXd unit;
  Eigen::VectorXd norms;
};

/// Throws kDegenerate on a zero or non-finite column; `what` names the caller.
Normalized normalize_columns(const Eigen::MatrixXd& raw, const char* what);

/// d raw = (d unit - unit <unit, d unit>) / |raw|, column by column.
Eigen::MatrixXd normalize_columns_backward(const Normalized& n, const Eigen::MatrixXd& d_unit);

}  // namespace gaze
