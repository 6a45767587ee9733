// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaze/normalize.hpp"

#include <cmath>
#include <string>

#include "gaze/error.hpp"

namespace gaze {

Normalized normalize_columns(const Eigen::MatrixXd& raw, const char* what) {
  Normalized n;
  n.norms = raw.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < n.norms.size(); ++j) {
    if (!(n.norms(j) > kDegenerateNorm) || !std::isfinite(n.norms(j))) {
      fail(ErrorKind::kDegenerate, std::string(what) + ": column " + std::to_string(j) +
                                       " has zero or non-finite norm");
    }
  }
  n.unit = raw * n.norms.cwiseInverse().asDiagonal();
  return n;
}

Eigen::MatrixXd normalize_columns_backward(const Normalized& n, const Eigen::MatrixXd& d_unit) {
  const Eigen::RowVectorXd proj = n.unit.cwiseProduct(d_unit).colwise().sum();
  return (d_unit - n.unit * proj.asDiagonal()) * n.norms.cwiseInverse().asDiagonal();
}

}  // namespace gaze
