// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Core>

#include "gaze/error.hpp"
#include "gaze/geometry.hpp"

namespace test {

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline gaze::GazeVector random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    Eigen::Vector3d v(n(rng), n(rng), n(rng));
    if (v.norm() > 1e-6) return gaze::GazeVector::normalized(v);
  }
}

inline Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng,
                                     double stddev = 1.0) {
  std::normal_distribution<double> n(0.0, stddev);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = n(rng);
  return m;
}

template <typename F>
gaze::ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const gaze::Error& e) {
    return e.kind();
  }
  FAIL("expected a gaze::Error");
  return gaze::ErrorKind::kIo;
}

}  // namespace test
