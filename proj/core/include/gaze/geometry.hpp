// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "gaze/error.hpp"

namespace gaze {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Unit 3-vector gaze direction. Construction enforces |g| = 1 within 1e-9.
class GazeVector {
 public:
  static constexpr double kUnitTolerance = 1e-9;

  GazeVector() : v_(0.0, 0.0, 1.0) {}
  GazeVector(double x, double y, double z);
  explicit GazeVector(const Eigen::Vector3d& v) : GazeVector(v.x(), v.y(), v.z()) {}

  /// Projects an arbitrary nonzero vector onto the sphere.
  static GazeVector normalized(const Eigen::Vector3d& v);

  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }
  const Eigen::Vector3d& vec() const { return v_; }

  double dot(const GazeVector& other) const { return v_.dot(other.v_); }
  GazeVector operator-() const { return GazeVector(-v_); }

  friend bool operator==(const GazeVector& a, const GazeVector& b) { return a.v_ == b.v_; }

 private:
  Eigen::Vector3d v_;
};

/// Yaw in [-180, 180] and pitch in [-90, 90], both in degrees.
struct YawPitch {
  double yaw = 0.0;
  double pitch = 0.0;

  void validate() const;
};

/// x = cos(pitch) sin(yaw), y = sin(pitch), z = cos(pitch) cos(yaw).
/// Exact poles map to exactly (0, +-1, 0).
GazeVector yawpitch_to_vec(const YawPitch& yp);

/// Inverse of yawpitch_to_vec; yaw is 0 at the poles.
YawPitch vec_to_yawpitch(const GazeVector& g);

/// arccos of the clamped dot product, in degrees.
double angular_error(const GazeVector& a, const GazeVector& b);

/// Great-circle angle in radians, computed as atan2(|a x b|, a.b). Agrees with
/// the arccos form but keeps full precision near 0 and pi.
double arc_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

struct SlerpWeights {
  double w1 = 0.0;
  double w2 = 0.0;
};

inline constexpr double kSlerpDegenerateAngle = 1e-7;

/// Weights (w1, w2) with w1 g1 + w2 g2 = gi for gi on the g1-g2 great circle,
/// where t = angle(g1, gi) / angle(g1, g2).
SlerpWeights slerp_weights(const GazeVector& g1, const GazeVector& g2, const GazeVector& gi);

/// Slerp weights at an explicit parameter t.
SlerpWeights slerp_weights_at(const GazeVector& g1, const GazeVector& g2, double t);

GazeVector slerp_point(const GazeVector& g1, const GazeVector& g2, double t);

/// Fibonacci lattice of k nearly-uniform points on the unit sphere.
std::vector<GazeVector> fibonacci_sphere(std::size_t k);

}  // namespace gaze
