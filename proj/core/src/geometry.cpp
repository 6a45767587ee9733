// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaze/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gaze {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kRange: return "range error";
    case ErrorKind::kInvariant: return "invariant error";
    case ErrorKind::kSingular: return "singular configuration";
    case ErrorKind::kEmptyRequest: return "empty request";
    case ErrorKind::kConfiguration: return "configuration error";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kDegenerate: return "degenerate vector";
    case ErrorKind::kNonpositiveDenominator: return "nonpositive denominator";
    case ErrorKind::kNonFinite: return "non-finite value";
    case ErrorKind::kUndefinedRank: return "undefined rank";
    case ErrorKind::kIo: return "i/o error";
  }
  return "unknown error";
}

GazeVector::GazeVector(double x, double y, double z) : v_(x, y, z) {
  const double n = v_.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kUnitTolerance) {
    fail(ErrorKind::kInvariant,
         "gaze vector must have unit norm, got |g| = " + std::to_string(n));
  }
}

GazeVector GazeVector::normalized(const Eigen::Vector3d& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    fail(ErrorKind::kDegenerate, "cannot normalize a zero or non-finite 3-vector");
  }
  return GazeVector(v / n);
}

void YawPitch::validate() const {
  if (!(yaw >= -180.0 && yaw <= 180.0)) {
    fail(ErrorKind::kRange, "yaw " + std::to_string(yaw) + " outside [-180, 180]");
  }
  if (!(pitch >= -90.0 && pitch <= 90.0)) {
    fail(ErrorKind::kRange, "pitch " + std::to_string(pitch) + " outside [-90, 90]");
  }
}

GazeVector yawpitch_to_vec(const YawPitch& yp) {
  yp.validate();
  if (yp.pitch == 90.0) return GazeVector(0.0, 1.0, 0.0);
  if (yp.pitch == -90.0) return GazeVector(0.0, -1.0, 0.0);
  const double y = deg2rad(yp.yaw);
  const double p = deg2rad(yp.pitch);
  return GazeVector(std::cos(p) * std::sin(y), std::sin(p), std::cos(p) * std::cos(y));
}

YawPitch vec_to_yawpitch(const GazeVector& g) {
  const double horizontal = std::hypot(g.x(), g.z());
  YawPitch yp;
  yp.pitch = rad2deg(std::atan2(g.y(), horizontal));
  yp.yaw = horizontal == 0.0 ? 0.0 : rad2deg(std::atan2(g.x(), g.z()));
  return yp;
}

double angular_error(const GazeVector& a, const GazeVector& b) {
  const double c = std::clamp(a.dot(b), -1.0, 1.0);
  return rad2deg(std::acos(c));
}

double arc_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

namespace {

void require_not_antipodal(double theta) {
  if (theta > kPi - kSlerpDegenerateAngle) {
    fail(ErrorKind::kSingular, "slerp between antipodal directions is undefined");
  }
}

}  // namespace

SlerpWeights slerp_weights_at(const GazeVector& g1, const GazeVector& g2, double t) {
  const double theta = arc_angle(g1.vec(), g2.vec());
  require_not_antipodal(theta);
  if (theta < kSlerpDegenerateAngle) return {1.0 - t, t};
  const double s = std::sin(theta);
  return {std::sin((1.0 - t) * theta) / s, std::sin(t * theta) / s};
}

SlerpWeights slerp_weights(const GazeVector& g1, const GazeVector& g2, const GazeVector& gi) {
  const double theta = arc_angle(g1.vec(), g2.vec());
  require_not_antipodal(theta);
  if (theta < kSlerpDegenerateAngle) {
    const double chord = (g2.vec() - g1.vec()).norm();
    double t = 0.0;
    if (chord > 1e-12) t = std::clamp((gi.vec() - g1.vec()).norm() / chord, 0.0, 1.0);
    return {1.0 - t, t};
  }
  const double t = arc_angle(g1.vec(), gi.vec()) / theta;
  const double s = std::sin(theta);
  return {std::sin((1.0 - t) * theta) / s, std::sin(t * theta) / s};
}

GazeVector slerp_point(const GazeVector& g1, const GazeVector& g2, double t) {
  const double theta = arc_angle(g1.vec(), g2.vec());
  require_not_antipodal(theta);
  if (theta < kSlerpDegenerateAngle) {
    return GazeVector::normalized((1.0 - t) * g1.vec() + t * g2.vec());
  }
  const SlerpWeights w = slerp_weights_at(g1, g2, t);
  // Renormalize to absorb rounding; the weighted sum is unit up to ~1e-16.
  return GazeVector::normalized(w.w1 * g1.vec() + w.w2 * g2.vec());
}

std::vector<GazeVector> fibonacci_sphere(std::size_t k) {
  if (k == 0) fail(ErrorKind::kEmptyRequest, "fibonacci_sphere needs at least one point");
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  std::vector<GazeVector> points;
  points.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double y = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(k);
    const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
    const double phi = static_cast<double>(i) * golden_angle;
    points.push_back(GazeVector::normalized({r * std::cos(phi), y, r * std::sin(phi)}));
  }
  return points;
}

}  // namespace gaze
