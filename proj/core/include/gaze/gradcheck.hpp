// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gaze/params.hpp"

namespace gaze {

/// Central differences of f at x with step h, one coordinate at a time.
Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h);

/// |a - n| / max(|a|, |n|) in the 2-norm, with an absolute floor of 1e-12 on
/// the denominator.
double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric);

/// Concatenation of every trainable tensor, row-major within each tensor.
Eigen::VectorXd flatten_trainable(const ParameterSet& params, bool gradients = false);
void assign_trainable(ParameterSet& params, const Eigen::VectorXd& flat);

enum class GradcheckTarget { kLoss, kEncoder, kAll };

GradcheckTarget parse_gradcheck_target(const std::string& name);

struct GradcheckOptions {
  std::uint64_t seed = 0;
  std::size_t configurations = 100;
  double step = 1e-5;
  double tolerance = 1e-4;
};

struct GradcheckResult {
  std::string name;
  std::size_t configurations = 0;
  double worst_relative_error = 0.0;
  bool passed = false;
};

/// Compares every analytic gradient against central differences on
/// `configurations` random seeded problems per check.
std::vector<GradcheckResult> run_gradcheck(GradcheckTarget target,
                                           const GradcheckOptions& options = {});

}  // namespace gaze
