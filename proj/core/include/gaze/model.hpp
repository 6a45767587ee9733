// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "gaze/anchors.hpp"
#include "gaze/losses.hpp"
#include "gaze/params.hpp"

namespace gaze {

struct ObjectiveSettings {
  LossWeights weights;
  WeightingScheme weighting = WeightingScheme::kClampedCos;
  double temperature = 1.0;
};

/// One mini-batch with the interpolation weights of its labels precomputed.
struct Batch {
  Eigen::MatrixXd inputs;  // input_dim x B
  std::vector<GazeVector> labels;
  std::vector<InterpolationWeights> weights;
};

/// Full objective on one batch. Adds the lambda-weighted gradient to the
/// trainable tensors of `params` (callers zero them first). Geo and MCR terms
/// whose weight is zero are skipped and reported as 0. `bank` is refreshed
/// from `params`.
LossBreakdown forward_backward(ParameterSet& params, const AnchorGrid& grid, const Batch& batch,
                               NegativeBank& bank, const ObjectiveSettings& settings);

/// Loss value only; leaves `params` untouched.
LossBreakdown evaluate_objective(const ParameterSet& params, const AnchorGrid& grid,
                                 const Batch& batch, NegativeBank& bank,
                                 const ObjectiveSettings& settings);

/// Unit image features (D_feat x n) for a block of inputs.
Eigen::MatrixXd image_features(const ParameterSet& params, const Eigen::MatrixXd& inputs);

/// Predicted gaze directions for a block of inputs.
std::vector<GazeVector> predict(const ParameterSet& params, const Eigen::MatrixXd& inputs);

}  // namespace gaze
