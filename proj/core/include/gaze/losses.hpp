// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gaze/anchors.hpp"
#include "gaze/config.hpp"
#include "gaze/encoders.hpp"
#include "gaze/geometry.hpp"

namespace gaze {

/// Contrastive weight of a negative with label gj for an anchor with label gi.
double neg_weight(const GazeVector& gi, const GazeVector& gj, WeightingScheme scheme);

inline constexpr double kMinDenominator = 1e-12;

/// Loss value with gradients w.r.t. the (unnormalized) feature columns passed in.
struct McrLoss {
  double loss = 0.0;
  Eigen::MatrixXd d_text;   // D x B
  Eigen::MatrixXd d_image;  // D x B
  Eigen::MatrixXd d_bank;   // D x K, empty for the text-to-image direction
};

/// Text-to-image: each text feature against its image positive and the other
/// B-1 image features as weighted negatives. Similarities are cosines.
McrLoss mcr_t2i_loss(const Eigen::MatrixXd& text, const Eigen::MatrixXd& image,
                     std::span<const GazeVector> labels, WeightingScheme scheme,
                     double temperature = 1.0);

/// Image-to-text: negatives are the other B-1 text features plus all K bank
/// features, each weighted against its own gaze label.
McrLoss mcr_i2t_loss(const Eigen::MatrixXd& image, const Eigen::MatrixXd& text,
                     std::span<const GazeVector> labels, const Eigen::MatrixXd& bank,
                     std::span<const GazeVector> bank_gazes, WeightingScheme scheme,
                     double temperature = 1.0);

/// Sum of both directions and of their gradients.
McrLoss mcr_total(const Eigen::MatrixXd& text, const Eigen::MatrixXd& image,
                  std::span<const GazeVector> labels, const Eigen::MatrixXd& bank,
                  std::span<const GazeVector> bank_gazes, WeightingScheme scheme,
                  double temperature = 1.0);

inline constexpr double kGazeGradientClamp = 1.0 - 1e-9;

struct GazeLoss {
  double loss = 0.0;      // radians
  Eigen::MatrixXd d_raw;  // 3 x B, w.r.t. the pre-normalization regressor output
};

/// arccos(<raw/|raw|, label>) averaged over columns.
GazeLoss gaze_loss(const Eigen::MatrixXd& raw, std::span<const GazeVector> labels);
GazeLoss gaze_loss(const Eigen::Vector3d& raw, const GazeVector& label);

struct LossWeights {
  double geo = 1.0;
  double mcr = 1.0;
  double gaze = 1.0;
};

struct LossBreakdown {
  double geo = 0.0;
  double mcr_t2i = 0.0;
  double mcr_i2t = 0.0;
  double gaze = 0.0;
  double total = 0.0;
};

/// A loss component together with its gradient for every trainable tensor it touches.
struct ObjectiveTerm {
  double value = 0.0;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> grad;
};

struct Objective {
  LossBreakdown breakdown;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> grad;
};

LossBreakdown make_breakdown(double geo, double mcr_t2i, double mcr_i2t, double gaze,
                             const LossWeights& weights);

/// total = geo * l_geo + mcr * (l_t2i + l_i2t) + gaze * l_gaze, with the
/// matching weighted sum of gradients merged by tensor name.
Objective total_objective(const ObjectiveTerm& geo, const ObjectiveTerm& mcr_t2i,
                          const ObjectiveTerm& mcr_i2t, const ObjectiveTerm& gaze,
                          const LossWeights& weights);

/// K global negatives: fixed Fibonacci gaze directions, their interpolation
/// weights, and text features recomputed from the live parameters.
struct NegativeBank {
  std::vector<GazeVector> gazes;
  std::vector<InterpolationWeights> weights;
  Eigen::MatrixXd tokens;  // D_tok x K
  TextForward text;        // features in text.out.unit

  std::size_t size() const { return gazes.size(); }
  const Eigen::MatrixXd& features() const { return text.out.unit; }
};

/// Lays out directions and weights; features are filled by refresh_negative_bank.
NegativeBank make_negative_bank(std::size_t k, const AnchorGrid& grid,
                                InterpolationScheme scheme);

void refresh_negative_bank(NegativeBank& bank, const Eigen::MatrixXd& context,
                           const ParameterSet& params);

NegativeBank build_negative_bank(std::size_t k, const AnchorGrid& grid,
                                 const Eigen::MatrixXd& context, const ParameterSet& params,
                                 InterpolationScheme scheme = InterpolationScheme::kSphericalBilinear);

/// Gaze tokens (D_tok x M) for a list of interpolation weights.
Eigen::MatrixXd interpolate_tokens(std::span<const InterpolationWeights> weights,
                                   const Eigen::MatrixXd& embeddings);

/// Adds the token gradient back onto the anchor embeddings (N x D_tok).
void scatter_token_grad(std::span<const InterpolationWeights> weights,
                        const Eigen::MatrixXd& d_tokens, Eigen::MatrixXd& d_embeddings);

}  // namespace gaze
