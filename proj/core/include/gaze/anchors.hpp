// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "gaze/geometry.hpp"

namespace gaze {

enum class InterpolationScheme { kGlobalLinear, kPlanarBilinear, kSphericalBilinear };

const char* to_string(InterpolationScheme scheme);
InterpolationScheme parse_interpolation_scheme(const std::string& name);

struct CellCorners {
  // A1 = (yaw_lo, pitch_lo), A2 = (yaw_hi, pitch_lo),
  // A3 = (yaw_lo, pitch_hi), A4 = (yaw_hi, pitch_hi).
  std::size_t a1 = 0, a2 = 0, a3 = 0, a4 = 0;
  double yaw_lo = 0.0, yaw_hi = 0.0;
  double pitch_lo = 0.0, pitch_hi = 0.0;
};

/// Fixed yaw/pitch lattice of anchor directions. Yaw spans [-180, 180] with
/// both ends present; pitch spans [-90, 90]. Anchors are stored row-major:
/// index = pitch_row * yaw_count + yaw_column.
class AnchorGrid {
 public:
  AnchorGrid(double yaw_step, double pitch_step);

  double yaw_step() const { return yaw_step_; }
  double pitch_step() const { return pitch_step_; }
  std::size_t size() const { return gazes_.size(); }
  std::size_t yaw_count() const { return yaw_values_.size(); }
  std::size_t pitch_count() const { return pitch_values_.size(); }
  const std::vector<double>& yaw_values() const { return yaw_values_; }
  const std::vector<double>& pitch_values() const { return pitch_values_; }

  std::size_t index(std::size_t yaw_col, std::size_t pitch_row) const {
    return pitch_row * yaw_values_.size() + yaw_col;
  }
  const GazeVector& gaze(std::size_t k) const { return gazes_.at(k); }
  const YawPitch& position(std::size_t k) const { return positions_.at(k); }
  std::span<const GazeVector> gazes() const { return gazes_; }

  /// Grid cell bracketing yp. Points on a grid line belong to the cell that
  /// has them on its lower edge, except at the range maximum.
  CellCorners locate_cell(const YawPitch& yp) const;

 private:
  double yaw_step_;
  double pitch_step_;
  std::vector<double> yaw_values_;
  std::vector<double> pitch_values_;
  std::vector<GazeVector> gazes_;
  std::vector<YawPitch> positions_;
};

/// Grid geometry plus the learnable N x D_tok embedding matrix.
struct AnchorSet {
  AnchorGrid grid;
  Eigen::MatrixXd embeddings;

  std::size_t token_dim() const { return static_cast<std::size_t>(embeddings.cols()); }
};

inline constexpr double kAnchorInitStddev = 0.02;

AnchorSet build_anchor_grid(double yaw_step, double pitch_step, std::size_t token_dim,
                            std::uint64_t init_seed);

struct WeightEntry {
  std::size_t index = 0;
  double weight = 0.0;
};

struct InterpolationWeights {
  InterpolationScheme scheme = InterpolationScheme::kSphericalBilinear;
  std::vector<WeightEntry> entries;

  double sum() const;
  /// Weight on anchor k, summing duplicate entries.
  double weight_of(std::size_t k) const;
};

InterpolationWeights spherical_bilinear_weights(const YawPitch& yp, const AnchorGrid& grid);
InterpolationWeights spherical_bilinear_weights(const GazeVector& g, const AnchorGrid& grid);

InterpolationWeights planar_bilinear_weights(const YawPitch& yp, const AnchorGrid& grid);
InterpolationWeights planar_bilinear_weights(const GazeVector& g, const AnchorGrid& grid);

inline constexpr double kGlobalSingularSum = 1e-6;

/// w_j = cos(g, g_j) / sum_k cos(g, g_k); negative weights are kept.
InterpolationWeights global_linear_weights(const GazeVector& g,
                                           std::span<const GazeVector> anchors);
InterpolationWeights global_linear_weights(const GazeVector& g, const AnchorGrid& grid);

InterpolationWeights interpolation_weights(InterpolationScheme scheme, const GazeVector& g,
                                           const AnchorGrid& grid);

/// sum_k w_k * embeddings.row(k), no renormalization.
Eigen::VectorXd interpolate_embedding(const InterpolationWeights& w,
                                      const Eigen::MatrixXd& embeddings);

/// Direction reconstructed from the anchor gazes, normalize(sum_k w_k g_k).
GazeVector reconstruct_direction(const InterpolationWeights& w,
                                 std::span<const GazeVector> anchors);

struct GeoLoss {
  double loss = 0.0;
  Eigen::MatrixXd grad;  // same shape as the embeddings
};

/// Mean absolute mismatch between pairwise embedding cosines and pairwise gaze
/// cosines over all N^2 ordered pairs. Subgradient 0 at exact matches.
GeoLoss geo_loss(std::span<const GazeVector> gazes, const Eigen::MatrixXd& embeddings);
GeoLoss geo_loss(const AnchorSet& set);

/// Row-wise cosine similarity matrix of a set of vectors.
Eigen::MatrixXd cosine_matrix(const Eigen::MatrixXd& rows);

nlohmann::ordered_json to_json(const AnchorSet& set);
AnchorSet anchor_set_from_json(const nlohmann::json& doc);

}  // namespace gaze
