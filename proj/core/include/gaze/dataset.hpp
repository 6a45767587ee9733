// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "gaze/config.hpp"
#include "gaze/geometry.hpp"

namespace gaze {

inline constexpr std::size_t kNuisanceDim = 8;
inline constexpr double kLabelMaxPitch = 60.0;
inline constexpr double kLabelMaxYaw = 90.0;
/// Default row-norm scale of the nuisance coupling matrix B.
inline constexpr double kDefaultNuisanceCoupling = 1.0;

/// Domain-invariant generative mechanism x = tanh(A g + B n) + noise, shared by
/// every domain generated from the same run seed.
struct Mechanism {
  Eigen::MatrixXd gaze_map;      // input_dim x 3
  Eigen::MatrixXd nuisance_map;  // input_dim x kNuisanceDim
};

Mechanism make_mechanism(std::uint64_t run_seed, std::size_t input_dim,
                         double nuisance_coupling = kDefaultNuisanceCoupling);

struct Dataset {
  DomainSpec domain;
  std::uint64_t run_seed = 0;
  Eigen::MatrixXd inputs;  // input_dim x n
  std::vector<GazeVector> labels;

  std::size_t size() const { return labels.size(); }
};

/// Labels are area-uniform on |yaw| <= 90, |pitch| <= 60; nuisance statistics
/// come from the domain. Bit-exactly regenerable from (n, domain, run_seed).
Dataset generate_dataset(std::size_t n, const DomainSpec& domain, std::uint64_t run_seed,
                         std::size_t input_dim = 32,
                         double nuisance_coupling = kDefaultNuisanceCoupling);

}  // namespace gaze
