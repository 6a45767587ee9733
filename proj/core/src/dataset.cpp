// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaze/dataset.hpp"

#include <cmath>
#include <random>

namespace gaze {

namespace {
enum : std::uint64_t { kStreamMechanism = 11, kStreamSamples = 12 };
}  // namespace

Mechanism make_mechanism(std::uint64_t run_seed, std::size_t input_dim,
                         double nuisance_coupling) {
  std::mt19937_64 rng(derive_seed(run_seed, kStreamMechanism));
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto rows = static_cast<Eigen::Index>(input_dim);
  Mechanism m;
  m.gaze_map.resize(rows, 3);
  m.nuisance_map.resize(rows, static_cast<Eigen::Index>(kNuisanceDim));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < 3; ++c) m.gaze_map(r, c) = normal(rng);
  }
  const double scale = nuisance_coupling / std::sqrt(static_cast<double>(kNuisanceDim));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < m.nuisance_map.cols(); ++c) {
      m.nuisance_map(r, c) = scale * normal(rng);
    }
  }
  return m;
}

Dataset generate_dataset(std::size_t n, const DomainSpec& domain, std::uint64_t run_seed,
                         std::size_t input_dim, double nuisance_coupling) {
  if (n == 0) fail(ErrorKind::kEmptyRequest, "dataset size must be positive");
  if (!(domain.nuisance_scale >= 0.0) || !(domain.obs_noise >= 0.0)) {
    fail(ErrorKind::kConfiguration, "domain scales must be non-negative");
  }
  const Mechanism mech = make_mechanism(run_seed, input_dim, nuisance_coupling);
  std::mt19937_64 rng(derive_seed(derive_seed(run_seed, kStreamSamples),
                                  static_cast<std::uint64_t>(domain.id)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double max_sin = std::sin(deg2rad(kLabelMaxPitch));
  Dataset data;
  data.domain = domain;
  data.run_seed = run_seed;
  data.inputs.resize(static_cast<Eigen::Index>(input_dim), static_cast<Eigen::Index>(n));
  data.labels.reserve(n);

  Eigen::VectorXd nuisance(static_cast<Eigen::Index>(kNuisanceDim));
  for (std::size_t i = 0; i < n; ++i) {
    const double yaw = -kLabelMaxYaw + 2.0 * kLabelMaxYaw * unit(rng);
    const double pitch = rad2deg(std::asin(-max_sin + 2.0 * max_sin * unit(rng)));
    const GazeVector g = yawpitch_to_vec({yaw, pitch});
    for (Eigen::Index k = 0; k < nuisance.size(); ++k) {
      nuisance(k) = domain.nuisance_mean + domain.nuisance_scale * normal(rng);
    }
    Eigen::VectorXd x = (mech.gaze_map * g.vec() + mech.nuisance_map * nuisance).array().tanh();
    for (Eigen::Index r = 0; r < x.size(); ++r) x(r) += domain.obs_noise * normal(rng);
    data.inputs.col(static_cast<Eigen::Index>(i)) = x;
    data.labels.push_back(g);
  }
  return data;
}

}  // namespace gaze
