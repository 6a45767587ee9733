// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "gaze/anchors.hpp"

namespace gaze {

enum class WeightingScheme { kLiteralCos, kClampedCos, kDistance, kUniform };

const char* to_string(WeightingScheme scheme);
WeightingScheme parse_weighting_scheme(const std::string& name);

/// Network and grid dimensions.
struct ModelConfig {
  std::size_t input_dim = 32;
  std::size_t hidden_dim = 64;
  std::size_t feature_dim = 64;
  std::size_t token_dim = 16;
  std::size_t context_len = 10;  // L: L-1 context tokens plus the gaze token
  double yaw_step = 30.0;
  double pitch_step = 30.0;

  void validate() const;
};

/// Statistics of one synthetic domain: nuisance ~ N(mean * 1, scale^2 I).
struct DomainSpec {
  int id = 0;
  double nuisance_mean = 0.0;
  double nuisance_scale = 1.0;
  double obs_noise = 0.01;

  void validate() const;
};

struct TrainConfig {
  ModelConfig model;

  std::size_t batch_size = 64;
  std::size_t epochs = 30;
  double lr = 5e-2;
  double weight_decay = 1e-5;
  double momentum = 0.9;
  bool nesterov = true;
  double warmup_epochs = 3.0;

  std::size_t negatives = 256;  // K
  double lambda_geo = 1.0;
  double lambda_mcr = 1.0;
  double lambda_gaze = 1.0;
  WeightingScheme weighting = WeightingScheme::kClampedCos;
  double temperature = 1.0;
  InterpolationScheme interpolation = InterpolationScheme::kSphericalBilinear;

  std::size_t n_source = 4096;
  std::size_t n_target = 1024;
  DomainSpec source{0, 0.0, 1.0, 0.01};
  DomainSpec target{1, 0.8, 1.5, 0.01};
  double nuisance_coupling = 1.0;  // scale of the nuisance-to-input map shared by all domains

  std::uint64_t seed = 0;          // parameter init and batch shuffling
  std::uint64_t data_seed = 0;     // synthetic data generation
  std::uint64_t proxy_seed = 1234; // frozen text-encoder proxy
  std::size_t workers = 1;         // evaluation fan-out; results are worker-count invariant

  void validate() const;
};

nlohmann::ordered_json to_json(const TrainConfig& config);

/// Parses a config document over the defaults. Unknown keys and type
/// mismatches raise a configuration error naming the JSON pointer of the key.
TrainConfig config_from_json(const nlohmann::json& doc, TrainConfig base = {});

/// Deterministic child seed for a named random stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace gaze
