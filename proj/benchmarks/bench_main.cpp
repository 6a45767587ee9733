// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "gaze/anchors.hpp"
#include "gaze/config.hpp"
#include "gaze/dataset.hpp"
#include "gaze/encoders.hpp"
#include "gaze/losses.hpp"
#include "gaze/model.hpp"

namespace {

std::vector<gaze::GazeVector> random_labels(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> yaw(-90, 90), pitch(-60, 60);
  std::vector<gaze::GazeVector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(gaze::yawpitch_to_vec({yaw(rng), pitch(rng)}));
  return out;
}

Eigen::MatrixXd random_features(Eigen::Index d, Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(d, n);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = normal(rng);
  return m.colwise().normalized();
}

void BM_SlerpWeights(benchmark::State& state) {
  const auto g = random_labels(3, 1);
  const gaze::GazeVector mid = gaze::slerp_point(g[0], g[1], 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(gaze::slerp_weights(g[0], g[1], mid));
}
BENCHMARK(BM_SlerpWeights);

void BM_InterpolationWeights(benchmark::State& state) {
  const auto scheme = static_cast<gaze::InterpolationScheme>(state.range(0));
  const gaze::AnchorGrid grid(30, 30);
  const auto labels = random_labels(256, 2);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gaze::interpolation_weights(scheme, labels[i++ % labels.size()], grid));
  }
  state.SetLabel(gaze::to_string(scheme));
}
BENCHMARK(BM_InterpolationWeights)
    ->Arg(static_cast<int>(gaze::InterpolationScheme::kGlobalLinear))
    ->Arg(static_cast<int>(gaze::InterpolationScheme::kPlanarBilinear))
    ->Arg(static_cast<int>(gaze::InterpolationScheme::kSphericalBilinear));

void BM_GeoLoss(benchmark::State& state) {
  const gaze::AnchorGrid grid(30, 30);
  const Eigen::MatrixXd emb = random_features(16, 91, 3).transpose();
  for (auto _ : state) benchmark::DoNotOptimize(gaze::geo_loss(grid.gazes(), emb));
}
BENCHMARK(BM_GeoLoss);

void BM_McrTotal(benchmark::State& state) {
  const auto b = state.range(0);
  const auto k = state.range(1);
  const Eigen::MatrixXd text = random_features(64, b, 4);
  const Eigen::MatrixXd image = random_features(64, b, 5);
  const Eigen::MatrixXd bank = random_features(64, k, 6);
  const auto labels = random_labels(static_cast<std::size_t>(b), 7);
  const auto bank_gazes = random_labels(static_cast<std::size_t>(k), 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gaze::mcr_total(text, image, labels, bank, bank_gazes,
                                             gaze::WeightingScheme::kClampedCos));
  }
}
BENCHMARK(BM_McrTotal)->Args({64, 0})->Args({64, 256});

void BM_TrainStep(benchmark::State& state) {
  gaze::TrainConfig config;
  config.negatives = static_cast<std::size_t>(state.range(0));
  const gaze::AnchorGrid grid(30, 30);
  gaze::ParameterSet params = gaze::init_parameters(config.model, 0, config.proxy_seed);
  const gaze::Dataset data = gaze::generate_dataset(config.batch_size, config.source, 0);

  gaze::Batch batch;
  batch.inputs = data.inputs;
  batch.labels = data.labels;
  for (const auto& g : data.labels) {
    batch.weights.push_back(gaze::spherical_bilinear_weights(g, grid));
  }
  gaze::NegativeBank bank = gaze::make_negative_bank(config.negatives, grid,
                                                     gaze::InterpolationScheme::kSphericalBilinear);
  const gaze::ObjectiveSettings settings{};
  for (auto _ : state) {
    params.zero_grad();
    benchmark::DoNotOptimize(gaze::forward_backward(params, grid, batch, bank, settings));
  }
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(256)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
