// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gaze/config.hpp"

namespace gaze {

enum class AblationAxis { kLossTerms, kInterpolation, kNegatives };

std::string to_string(AblationAxis axis);
/// Accepts "loss-terms", "interpolation" and "negatives".
AblationAxis parse_ablation_axis(const std::string& name);

struct AblationVariant {
  std::string label;
  TrainConfig config;
};

inline constexpr std::size_t kDefaultNegativeCounts[] = {0, 64, 128, 256};

/// Variants along one axis, everything else taken from `base`.
/// loss-terms: Gaze, MCR+Gaze, Geo+MCR+Gaze. interpolation: global, planar,
/// spherical. negatives: one variant per entry of `negative_counts`.
std::vector<AblationVariant> ablation_variants(
    AblationAxis axis, const TrainConfig& base,
    std::span<const std::size_t> negative_counts = kDefaultNegativeCounts);

struct AblationRun {
  std::uint64_t seed = 0;
  double src_err_deg = 0.0;
  double tgt_err_deg = 0.0;
  double tgt_spearman = 0.0;
};

struct VariantSummary {
  std::string label;
  std::vector<AblationRun> runs;
  double mean_tgt = 0.0;
  double std_tgt = 0.0;  // sample standard deviation
  double mean_src = 0.0;
  double mean_spearman = 0.0;
};

struct AblationOptions {
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::size_t spearman_pairs = 5000;
  std::uint64_t spearman_seed = 7;
  std::size_t workers = 1;  // concurrent training runs
};

using AblationProgress =
    std::function<void(const std::string& label, const AblationRun& run)>;

/// Trains every variant once per seed. The seed replaces config.seed
/// (initialization and shuffling); data_seed stays fixed so all runs see the
/// same data. Variants with identical configs are trained once and shared.
std::vector<VariantSummary> run_ablation(std::span<const AblationVariant> variants,
                                         const AblationOptions& options = {},
                                         const AblationProgress& progress = {});

/// sqrt of the mean of the two variances.
double pooled_std(const VariantSummary& a, const VariantSummary& b);

/// One row per variant: label,mean_tgt_err,std_tgt_err,mean_src_err,mean_spearman,seeds.
std::string ablation_csv(std::span<const VariantSummary> summaries);

}  // namespace gaze
