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
#include "gaze/dataset.hpp"
#include "gaze/losses.hpp"
#include "gaze/params.hpp"

namespace gaze {

/// Linear warm-up from 0 over warmup_epochs worth of steps, then cosine
/// annealing to 0 over the remaining steps.
double lr_schedule(std::size_t step, std::size_t total_steps, std::size_t steps_per_epoch,
                   const TrainConfig& config);

/// SGD with Nesterov momentum and decoupled weight decay on trainable tensors.
class NesterovSgd {
 public:
  NesterovSgd(const ParameterSet& params, double momentum, double weight_decay, bool nesterov);
  void step(ParameterSet& params, double lr);

 private:
  std::vector<Eigen::MatrixXd> velocity_;
  double momentum_;
  double weight_decay_;
  bool nesterov_;
};

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  LossBreakdown loss;     // mean over the epoch's steps
  double lr = 0.0;        // rate used by the epoch's last step
  double src_err_deg = 0.0;
  double tgt_err_deg = 0.0;
  double wall_seconds = 0.0;
};

struct MetricsLog {
  std::vector<EpochMetrics> rows;

  /// Header: epoch,geo,mcr_t2i,mcr_i2t,gaze,total,lr,src_err_deg,tgt_err_deg.
  /// Wall-clock is kept out of the CSV so identical runs produce identical files.
  std::string to_csv() const;
};

/// Bitwise comparison of everything except wall-clock.
bool same_metrics(const MetricsLog& a, const MetricsLog& b);

struct TrainResult {
  ParameterSet params;
  MetricsLog log;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// The synthetic source and target domains described by a config.
Dataset make_source_dataset(const TrainConfig& config);
Dataset make_target_dataset(const TrainConfig& config);

/// Trains on `source`; `target` (optional) is only evaluated for the log.
TrainResult train(const TrainConfig& config, const Dataset& source, const Dataset* target = nullptr,
                  const EpochCallback& on_epoch = {});

/// Mean angular error in degrees. Per-sample errors are reduced in index
/// order, so the result does not depend on `workers`.
double evaluate(const ParameterSet& params, const Dataset& data, std::size_t workers = 1);

/// Mean angular error of fixed predictions against labels, in degrees.
double mean_angular_error(std::span<const GazeVector> predictions,
                          std::span<const GazeVector> labels);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

/// Spearman correlation between feature cosine distance and label angular
/// distance over n_pairs random sample pairs.
double feature_label_correlation(const Eigen::MatrixXd& features,
                                 std::span<const GazeVector> labels, std::size_t n_pairs,
                                 std::uint64_t seed);
double feature_label_correlation(const ParameterSet& params, const Dataset& data,
                                 std::size_t n_pairs, std::uint64_t seed);

}  // namespace gaze
