// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaze/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "gaze/encoders.hpp"
#include "gaze/model.hpp"

namespace gaze {

namespace {
enum : std::uint64_t { kStreamShuffle = 21 };
constexpr Eigen::Index kEvalBlock = 256;
}  // namespace

double lr_schedule(std::size_t step, std::size_t total_steps, std::size_t steps_per_epoch,
                   const TrainConfig& config) {
  if (step >= total_steps) fail(ErrorKind::kRange, "lr_schedule step past the end of training");
  const auto warmup = static_cast<std::size_t>(
      std::llround(config.warmup_epochs * static_cast<double>(steps_per_epoch)));
  if (step < warmup) {
    return config.lr * static_cast<double>(step) / static_cast<double>(warmup);
  }
  const double progress =
      static_cast<double>(step - warmup) / static_cast<double>(total_steps - warmup);
  return config.lr * 0.5 * (1.0 + std::cos(kPi * progress));
}

NesterovSgd::NesterovSgd(const ParameterSet& params, double momentum, double weight_decay,
                         bool nesterov)
    : momentum_(momentum), weight_decay_(weight_decay), nesterov_(nesterov) {
  for (const auto& t : params.tensors()) {
    velocity_.push_back(Eigen::MatrixXd::Zero(t.value.rows(), t.value.cols()));
  }
}

void NesterovSgd::step(ParameterSet& params, double lr) {
  auto& tensors = params.tensors();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    Tensor& t = tensors[i];
    if (!t.trainable) continue;
    if (weight_decay_ > 0.0) t.value -= (lr * weight_decay_) * t.value;
    Eigen::MatrixXd& v = velocity_[i];
    v = momentum_ * v + t.grad;
    if (nesterov_) {
      t.value -= lr * (t.grad + momentum_ * v);
    } else {
      t.value -= lr * v;
    }
  }
}

std::string MetricsLog::to_csv() const {
  std::ostringstream out;
  out << "epoch,geo,mcr_t2i,mcr_i2t,gaze,total,lr,src_err_deg,tgt_err_deg\n";
  char line[512];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%zu,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  r.epoch, r.loss.geo, r.loss.mcr_t2i, r.loss.mcr_i2t, r.loss.gaze, r.loss.total,
                  r.lr, r.src_err_deg, r.tgt_err_deg);
    out << line;
  }
  return out.str();
}

bool same_metrics(const MetricsLog& a, const MetricsLog& b) {
  if (a.rows.size() != b.rows.size()) return false;
  auto same = [](double x, double y) {
    return x == y || (std::isnan(x) && std::isnan(y));
  };
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& x = a.rows[i];
    const auto& y = b.rows[i];
    if (x.epoch != y.epoch || !same(x.loss.geo, y.loss.geo) ||
        !same(x.loss.mcr_t2i, y.loss.mcr_t2i) || !same(x.loss.mcr_i2t, y.loss.mcr_i2t) ||
        !same(x.loss.gaze, y.loss.gaze) || !same(x.loss.total, y.loss.total) ||
        !same(x.lr, y.lr) || !same(x.src_err_deg, y.src_err_deg) ||
        !same(x.tgt_err_deg, y.tgt_err_deg)) {
      return false;
    }
  }
  return true;
}

Dataset make_source_dataset(const TrainConfig& config) {
  return generate_dataset(config.n_source, config.source, config.data_seed,
                          config.model.input_dim, config.nuisance_coupling);
}

Dataset make_target_dataset(const TrainConfig& config) {
  return generate_dataset(config.n_target, config.target, config.data_seed,
                          config.model.input_dim, config.nuisance_coupling);
}

TrainResult train(const TrainConfig& config, const Dataset& source, const Dataset* target,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (source.inputs.rows() != static_cast<Eigen::Index>(config.model.input_dim)) {
    fail(ErrorKind::kShape, "source inputs do not match the configured input dimension");
  }
  const auto started = std::chrono::steady_clock::now();
  const AnchorGrid grid(config.model.yaw_step, config.model.pitch_step);

  TrainResult result{init_parameters(config.model, config.seed, config.proxy_seed), {}};
  ParameterSet& params = result.params;

  const ObjectiveSettings settings{
      {config.lambda_geo, config.lambda_mcr, config.lambda_gaze},
      config.weighting,
      config.temperature,
  };
  const bool use_text = config.lambda_mcr > 0.0;

  std::vector<InterpolationWeights> sample_weights;
  if (use_text) {
    sample_weights.reserve(source.size());
    for (const auto& g : source.labels) {
      sample_weights.push_back(interpolation_weights(config.interpolation, g, grid));
    }
  }
  // The interpolation setting applies to the batch prompts; global negatives
  // always use the spherical scheme. Literal global weights are singular at
  // bank directions whose cosine sum over the grid vanishes.
  NegativeBank bank = make_negative_bank(use_text ? config.negatives : 0, grid,
                                         InterpolationScheme::kSphericalBilinear);

  NesterovSgd optimizer(params, config.momentum, config.weight_decay, config.nesterov);

  const std::size_t n = source.size();
  const std::size_t steps_per_epoch = (n + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = steps_per_epoch * config.epochs;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(derive_seed(config.seed, kStreamShuffle));

  std::size_t global_step = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    LossBreakdown sum;
    double lr = 0.0;
    for (std::size_t s = 0; s < steps_per_epoch; ++s, ++global_step) {
      const std::size_t begin = s * config.batch_size;
      const std::size_t end = std::min(n, begin + config.batch_size);
      Batch batch;
      batch.inputs.resize(source.inputs.rows(), static_cast<Eigen::Index>(end - begin));
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t k = order[i];
        batch.inputs.col(static_cast<Eigen::Index>(i - begin)) =
            source.inputs.col(static_cast<Eigen::Index>(k));
        batch.labels.push_back(source.labels[k]);
        if (use_text) batch.weights.push_back(sample_weights[k]);
      }
      if (!use_text) batch.weights.resize(batch.labels.size());

      params.zero_grad();
      const LossBreakdown loss = forward_backward(params, grid, batch, bank, settings);
      if (!std::isfinite(loss.total)) {
        char msg[256];
        std::snprintf(msg, sizeof(msg),
                      "non-finite loss at step %zu (geo=%g mcr_t2i=%g mcr_i2t=%g gaze=%g)",
                      global_step, loss.geo, loss.mcr_t2i, loss.mcr_i2t, loss.gaze);
        fail(ErrorKind::kNonFinite, msg);
      }
      lr = lr_schedule(global_step, total_steps, steps_per_epoch, config);
      optimizer.step(params, lr);

      sum.geo += loss.geo;
      sum.mcr_t2i += loss.mcr_t2i;
      sum.mcr_i2t += loss.mcr_i2t;
      sum.gaze += loss.gaze;
      sum.total += loss.total;
    }
    const double inv = 1.0 / static_cast<double>(steps_per_epoch);
    EpochMetrics row;
    row.epoch = epoch;
    row.loss = {sum.geo * inv, sum.mcr_t2i * inv, sum.mcr_i2t * inv, sum.gaze * inv,
                sum.total * inv};
    row.lr = lr;
    row.src_err_deg = evaluate(params, source, config.workers);
    row.tgt_err_deg = target != nullptr ? evaluate(params, *target, config.workers)
                                        : std::numeric_limits<double>::quiet_NaN();
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.log.rows.push_back(row);
    if (on_epoch) on_epoch(row);
  }
  return result;
}

double mean_angular_error(std::span<const GazeVector> predictions,
                          std::span<const GazeVector> labels) {
  if (predictions.size() != labels.size() || labels.empty()) {
    fail(ErrorKind::kShape, "predictions and labels must be non-empty and equally long");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) total += angular_error(predictions[i], labels[i]);
  return total / static_cast<double>(labels.size());
}

double evaluate(const ParameterSet& params, const Dataset& data, std::size_t workers) {
  const auto n = static_cast<Eigen::Index>(data.size());
  if (n == 0) fail(ErrorKind::kEmptyRequest, "cannot evaluate on an empty dataset");
  std::vector<double> errors(static_cast<std::size_t>(n));
  const Eigen::Index blocks = (n + kEvalBlock - 1) / kEvalBlock;

  // Blocks are fixed-size regardless of worker count, so every sample sees the
  // same arithmetic.
  auto run_block = [&](Eigen::Index blk) {
    const Eigen::Index begin = blk * kEvalBlock;
    const Eigen::Index count = std::min(kEvalBlock, n - begin);
    const auto preds = predict(params, data.inputs.middleCols(begin, count));
    for (Eigen::Index i = 0; i < count; ++i) {
      const auto k = static_cast<std::size_t>(begin + i);
      errors[k] = angular_error(preds[static_cast<std::size_t>(i)], data.labels[k]);
    }
  };

  const std::size_t threads = std::min<std::size_t>(std::max<std::size_t>(workers, 1),
                                                    static_cast<std::size_t>(blocks));
  if (threads <= 1) {
    for (Eigen::Index blk = 0; blk < blocks; ++blk) run_block(blk);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(threads);
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (auto blk = static_cast<Eigen::Index>(w); blk < blocks;
               blk += static_cast<Eigen::Index>(threads)) {
            run_block(blk);
          }
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }
  double total = 0.0;
  for (double e : errors) total += e;
  return total / static_cast<double>(n);
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    fail(ErrorKind::kShape, "spearman needs two equally long samples of size >= 2");
  }
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double mean = 0.5 * static_cast<double>(x.size() + 1);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double a = rx[i] - mean;
    const double b = ry[i] - mean;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx == 0.0 || syy == 0.0) {
    fail(ErrorKind::kUndefinedRank, "rank correlation is undefined for a constant sample");
  }
  return sxy / std::sqrt(sxx * syy);
}

double feature_label_correlation(const Eigen::MatrixXd& features,
                                 std::span<const GazeVector> labels, std::size_t n_pairs,
                                 std::uint64_t seed) {
  if (n_pairs < 100) fail(ErrorKind::kConfiguration, "need at least 100 sample pairs");
  const std::size_t n = labels.size();
  if (static_cast<std::size_t>(features.cols()) != n || n < 2) {
    fail(ErrorKind::kShape, "features and labels disagree in count");
  }
  const Normalized f = normalize_columns(features, "feature correlation");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> feat_dist, label_dist;
  feat_dist.reserve(n_pairs);
  label_dist.reserve(n_pairs);
  while (feat_dist.size() < n_pairs) {
    const std::size_t i = pick(rng);
    const std::size_t j = pick(rng);
    if (i == j) continue;
    feat_dist.push_back(1.0 - f.unit.col(static_cast<Eigen::Index>(i))
                                  .dot(f.unit.col(static_cast<Eigen::Index>(j))));
    label_dist.push_back(angular_error(labels[i], labels[j]));
  }
  return spearman(feat_dist, label_dist);
}

double feature_label_correlation(const ParameterSet& params, const Dataset& data,
                                 std::size_t n_pairs, std::uint64_t seed) {
  return feature_label_correlation(image_features(params, data.inputs), data.labels, n_pairs,
                                   seed);
}

}  // namespace gaze
