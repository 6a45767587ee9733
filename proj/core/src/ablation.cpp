// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaze/ablation.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <thread>

#include "gaze/error.hpp"
#include "gaze/train.hpp"

namespace gaze {

std::string to_string(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::kLossTerms: return "loss-terms";
    case AblationAxis::kInterpolation: return "interpolation";
    case AblationAxis::kNegatives: return "negatives";
  }
  return "unknown";
}

AblationAxis parse_ablation_axis(const std::string& name) {
  if (name == "loss-terms" || name == "loss") return AblationAxis::kLossTerms;
  if (name == "interpolation") return AblationAxis::kInterpolation;
  if (name == "negatives" || name == "K" || name == "k") return AblationAxis::kNegatives;
  fail(ErrorKind::kConfiguration, "unknown ablation axis '" + name + "'");
}

std::vector<AblationVariant> ablation_variants(AblationAxis axis, const TrainConfig& base,
                                               std::span<const std::size_t> negative_counts) {
  std::vector<AblationVariant> out;
  switch (axis) {
    case AblationAxis::kLossTerms: {
      TrainConfig c = base;
      c.lambda_geo = 0.0;
      c.lambda_mcr = 0.0;
      out.push_back({"Gaze", c});
      c.lambda_mcr = base.lambda_mcr > 0.0 ? base.lambda_mcr : 1.0;
      out.push_back({"MCR+Gaze", c});
      c.lambda_geo = base.lambda_geo > 0.0 ? base.lambda_geo : 1.0;
      out.push_back({"Geo+MCR+Gaze", c});
      break;
    }
    case AblationAxis::kInterpolation:
      for (InterpolationScheme s :
           {InterpolationScheme::kGlobalLinear, InterpolationScheme::kPlanarBilinear,
            InterpolationScheme::kSphericalBilinear}) {
        TrainConfig c = base;
        c.interpolation = s;
        out.push_back({to_string(s), c});
      }
      break;
    case AblationAxis::kNegatives:
      for (std::size_t k : negative_counts) {
        TrainConfig c = base;
        c.negatives = k;
        out.push_back({"K=" + std::to_string(k), c});
      }
      break;
  }
  return out;
}

namespace {

struct Job {
  std::string key;
  TrainConfig config;
  std::string label;
};

AblationRun run_one(const TrainConfig& config, const AblationOptions& options) {
  const Dataset source = make_source_dataset(config);
  const Dataset target = make_target_dataset(config);
  const TrainResult result = train(config, source, nullptr);
  AblationRun run;
  run.seed = config.seed;
  run.src_err_deg = evaluate(result.params, source);
  run.tgt_err_deg = evaluate(result.params, target);
  run.tgt_spearman = feature_label_correlation(result.params, target, options.spearman_pairs,
                                               options.spearman_seed);
  return run;
}

}  // namespace

std::vector<VariantSummary> run_ablation(std::span<const AblationVariant> variants,
                                         const AblationOptions& options,
                                         const AblationProgress& progress) {
  if (options.seeds.empty()) fail(ErrorKind::kConfiguration, "ablation needs at least one seed");
  if (options.workers == 0) fail(ErrorKind::kConfiguration, "workers must be positive");

  // Unique (config, seed) jobs in first-seen order.
  std::vector<Job> jobs;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<std::size_t>> slots(variants.size());
  for (std::size_t v = 0; v < variants.size(); ++v) {
    for (std::uint64_t seed : options.seeds) {
      TrainConfig c = variants[v].config;
      c.seed = seed;
      c.workers = 1;
      c.validate();
      std::string key = to_json(c).dump();
      auto [it, inserted] = index.emplace(key, jobs.size());
      if (inserted) jobs.push_back({std::move(key), c, variants[v].label});
      slots[v].push_back(it->second);
    }
  }

  std::vector<AblationRun> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex report;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      results[j] = run_one(jobs[j].config, options);
      if (progress) {
        std::lock_guard<std::mutex> lock(report);
        progress(jobs[j].label, results[j]);
      }
    }
  };
  const std::size_t n_threads = std::min(options.workers, jobs.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<VariantSummary> out;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    VariantSummary s;
    s.label = variants[v].label;
    for (std::size_t j : slots[v]) s.runs.push_back(results[j]);
    const double n = static_cast<double>(s.runs.size());
    for (const auto& r : s.runs) {
      s.mean_tgt += r.tgt_err_deg / n;
      s.mean_src += r.src_err_deg / n;
      s.mean_spearman += r.tgt_spearman / n;
    }
    if (s.runs.size() > 1) {
      double ss = 0.0;
      for (const auto& r : s.runs) ss += (r.tgt_err_deg - s.mean_tgt) * (r.tgt_err_deg - s.mean_tgt);
      s.std_tgt = std::sqrt(ss / (n - 1.0));
    }
    out.push_back(std::move(s));
  }
  return out;
}

double pooled_std(const VariantSummary& a, const VariantSummary& b) {
  return std::sqrt(0.5 * (a.std_tgt * a.std_tgt + b.std_tgt * b.std_tgt));
}

std::string ablation_csv(std::span<const VariantSummary> summaries) {
  std::string out = "label,mean_tgt_err,std_tgt_err,mean_src_err,mean_spearman,seeds\n";
  char buf[256];
  for (const auto& s : summaries) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.6f,%zu\n", s.label.c_str(), s.mean_tgt,
                  s.std_tgt, s.mean_src, s.mean_spearman, s.runs.size());
    out += buf;
  }
  return out;
}

}  // namespace gaze
