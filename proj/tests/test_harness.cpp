// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "gaze/ablation.hpp"
#include "gaze/config.hpp"
#include "gaze/dataset.hpp"
#include "gaze/encoders.hpp"
#include "gaze/model.hpp"
#include "gaze/train.hpp"
#include "oracle_values.hpp"
#include "support.hpp"

using namespace gaze;
using test::near;

namespace {

// A run small enough for unit tests.
TrainConfig small_config() {
  TrainConfig c;
  c.epochs = 3;
  c.warmup_epochs = 1.0;
  c.n_source = 512;
  c.n_target = 256;
  c.negatives = 32;
  return c;
}

}  // namespace

TEST_CASE("dataset generation is seeded") {
  const DomainSpec d{0, 0.0, 1.0, 0.01};
  const Dataset a = generate_dataset(200, d, 5);
  const Dataset b = generate_dataset(200, d, 5);
  const Dataset c = generate_dataset(200, d, 6);
  CHECK(a.inputs == b.inputs);
  REQUIRE(a.labels.size() == 200);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.labels[i].vec() == b.labels[i].vec());
  CHECK_FALSE(a.inputs == c.inputs);
  CHECK(test::error_kind_of([&] { generate_dataset(0, d, 5); }) == ErrorKind::kEmptyRequest);
}

TEST_CASE("without nuisance and noise the input is a fixed function of gaze") {
  const DomainSpec d{3, 0.0, 0.0, 0.0};
  const Dataset data = generate_dataset(50, d, 9);
  const Mechanism m = make_mechanism(9, 32);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd expect = (m.gaze_map * data.labels[i].vec()).array().tanh();
    CHECK((data.inputs.col(static_cast<Eigen::Index>(i)) - expect).cwiseAbs().maxCoeff() <
          1e-15);
  }
}

TEST_CASE("labels stay inside the front patch") {
  const Dataset data = generate_dataset(5000, DomainSpec{}, 1);
  for (const auto& g : data.labels) {
    const YawPitch yp = vec_to_yawpitch(g);
    CHECK(std::abs(yp.yaw) <= kLabelMaxYaw + 1e-9);
    CHECK(std::abs(yp.pitch) <= kLabelMaxPitch + 1e-9);
  }
}

TEST_CASE("source and target domains differ in input mean") {
  const TrainConfig c;
  const Dataset src = generate_dataset(10000, c.source, 0);
  const Dataset tgt = generate_dataset(10000, c.target, 0);
  const Eigen::VectorXd shift = src.inputs.rowwise().mean() - tgt.inputs.rowwise().mean();
  CHECK(shift.norm() > 0.1);
}

TEST_CASE("learning-rate schedule matches the reference values") {
  TrainConfig c;
  const std::size_t per_epoch = 64;
  const std::size_t total = per_epoch * c.epochs;
  for (const auto& [step, lr] : oracle::kLrSchedule) {
    CHECK(near(lr_schedule(static_cast<std::size_t>(step), total, per_epoch, c), lr, 1e-15));
  }
  CHECK(test::error_kind_of([&] { lr_schedule(total, total, per_epoch, c); }) ==
        ErrorKind::kRange);
}

TEST_CASE("mean angular error examples") {
  const std::vector<GazeVector> labels{GazeVector::normalized({0, 0, 1}),
                                       GazeVector::normalized({1, 0, 0})};
  CHECK(mean_angular_error(labels, labels) == 0.0);
  const std::vector<GazeVector> flipped{GazeVector::normalized({0, 0, -1}),
                                        GazeVector::normalized({-1, 0, 0})};
  CHECK(near(mean_angular_error(flipped, labels), 180.0, 1e-12));
  CHECK(test::error_kind_of([&] {
          mean_angular_error(std::span<const GazeVector>(labels).first(1), labels);
        }) == ErrorKind::kShape);
}

TEST_CASE("a constant forward predictor scores the patch mean angle") {
  ParameterSet p = init_parameters(ModelConfig{}, 0, 1234);
  p.at(param::kRegW).value.setZero();
  p.at(param::kRegB).value = Eigen::Vector3d(0, 0, 1);
  const Dataset data = generate_dataset(4096, DomainSpec{}, 3);
  const double err = evaluate(p, data);

  const GazeVector fwd = GazeVector::normalized({0, 0, 1});
  double sum = 0.0, sq = 0.0;
  for (const auto& g : data.labels) {
    const double a = angular_error(fwd, g);
    sum += a;
    sq += a * a;
  }
  const double n = static_cast<double>(data.size());
  CHECK(near(err, sum / n, 1e-9));
  const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
  CHECK(std::abs(err - oracle::kPatchMeanAngleToForwardDeg) < 3.0 * sd / std::sqrt(n));
}

TEST_CASE("spearman examples") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> rev{5, 4, 3, 2, 1};
  const std::vector<double> flat{2, 2, 2, 2, 2};
  CHECK(near(spearman(x, x), 1.0, 1e-15));
  CHECK(near(spearman(x, rev), -1.0, 1e-15));
  CHECK(test::error_kind_of([&] { spearman(x, flat); }) == ErrorKind::kUndefinedRank);
  const std::vector<double> a{1, 2, 2, 3};
  const std::vector<double> b{1, 2, 3, 4};
  CHECK(near(spearman(a, b), oracle::kSpearmanTies, 1e-14));
  CHECK(test::error_kind_of([&] { spearman(a, x); }) == ErrorKind::kShape);
}

TEST_CASE("feature-label correlation") {
  const Dataset data = generate_dataset(2000, DomainSpec{}, 4);
  Eigen::MatrixXd labels_as_features(3, static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    labels_as_features.col(static_cast<Eigen::Index>(i)) = data.labels[i].vec();
  }
  CHECK(near(feature_label_correlation(labels_as_features, data.labels, 5000, 7), 1.0, 1e-12));

  std::mt19937_64 rng(11);
  Eigen::MatrixXd noise = test::random_matrix(16, labels_as_features.cols(), rng);
  noise.colwise().normalize();
  CHECK(std::abs(feature_label_correlation(noise, data.labels, 5000, 7)) < 0.1);

  CHECK(test::error_kind_of([&] {
          feature_label_correlation(noise, data.labels, 99, 7);
        }) == ErrorKind::kConfiguration);
}

TEST_CASE("training is deterministic and evaluation ignores the worker count") {
  const TrainConfig c = small_config();
  const Dataset src = make_source_dataset(c);
  const Dataset tgt = make_target_dataset(c);
  const TrainResult a = train(c, src, &tgt);
  const TrainResult b = train(c, src, &tgt);
  CHECK(a.params == b.params);
  CHECK(same_metrics(a.log, b.log));
  CHECK(a.log.to_csv() == b.log.to_csv());
  REQUIRE(a.log.rows.size() == c.epochs);
  for (std::size_t e = 0; e < c.epochs; ++e) CHECK(a.log.rows[e].epoch == e + 1);

  const double one = evaluate(a.params, tgt, 1);
  CHECK(evaluate(a.params, tgt, 3) == one);
  CHECK(near(one, a.log.rows.back().tgt_err_deg, 0.0));

  TrainConfig other = c;
  other.seed = 1;
  CHECK_FALSE(train(other, src).params == a.params);
}

TEST_CASE("metrics CSV layout") {
  const TrainConfig c = small_config();
  const TrainResult r = train(c, make_source_dataset(c));
  std::istringstream in(r.log.to_csv());
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,geo,mcr_t2i,mcr_i2t,gaze,total,lr,src_err_deg,tgt_err_deg");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == c.epochs);
}

TEST_CASE("default training lowers the loss for five seeds and keeps the proxy frozen") {
  TrainConfig c;
  const Dataset src = make_source_dataset(c);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    CAPTURE(seed);
    c.seed = seed;
    const TrainResult r = train(c, src);
    REQUIRE(r.log.rows.size() == c.epochs);
    CHECK(r.log.rows.back().loss.total < r.log.rows.front().loss.total);

    const ParameterSet init = init_parameters(c.model, seed, c.proxy_seed);
    for (const auto& t : init.tensors()) {
      if (!t.trainable) CHECK(r.params.value(t.name) == t.value);
    }
  }
}

TEST_CASE("gaze-only training fits the source domain") {
  TrainConfig c;
  c.lambda_geo = 0.0;
  c.lambda_mcr = 0.0;
  const TrainResult r = train(c, make_source_dataset(c));
  const double err = r.log.rows.back().src_err_deg;
  CHECK(err < 5.0);
  CHECK(near(err, 3.25, 1.0));
}

TEST_CASE("config JSON round trip and error paths") {
  TrainConfig c;
  c.lr = 0.0123;
  c.weighting = WeightingScheme::kDistance;
  c.interpolation = InterpolationScheme::kPlanarBilinear;
  c.target.nuisance_mean = 0.3;
  c.seed = 42;
  const TrainConfig back = config_from_json(to_json(c));
  CHECK(to_json(back).dump() == to_json(c).dump());

  auto message = [](const char* doc) {
    try {
      config_from_json(nlohmann::json::parse(doc));
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kConfiguration);
      return std::string(e.what());
    }
    FAIL("config was accepted");
    return std::string();
  };
  CHECK(message(R"({"lr": "fast"})").find("/lr") != std::string::npos);
  CHECK(message(R"({"bogus": 1})").find("/bogus") != std::string::npos);
  CHECK(message(R"({"target_domain": {"obs_noise": -1}})").find("/target_domain") !=
        std::string::npos);
  CHECK(message(R"({"weighting": "cosine"})").find("/weighting") != std::string::npos);
  CHECK(message(R"({"epochs": 0})").find("epochs") != std::string::npos);
  CHECK(message(R"({"yaw_step": 7})").size() > 0);
}

TEST_CASE("derive_seed separates streams") {
  CHECK(derive_seed(0, 1) == derive_seed(0, 1));
  CHECK(derive_seed(0, 1) != derive_seed(0, 2));
  CHECK(derive_seed(0, 1) != derive_seed(1, 1));
  CHECK(derive_seed(1ull << 32, 0) != derive_seed(0, 0));
}

TEST_CASE("ablation variants and CSV") {
  const TrainConfig base;
  const auto loss = ablation_variants(AblationAxis::kLossTerms, base);
  REQUIRE(loss.size() == 3);
  CHECK(loss[0].label == "Gaze");
  CHECK(loss[0].config.lambda_geo == 0.0);
  CHECK(loss[0].config.lambda_mcr == 0.0);
  CHECK(loss[1].label == "MCR+Gaze");
  CHECK(loss[1].config.lambda_geo == 0.0);
  CHECK(loss[2].label == "Geo+MCR+Gaze");

  const auto interp = ablation_variants(AblationAxis::kInterpolation, base);
  REQUIRE(interp.size() == 3);
  CHECK(interp[0].config.interpolation == InterpolationScheme::kGlobalLinear);
  CHECK(interp[2].config.interpolation == InterpolationScheme::kSphericalBilinear);

  const auto k = ablation_variants(AblationAxis::kNegatives, base);
  REQUIRE(k.size() == 4);
  CHECK(k[1].label == "K=64");
  CHECK(k[1].config.negatives == 64);

  CHECK(parse_ablation_axis("K") == AblationAxis::kNegatives);
  CHECK(test::error_kind_of([] { parse_ablation_axis("depth"); }) == ErrorKind::kConfiguration);

  VariantSummary a{"x", {}, 1.0, 0.3, 2.0, 0.5};
  VariantSummary b{"y", {}, 1.0, 0.4, 2.0, 0.5};
  CHECK(near(pooled_std(a, b), std::sqrt(0.125), 1e-15));
  const std::vector<VariantSummary> rows{a};
  CHECK(ablation_csv(rows).rfind("label,mean_tgt_err,std_tgt_err,mean_src_err,mean_spearman,seeds\n",
                                 0) == 0);
}

TEST_CASE("run_ablation trains each distinct configuration once") {
  TrainConfig base = small_config();
  base.epochs = 2;
  const std::size_t counts[] = {0, 16, 0};
  const auto variants = ablation_variants(AblationAxis::kNegatives, base, counts);
  AblationOptions opt;
  opt.seeds = {0, 1};
  opt.spearman_pairs = 200;
  std::size_t calls = 0;
  const auto out = run_ablation(variants, opt, [&](const std::string&, const AblationRun&) {
    ++calls;
  });
  CHECK(calls == 4);
  REQUIRE(out.size() == 3);
  for (std::size_t s = 0; s < 2; ++s) {
    CHECK(out[0].runs[s].tgt_err_deg == out[2].runs[s].tgt_err_deg);
    CHECK(out[0].runs[s].seed == s);
  }
  CHECK(out[0].std_tgt >= 0.0);

  opt.workers = 2;
  const auto parallel = run_ablation(variants, opt);
  for (std::size_t v = 0; v < 3; ++v) CHECK(parallel[v].mean_tgt == out[v].mean_tgt);
}
