// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaze/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <limits>
#include <optional>
#include <random>

#include "gaze/anchors.hpp"
#include "gaze/encoders.hpp"
#include "gaze/losses.hpp"
#include "gaze/model.hpp"
#include "gaze/normalize.hpp"

namespace gaze {

Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd grad(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + h;
    const double up = f(probe);
    probe(i) = x(i) - h;
    const double down = f(probe);
    probe(i) = x(i);
    grad(i) = (up - down) / (2.0 * h);
  }
  return grad;
}

double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
  const double scale = std::max({analytic.norm(), numeric.norm(), 1e-12});
  return (analytic - numeric).norm() / scale;
}

Eigen::VectorXd flatten_trainable(const ParameterSet& params, bool gradients) {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(params.trainable_count()));
  Eigen::Index k = 0;
  for (const auto& t : params.tensors()) {
    if (!t.trainable) continue;
    const Eigen::MatrixXd& m = gradients ? t.grad : t.value;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) flat(k++) = m(r, c);
    }
  }
  return flat;
}

void assign_trainable(ParameterSet& params, const Eigen::VectorXd& flat) {
  if (flat.size() != static_cast<Eigen::Index>(params.trainable_count())) {
    fail(ErrorKind::kShape, "flat parameter vector has the wrong length");
  }
  Eigen::Index k = 0;
  for (auto& t : params.tensors()) {
    if (!t.trainable) continue;
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.value.cols(); ++c) t.value(r, c) = flat(k++);
    }
  }
}

GradcheckTarget parse_gradcheck_target(const std::string& name) {
  if (name == "loss") return GradcheckTarget::kLoss;
  if (name == "encoder") return GradcheckTarget::kEncoder;
  if (name == "all") return GradcheckTarget::kAll;
  fail(ErrorKind::kConfiguration, "unknown gradcheck target '" + name + "'");
}

namespace {

using Rng = std::mt19937_64;

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = normal(rng);
  }
  return m;
}

GazeVector random_direction(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    const Eigen::Vector3d v(normal(rng), normal(rng), normal(rng));
    if (v.norm() > 1e-3) return GazeVector::normalized(v);
  }
}

// Front-facing directions like the synthetic labels.
GazeVector random_label(Rng& rng) {
  std::uniform_real_distribution<double> yaw(-90.0, 90.0);
  std::uniform_real_distribution<double> pitch(-60.0, 60.0);
  return yawpitch_to_vec({yaw(rng), pitch(rng)});
}

Eigen::VectorXd flat(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

Eigen::MatrixXd unflat(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

// Minimum |cos(A_i, A_j) - cos(g_i, g_j)| over off-diagonal pairs; finite
// differences are only meaningful away from the |.| kink.
double geo_kink_gap(std::span<const GazeVector> gazes, const Eigen::MatrixXd& emb) {
  const Eigen::MatrixXd ce = cosine_matrix(emb);
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ce.rows(); ++i) {
    for (Eigen::Index j = 0; j < ce.cols(); ++j) {
      if (i == j) continue;
      const double cg = gazes[static_cast<std::size_t>(i)].dot(gazes[static_cast<std::size_t>(j)]);
      gap = std::min(gap, std::abs(ce(i, j) - cg));
    }
  }
  return gap;
}

constexpr double kKinkMargin = 1e-4;

// One random problem: returns the relative error, or nullopt to resample.
using Trial = std::function<std::optional<double>(Rng&, const GradcheckOptions&)>;

GradcheckResult run_check(const std::string& name, std::uint64_t stream, const Trial& trial,
                          const GradcheckOptions& opt) {
  Rng rng(derive_seed(opt.seed, stream));
  GradcheckResult res;
  res.name = name;
  std::size_t attempts = 0;
  while (res.configurations < opt.configurations) {
    if (++attempts > 20 * opt.configurations + 100) {
      fail(ErrorKind::kSingular, "gradcheck '" + name + "' could not sample valid configurations");
    }
    const std::optional<double> err = trial(rng, opt);
    if (!err) continue;
    res.worst_relative_error = std::max(res.worst_relative_error, *err);
    ++res.configurations;
  }
  res.passed = res.worst_relative_error < opt.tolerance;
  return res;
}

std::optional<double> geo_trial(Rng& rng, const GradcheckOptions& opt) {
  constexpr Eigen::Index kN = 6, kD = 4;
  std::vector<GazeVector> gazes;
  for (Eigen::Index i = 0; i < kN; ++i) gazes.push_back(random_direction(rng));
  const Eigen::MatrixXd emb = random_matrix(kN, kD, 1.0, rng);
  if (geo_kink_gap(gazes, emb) < kKinkMargin) return std::nullopt;
  const GeoLoss analytic = geo_loss(gazes, emb);
  const Eigen::VectorXd numeric = central_difference(
      [&](const Eigen::VectorXd& x) { return geo_loss(gazes, unflat(x, kN, kD)).loss; },
      flat(emb), opt.step);
  return relative_error(flat(analytic.grad), numeric);
}

std::optional<double> gaze_trial(Rng& rng, const GradcheckOptions& opt) {
  constexpr Eigen::Index kB = 3;
  std::vector<GazeVector> labels;
  for (Eigen::Index i = 0; i < kB; ++i) labels.push_back(random_direction(rng));
  const Eigen::MatrixXd raw = random_matrix(3, kB, 1.0, rng);
  for (Eigen::Index i = 0; i < kB; ++i) {
    const double c = raw.col(i).normalized().dot(labels[static_cast<std::size_t>(i)].vec());
    if (std::abs(c) > 1.0 - 1e-3) return std::nullopt;
  }
  const GazeLoss analytic = gaze_loss(raw, labels);
  const Eigen::VectorXd numeric = central_difference(
      [&](const Eigen::VectorXd& x) { return gaze_loss(unflat(x, 3, kB), labels).loss; },
      flat(raw), opt.step);
  return relative_error(flat(analytic.d_raw), numeric);
}

enum class McrDirection { kT2I, kI2T, kTotal };

// Smallest |denominator| / sum|terms| over anchors of both directions. Under
// literal-cos weighting a denominator near zero makes the loss so steep that
// central differences stop being a reliable oracle.
double denominator_conditioning(const Eigen::MatrixXd& text, const Eigen::MatrixXd& image,
                                const Eigen::MatrixXd& bank, std::span<const GazeVector> labels,
                                std::span<const GazeVector> bank_gazes, WeightingScheme scheme,
                                double tau) {
  auto unit = [](const Eigen::MatrixXd& m) { return m.colwise().normalized().eval(); };
  const Eigen::MatrixXd t = unit(text), g = unit(image);
  const Eigen::MatrixXd k = bank.cols() > 0 ? unit(bank) : bank;
  double worst = std::numeric_limits<double>::infinity();
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::MatrixXd& a = pass == 0 ? t : g;
    const Eigen::MatrixXd& b = pass == 0 ? g : t;
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
      const auto ui = static_cast<std::size_t>(i);
      double sum = std::exp(a.col(i).dot(b.col(i)) / tau);
      double mag = sum;
      for (Eigen::Index j = 0; j < b.cols(); ++j) {
        if (j == i) continue;
        const double term = neg_weight(labels[ui], labels[static_cast<std::size_t>(j)], scheme) *
                            std::exp(a.col(i).dot(b.col(j)) / tau);
        sum += term;
        mag += std::abs(term);
      }
      if (pass == 1) {
        for (Eigen::Index j = 0; j < k.cols(); ++j) {
          const double term = neg_weight(labels[ui], bank_gazes[static_cast<std::size_t>(j)], scheme) *
                              std::exp(a.col(i).dot(k.col(j)) / tau);
          sum += term;
          mag += std::abs(term);
        }
      }
      worst = std::min(worst, std::abs(sum) / mag);
    }
  }
  return worst;
}

constexpr double kMinConditioning = 0.05;

Trial mcr_trial(McrDirection dir, WeightingScheme scheme) {
  return [dir, scheme](Rng& rng, const GradcheckOptions& opt) -> std::optional<double> {
    constexpr Eigen::Index kB = 4, kD = 5, kK = 3;
    std::vector<GazeVector> labels, bank_gazes;
    for (Eigen::Index i = 0; i < kB; ++i) labels.push_back(random_label(rng));
    for (Eigen::Index i = 0; i < kK; ++i) bank_gazes.push_back(random_direction(rng));
    std::uniform_real_distribution<double> tau_dist(0.3, 1.5);
    const double tau = tau_dist(rng);
    Eigen::VectorXd x(kD * (2 * kB + kK));
    x = flat(random_matrix(kD, 2 * kB + kK, 1.0, rng));

    auto split = [&](const Eigen::VectorXd& v) {
      const Eigen::MatrixXd all = unflat(v, kD, 2 * kB + kK);
      return std::tuple<Eigen::MatrixXd, Eigen::MatrixXd, Eigen::MatrixXd>(
          all.leftCols(kB), all.middleCols(kB, kB), all.rightCols(kK));
    };
    auto eval = [&](const Eigen::VectorXd& v) {
      const auto [text, image, bank] = split(v);
      switch (dir) {
        case McrDirection::kT2I: return mcr_t2i_loss(text, image, labels, scheme, tau);
        case McrDirection::kI2T:
          return mcr_i2t_loss(image, text, labels, bank, bank_gazes, scheme, tau);
        case McrDirection::kTotal:
          break;
      }
      return mcr_total(text, image, labels, bank, bank_gazes, scheme, tau);
    };

    {
      const auto [text, image, bank] = split(x);
      if (denominator_conditioning(text, image, bank, labels, bank_gazes, scheme, tau) <
          kMinConditioning) {
        return std::nullopt;
      }
    }
    McrLoss analytic;
    try {
      analytic = eval(x);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kNonpositiveDenominator) return std::nullopt;
      throw;
    }
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(kD, 2 * kB + kK);
    grad.leftCols(kB) = analytic.d_text;
    grad.middleCols(kB, kB) = analytic.d_image;
    if (analytic.d_bank.cols() == kK) grad.rightCols(kK) = analytic.d_bank;

    std::optional<Eigen::VectorXd> numeric;
    try {
      numeric = central_difference([&](const Eigen::VectorXd& v) { return eval(v).loss; }, x,
                                   opt.step);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kNonpositiveDenominator) return std::nullopt;
      throw;
    }
    return relative_error(flat(grad), *numeric);
  };
}

ModelConfig tiny_model() {
  ModelConfig m;
  m.input_dim = 6;
  m.hidden_dim = 5;
  m.feature_dim = 4;
  m.token_dim = 3;
  m.context_len = 3;
  m.yaw_step = 90.0;
  m.pitch_step = 90.0;
  return m;
}

// Parameters with every tensor redrawn at a scale where all nonlinearities matter.
ParameterSet random_parameters(const ModelConfig& m, Rng& rng) {
  ParameterSet p = init_parameters(m, rng(), rng());
  for (auto& t : p.tensors()) t.value = random_matrix(t.value.rows(), t.value.cols(), 0.6, rng);
  return p;
}

std::optional<double> text_trial(Rng& rng, const GradcheckOptions& opt) {
  const ModelConfig m = tiny_model();
  const ParameterSet p = random_parameters(m, rng);
  const auto tok = static_cast<Eigen::Index>(m.token_dim);
  const auto ctx_rows = static_cast<Eigen::Index>(m.context_len) - 1;
  constexpr Eigen::Index kM = 3;
  const Eigen::MatrixXd context = random_matrix(ctx_rows, tok, 1.0, rng);
  const Eigen::MatrixXd tokens = random_matrix(tok, kM, 1.0, rng);
  const Eigen::MatrixXd probe = random_matrix(static_cast<Eigen::Index>(m.feature_dim), kM, 1.0, rng);

  const TextForward fwd = text_forward(context, tokens, p);
  const TextBackward back = text_backward(fwd, probe, p);
  Eigen::VectorXd x(context.size() + tokens.size());
  x << flat(context), flat(tokens);
  Eigen::VectorXd analytic(x.size());
  analytic << flat(back.d_context), flat(back.d_tokens);

  const Eigen::VectorXd numeric = central_difference(
      [&](const Eigen::VectorXd& v) {
        const Eigen::MatrixXd c = unflat(v.head(context.size()), ctx_rows, tok);
        const Eigen::MatrixXd t = unflat(v.tail(tokens.size()), tok, kM);
        return text_forward(c, t, p).out.unit.cwiseProduct(probe).sum();
      },
      x, opt.step);
  return relative_error(analytic, numeric);
}

// Relative error restricted to the tensors whose names start with `prefix`.
double prefix_error(ParameterSet& p, const std::string& prefix,
                    const std::function<double(const ParameterSet&)>& loss, double h) {
  const Eigen::VectorXd analytic_all = flatten_trainable(p, true);
  const Eigen::VectorXd x = flatten_trainable(p);
  std::vector<Eigen::Index> coords;
  Eigen::Index k = 0;
  for (const auto& t : p.tensors()) {
    if (!t.trainable) continue;
    for (Eigen::Index i = 0; i < t.value.size(); ++i, ++k) {
      if (t.name.rfind(prefix, 0) == 0) coords.push_back(k);
    }
  }
  ParameterSet work = p;
  Eigen::VectorXd analytic(static_cast<Eigen::Index>(coords.size()));
  Eigen::VectorXd sub(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) {
    analytic(static_cast<Eigen::Index>(i)) = analytic_all(coords[i]);
    sub(static_cast<Eigen::Index>(i)) = x(coords[i]);
  }
  const Eigen::VectorXd numeric = central_difference(
      [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd full = x;
        for (std::size_t i = 0; i < coords.size(); ++i) {
          full(coords[i]) = v(static_cast<Eigen::Index>(i));
        }
        assign_trainable(work, full);
        return loss(work);
      },
      sub, h);
  return relative_error(analytic, numeric);
}

std::optional<double> image_trial(Rng& rng, const GradcheckOptions& opt) {
  const ModelConfig m = tiny_model();
  ParameterSet p = random_parameters(m, rng);
  const Eigen::MatrixXd inputs = random_matrix(static_cast<Eigen::Index>(m.input_dim), 4, 1.0, rng);
  const Eigen::MatrixXd probe =
      random_matrix(static_cast<Eigen::Index>(m.feature_dim), 4, 1.0, rng);
  p.zero_grad();
  image_backward(image_forward(inputs, p), probe, p);
  return prefix_error(
      p, "image.",
      [&](const ParameterSet& q) { return image_forward(inputs, q).out.unit.cwiseProduct(probe).sum(); },
      opt.step);
}

std::optional<double> regressor_trial(Rng& rng, const GradcheckOptions& opt) {
  const ModelConfig m = tiny_model();
  ParameterSet p = random_parameters(m, rng);
  constexpr Eigen::Index kB = 4;
  const Normalized f = normalize_columns(
      random_matrix(static_cast<Eigen::Index>(m.feature_dim), kB, 1.0, rng), "probe");
  std::vector<GazeVector> labels;
  for (Eigen::Index i = 0; i < kB; ++i) labels.push_back(random_direction(rng));
  const RegressorForward fwd = regressor_forward(f.unit, p);
  for (Eigen::Index i = 0; i < kB; ++i) {
    const double c = fwd.raw.col(i).normalized().dot(labels[static_cast<std::size_t>(i)].vec());
    if (std::abs(c) > 1.0 - 1e-3) return std::nullopt;
  }
  p.zero_grad();
  regressor_backward(fwd, gaze_loss(fwd.raw, labels).d_raw, p);
  return prefix_error(
      p, "regressor.",
      [&](const ParameterSet& q) { return gaze_loss(regressor_forward(f.unit, q).raw, labels).loss; },
      opt.step);
}

std::optional<double> objective_trial(Rng& rng, const GradcheckOptions& opt) {
  const ModelConfig m = tiny_model();
  const AnchorGrid grid(m.yaw_step, m.pitch_step);
  ParameterSet p = random_parameters(m, rng);
  if (geo_kink_gap(grid.gazes(), p.value(param::kAnchors)) < kKinkMargin) return std::nullopt;

  constexpr Eigen::Index kB = 4;
  constexpr std::size_t kK = 5;
  const std::array<WeightingScheme, 4> schemes{WeightingScheme::kLiteralCos,
                                               WeightingScheme::kClampedCos,
                                               WeightingScheme::kDistance,
                                               WeightingScheme::kUniform};
  std::uniform_int_distribution<std::size_t> pick(0, schemes.size() - 1);
  std::uniform_real_distribution<double> lam(0.2, 1.5);
  ObjectiveSettings s;
  s.weights = {lam(rng), lam(rng), lam(rng)};
  s.weighting = schemes[pick(rng)];
  s.temperature = lam(rng);

  Batch batch;
  batch.inputs = random_matrix(static_cast<Eigen::Index>(m.input_dim), kB, 1.0, rng);
  for (Eigen::Index i = 0; i < kB; ++i) {
    batch.labels.push_back(random_label(rng));
    batch.weights.push_back(spherical_bilinear_weights(batch.labels.back(), grid));
  }
  NegativeBank bank = make_negative_bank(kK, grid, InterpolationScheme::kSphericalBilinear);
  {
    const Eigen::MatrixXd& context = p.value(param::kContext);
    const Eigen::MatrixXd text =
        text_forward(context, interpolate_tokens(batch.weights, p.value(param::kAnchors)), p)
            .out.unit;
    refresh_negative_bank(bank, context, p);
    if (denominator_conditioning(text, image_features(p, batch.inputs), bank.features(),
                                 batch.labels, bank.gazes, s.weighting,
                                 s.temperature) < kMinConditioning) {
      return std::nullopt;
    }
    const Eigen::MatrixXd raw = regressor_forward(image_features(p, batch.inputs), p).raw;
    for (Eigen::Index i = 0; i < kB; ++i) {
      const double c = raw.col(i).normalized().dot(batch.labels[static_cast<std::size_t>(i)].vec());
      if (std::abs(c) > 1.0 - 1e-3) return std::nullopt;
    }
  }

  try {
    p.zero_grad();
    forward_backward(p, grid, batch, bank, s);
    const Eigen::VectorXd analytic = flatten_trainable(p, true);
    ParameterSet work = p;
    const Eigen::VectorXd numeric = central_difference(
        [&](const Eigen::VectorXd& v) {
          assign_trainable(work, v);
          return evaluate_objective(work, grid, batch, bank, s).total;
        },
        flatten_trainable(p), opt.step);
    return relative_error(analytic, numeric);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kNonpositiveDenominator) return std::nullopt;
    throw;
  }
}

}  // namespace

std::vector<GradcheckResult> run_gradcheck(GradcheckTarget target,
                                           const GradcheckOptions& options) {
  std::vector<GradcheckResult> out;
  std::uint64_t stream = 100;
  const bool losses = target == GradcheckTarget::kLoss || target == GradcheckTarget::kAll;
  const bool encoders = target == GradcheckTarget::kEncoder || target == GradcheckTarget::kAll;
  if (losses) {
    out.push_back(run_check("geo", stream++, geo_trial, options));
    out.push_back(run_check("gaze", stream++, gaze_trial, options));
    for (WeightingScheme scheme : {WeightingScheme::kLiteralCos, WeightingScheme::kClampedCos,
                                   WeightingScheme::kDistance, WeightingScheme::kUniform}) {
      const std::string tag = to_string(scheme);
      out.push_back(run_check("mcr_t2i/" + tag, stream++, mcr_trial(McrDirection::kT2I, scheme),
                              options));
      out.push_back(run_check("mcr_i2t/" + tag, stream++, mcr_trial(McrDirection::kI2T, scheme),
                              options));
      out.push_back(run_check("mcr_total/" + tag, stream++,
                              mcr_trial(McrDirection::kTotal, scheme), options));
    }
  } else {
    stream += 14;
  }
  if (encoders) {
    out.push_back(run_check("text_encoder", stream++, text_trial, options));
    out.push_back(run_check("image_encoder", stream++, image_trial, options));
    out.push_back(run_check("regressor", stream++, regressor_trial, options));
    out.push_back(run_check("full_objective", stream++, objective_trial, options));
  }
  return out;
}

}  // namespace gaze
