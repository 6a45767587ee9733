// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaze/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gaze/normalize.hpp"

namespace gaze {

double neg_weight(const GazeVector& gi, const GazeVector& gj, WeightingScheme scheme) {
  const double c = gi.dot(gj);
  switch (scheme) {
    case WeightingScheme::kLiteralCos: return c;
    case WeightingScheme::kClampedCos: return std::max(0.0, c);
    case WeightingScheme::kDistance: return (1.0 - c) / 2.0;
    case WeightingScheme::kUniform: return 1.0;
  }
  return 0.0;
}

namespace {

struct InfoNceResult {
  double loss = 0.0;
  Eigen::MatrixXd d_query;
  Eigen::MatrixXd d_candidates;
};

// Weighted InfoNCE over cosine similarities. Query i's positive is candidate i;
// every other candidate j is a negative with weight w(label_i, cand_label_j).
InfoNceResult weighted_info_nce(const Eigen::MatrixXd& query, const Eigen::MatrixXd& candidates,
                                std::span<const GazeVector> labels,
                                std::span<const GazeVector> cand_labels,
                                WeightingScheme scheme, double temperature) {
  const Eigen::Index b = query.cols();
  const Eigen::Index m = candidates.cols();
  if (b < 1) fail(ErrorKind::kShape, "contrastive loss needs at least one sample");
  if (static_cast<std::size_t>(b) != labels.size() || m < b ||
      static_cast<std::size_t>(m) != cand_labels.size() || query.rows() != candidates.rows()) {
    fail(ErrorKind::kShape, "contrastive loss inputs have mismatched sizes");
  }
  if (!(temperature > 0.0)) fail(ErrorKind::kConfiguration, "temperature must be positive");

  const Normalized q = normalize_columns(query, "contrastive query");
  const Normalized c = normalize_columns(candidates, "contrastive candidate");
  const Eigen::MatrixXd sim = q.unit.transpose() * c.unit;  // B x M

  Eigen::MatrixXd d_sim = Eigen::MatrixXd::Zero(b, m);
  double total = 0.0;
  std::vector<double> w(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < b; ++i) {
    const double pos = sim(i, i) / temperature;
    double shift = pos;
    for (Eigen::Index j = 0; j < m; ++j) {
      w[static_cast<std::size_t>(j)] =
          j == i ? 0.0
                 : neg_weight(labels[static_cast<std::size_t>(i)],
                              cand_labels[static_cast<std::size_t>(j)], scheme);
      if (w[static_cast<std::size_t>(j)] != 0.0) shift = std::max(shift, sim(i, j) / temperature);
    }
    const double e_pos = std::exp(pos - shift);
    double denom = e_pos;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double wj = w[static_cast<std::size_t>(j)];
      if (wj != 0.0) denom += wj * std::exp(sim(i, j) / temperature - shift);
    }
    if (!(denom > kMinDenominator * std::exp(-shift))) {
      fail(ErrorKind::kNonpositiveDenominator,
           "contrastive denominator is not positive for sample " + std::to_string(i));
    }
    total += shift + std::log(denom) - pos;
    d_sim(i, i) = (e_pos / denom - 1.0) / temperature;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double wj = w[static_cast<std::size_t>(j)];
      if (wj != 0.0) d_sim(i, j) = wj * std::exp(sim(i, j) / temperature - shift) / denom / temperature;
    }
  }
  const double inv_b = 1.0 / static_cast<double>(b);
  d_sim *= inv_b;

  InfoNceResult out;
  out.loss = total * inv_b;
  out.d_query = normalize_columns_backward(q, c.unit * d_sim.transpose());
  out.d_candidates = normalize_columns_backward(c, q.unit * d_sim);
  return out;
}

}  // namespace

McrLoss mcr_t2i_loss(const Eigen::MatrixXd& text, const Eigen::MatrixXd& image,
                     std::span<const GazeVector> labels, WeightingScheme scheme,
                     double temperature) {
  if (text.cols() != image.cols()) fail(ErrorKind::kShape, "text/image batch sizes differ");
  InfoNceResult r = weighted_info_nce(text, image, labels, labels, scheme, temperature);
  McrLoss out;
  out.loss = r.loss;
  out.d_text = std::move(r.d_query);
  out.d_image = std::move(r.d_candidates);
  return out;
}

McrLoss mcr_i2t_loss(const Eigen::MatrixXd& image, const Eigen::MatrixXd& text,
                     std::span<const GazeVector> labels, const Eigen::MatrixXd& bank,
                     std::span<const GazeVector> bank_gazes, WeightingScheme scheme,
                     double temperature) {
  const Eigen::Index b = image.cols();
  const Eigen::Index k = static_cast<Eigen::Index>(bank_gazes.size());
  if (text.cols() != b) fail(ErrorKind::kShape, "text/image batch sizes differ");
  if (bank.cols() != k || (k > 0 && bank.rows() != text.rows())) {
    fail(ErrorKind::kShape, "negative bank features do not match their gaze directions");
  }
  Eigen::MatrixXd candidates(text.rows(), b + k);
  candidates.leftCols(b) = text;
  if (k > 0) candidates.rightCols(k) = bank;
  std::vector<GazeVector> cand_labels(labels.begin(), labels.end());
  cand_labels.insert(cand_labels.end(), bank_gazes.begin(), bank_gazes.end());

  InfoNceResult r = weighted_info_nce(image, candidates, labels, cand_labels, scheme, temperature);
  McrLoss out;
  out.loss = r.loss;
  out.d_image = std::move(r.d_query);
  out.d_text = r.d_candidates.leftCols(b);
  out.d_bank = r.d_candidates.rightCols(k);
  return out;
}

McrLoss mcr_total(const Eigen::MatrixXd& text, const Eigen::MatrixXd& image,
                  std::span<const GazeVector> labels, const Eigen::MatrixXd& bank,
                  std::span<const GazeVector> bank_gazes, WeightingScheme scheme,
                  double temperature) {
  McrLoss t2i = mcr_t2i_loss(text, image, labels, scheme, temperature);
  McrLoss i2t = mcr_i2t_loss(image, text, labels, bank, bank_gazes, scheme, temperature);
  McrLoss out;
  out.loss = t2i.loss + i2t.loss;
  out.d_text = t2i.d_text + i2t.d_text;
  out.d_image = t2i.d_image + i2t.d_image;
  out.d_bank = std::move(i2t.d_bank);
  return out;
}

GazeLoss gaze_loss(const Eigen::MatrixXd& raw, std::span<const GazeVector> labels) {
  const Eigen::Index b = raw.cols();
  if (raw.rows() != 3 || static_cast<std::size_t>(b) != labels.size() || b == 0) {
    fail(ErrorKind::kShape, "gaze loss expects a 3 x B prediction matrix and B labels");
  }
  const double min_root = std::sqrt(1.0 - kGazeGradientClamp * kGazeGradientClamp);
  GazeLoss out;
  out.d_raw = Eigen::MatrixXd::Zero(3, b);
  double total = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const Eigen::Vector3d r = raw.col(i);
    const double n = r.norm();
    if (!(n > kDegenerateNorm)) {
      fail(ErrorKind::kDegenerate, "regressor output " + std::to_string(i) + " is zero");
    }
    const Eigen::Vector3d pred = r / n;
    const Eigen::Vector3d& g = labels[static_cast<std::size_t>(i)].vec();
    const double c = std::clamp(pred.dot(g), -1.0, 1.0);
    total += std::acos(c);
    const double root =
        std::abs(c) > kGazeGradientClamp ? min_root : std::sqrt(1.0 - c * c);
    out.d_raw.col(i) = -(g - c * pred) / (n * root);
  }
  const double inv_b = 1.0 / static_cast<double>(b);
  out.loss = total * inv_b;
  out.d_raw *= inv_b;
  return out;
}

GazeLoss gaze_loss(const Eigen::Vector3d& raw, const GazeVector& label) {
  return gaze_loss(Eigen::MatrixXd(raw), std::span<const GazeVector>(&label, 1));
}

LossBreakdown make_breakdown(double geo, double mcr_t2i, double mcr_i2t, double gaze,
                             const LossWeights& weights) {
  LossBreakdown b;
  b.geo = geo;
  b.mcr_t2i = mcr_t2i;
  b.mcr_i2t = mcr_i2t;
  b.gaze = gaze;
  b.total = weights.geo * geo + weights.mcr * (mcr_t2i + mcr_i2t) + weights.gaze * gaze;
  return b;
}

Objective total_objective(const ObjectiveTerm& geo, const ObjectiveTerm& mcr_t2i,
                          const ObjectiveTerm& mcr_i2t, const ObjectiveTerm& gaze,
                          const LossWeights& weights) {
  Objective out;
  out.breakdown = make_breakdown(geo.value, mcr_t2i.value, mcr_i2t.value, gaze.value, weights);
  auto merge = [&out](const ObjectiveTerm& term, double lambda) {
    for (const auto& [name, g] : term.grad) {
      auto it = std::find_if(out.grad.begin(), out.grad.end(),
                             [&](const auto& entry) { return entry.first == name; });
      if (it == out.grad.end()) {
        out.grad.emplace_back(name, lambda * g);
      } else {
        if (it->second.rows() != g.rows() || it->second.cols() != g.cols()) {
          fail(ErrorKind::kShape, "gradient shapes disagree for '" + name + "'");
        }
        it->second += lambda * g;
      }
    }
  };
  merge(geo, weights.geo);
  merge(mcr_t2i, weights.mcr);
  merge(mcr_i2t, weights.mcr);
  merge(gaze, weights.gaze);
  return out;
}

Eigen::MatrixXd interpolate_tokens(std::span<const InterpolationWeights> weights,
                                   const Eigen::MatrixXd& embeddings) {
  Eigen::MatrixXd tokens(embeddings.cols(), static_cast<Eigen::Index>(weights.size()));
  for (std::size_t m = 0; m < weights.size(); ++m) {
    tokens.col(static_cast<Eigen::Index>(m)) = interpolate_embedding(weights[m], embeddings);
  }
  return tokens;
}

void scatter_token_grad(std::span<const InterpolationWeights> weights,
                        const Eigen::MatrixXd& d_tokens, Eigen::MatrixXd& d_embeddings) {
  for (std::size_t m = 0; m < weights.size(); ++m) {
    for (const auto& e : weights[m].entries) {
      d_embeddings.row(static_cast<Eigen::Index>(e.index)) +=
          e.weight * d_tokens.col(static_cast<Eigen::Index>(m)).transpose();
    }
  }
}

NegativeBank make_negative_bank(std::size_t k, const AnchorGrid& grid,
                                InterpolationScheme scheme) {
  NegativeBank bank;
  if (k == 0) return bank;
  bank.gazes = fibonacci_sphere(k);
  bank.weights.reserve(k);
  for (const auto& g : bank.gazes) bank.weights.push_back(interpolation_weights(scheme, g, grid));
  return bank;
}

void refresh_negative_bank(NegativeBank& bank, const Eigen::MatrixXd& context,
                           const ParameterSet& params) {
  const Eigen::MatrixXd& anchors = params.value(param::kAnchors);
  bank.tokens = interpolate_tokens(bank.weights, anchors);
  if (bank.size() == 0) {
    bank.text = TextForward{};
    bank.text.tokens = Eigen::MatrixXd(anchors.cols(), 0);
    bank.text.out.unit = Eigen::MatrixXd(params.value(param::kTextW2).rows(), 0);
    return;
  }
  bank.text = text_forward(context, bank.tokens, params);
}

NegativeBank build_negative_bank(std::size_t k, const AnchorGrid& grid,
                                 const Eigen::MatrixXd& context, const ParameterSet& params,
                                 InterpolationScheme scheme) {
  NegativeBank bank = make_negative_bank(k, grid, scheme);
  refresh_negative_bank(bank, context, params);
  return bank;
}

}  // namespace gaze
