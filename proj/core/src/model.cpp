// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaze/model.hpp"

#include "gaze/encoders.hpp"

namespace gaze {

namespace {

// Gradients go to *sink when it is non-null; sink may alias params.
LossBreakdown run(const ParameterSet& params, const AnchorGrid& grid, const Batch& batch,
                  NegativeBank& bank, const ObjectiveSettings& s, ParameterSet* sink) {
  const bool backward = sink != nullptr;
  const LossWeights& lam = s.weights;
  const auto b = static_cast<Eigen::Index>(batch.labels.size());
  if (batch.inputs.cols() != b || batch.weights.size() != batch.labels.size()) {
    fail(ErrorKind::kShape, "batch inputs, labels and weights disagree in size");
  }

  double geo = 0.0, t2i = 0.0, i2t = 0.0;

  if (lam.geo > 0.0) {
    GeoLoss g = geo_loss(grid.gazes(), params.value(param::kAnchors));
    geo = g.loss;
    if (backward) sink->grad(param::kAnchors) += lam.geo * g.grad;
  }

  const ImageForward img = image_forward(batch.inputs, params);
  const RegressorForward reg = regressor_forward(img.out.unit, params);
  const GazeLoss gl = gaze_loss(reg.raw, batch.labels);

  Eigen::MatrixXd d_image = Eigen::MatrixXd::Zero(img.out.unit.rows(), b);
  if (lam.mcr > 0.0) {
    const Eigen::MatrixXd& context = params.value(param::kContext);
    const Eigen::MatrixXd tokens = interpolate_tokens(batch.weights, params.value(param::kAnchors));
    const TextForward text = text_forward(context, tokens, params);
    refresh_negative_bank(bank, context, params);

    const McrLoss lt2i = mcr_t2i_loss(text.out.unit, img.out.unit, batch.labels, s.weighting,
                                      s.temperature);
    const McrLoss li2t = mcr_i2t_loss(img.out.unit, text.out.unit, batch.labels, bank.features(),
                                      bank.gazes, s.weighting, s.temperature);
    t2i = lt2i.loss;
    i2t = li2t.loss;

    if (backward) {
      d_image += lam.mcr * (lt2i.d_image + li2t.d_image);
      const Eigen::MatrixXd d_text = lam.mcr * (lt2i.d_text + li2t.d_text);
      const TextBackward tb = text_backward(text, d_text, params);
      Eigen::MatrixXd& d_anchors = sink->grad(param::kAnchors);
      sink->grad(param::kContext) += tb.d_context;
      scatter_token_grad(batch.weights, tb.d_tokens, d_anchors);
      if (bank.size() > 0) {
        const TextBackward bb = text_backward(bank.text, lam.mcr * li2t.d_bank, params);
        sink->grad(param::kContext) += bb.d_context;
        scatter_token_grad(bank.weights, bb.d_tokens, d_anchors);
      }
    }
  }

  if (backward) {
    if (lam.gaze > 0.0) {
      d_image += regressor_backward(reg, lam.gaze * gl.d_raw, *sink);
    }
    image_backward(img, d_image, *sink);
  }

  return make_breakdown(geo, t2i, i2t, gl.loss, lam);
}

}  // namespace

LossBreakdown forward_backward(ParameterSet& params, const AnchorGrid& grid, const Batch& batch,
                               NegativeBank& bank, const ObjectiveSettings& settings) {
  return run(params, grid, batch, bank, settings, &params);
}

LossBreakdown evaluate_objective(const ParameterSet& params, const AnchorGrid& grid,
                                 const Batch& batch, NegativeBank& bank,
                                 const ObjectiveSettings& settings) {
  return run(params, grid, batch, bank, settings, nullptr);
}

Eigen::MatrixXd image_features(const ParameterSet& params, const Eigen::MatrixXd& inputs) {
  return image_forward(inputs, params).out.unit;
}

std::vector<GazeVector> predict(const ParameterSet& params, const Eigen::MatrixXd& inputs) {
  const ImageForward img = image_forward(inputs, params);
  const RegressorForward reg = regressor_forward(img.out.unit, params);
  std::vector<GazeVector> out;
  out.reserve(static_cast<std::size_t>(reg.raw.cols()));
  for (Eigen::Index i = 0; i < reg.raw.cols(); ++i) {
    out.push_back(GazeVector::normalized(reg.raw.col(i)));
  }
  return out;
}

}  // namespace gaze
