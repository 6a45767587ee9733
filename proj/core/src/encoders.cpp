// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaze/encoders.hpp"

#include <cmath>
#include <random>
#include <string>

#include "gaze/anchors.hpp"

namespace gaze {

namespace {

enum : std::uint64_t { kStreamTrainable = 1, kStreamAnchors = 2, kStreamProxy = 3 };

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, double stddev,
                         std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = normal(rng);
  }
  return m;
}

double xavier(Eigen::Index fan_in, Eigen::Index fan_out) {
  return std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
}

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

// Row-major flattening of the context token matrix.
Eigen::VectorXd flatten_rows(const Eigen::MatrixXd& m) {
  Eigen::VectorXd v(m.size());
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) v(k++) = m(r, c);
  }
  return v;
}

}  // namespace

FeatureVector FeatureVector::normalized(const Eigen::VectorXd& raw) {
  const double n = raw.norm();
  if (!(n > kDegenerateNorm) || !std::isfinite(n)) {
    fail(ErrorKind::kDegenerate, "cannot normalize a zero or non-finite feature");
  }
  return FeatureVector(raw / n);
}

ParameterSet init_parameters(const ModelConfig& config, std::uint64_t init_seed,
                             std::uint64_t proxy_seed) {
  config.validate();
  const Eigen::Index in = idx(config.input_dim);
  const Eigen::Index hid = idx(config.hidden_dim);
  const Eigen::Index feat = idx(config.feature_dim);
  const Eigen::Index tok = idx(config.token_dim);
  const Eigen::Index len = idx(config.context_len);

  std::mt19937_64 rng(derive_seed(init_seed, kStreamTrainable));
  ParameterSet p;
  p.add(param::kContext, gaussian(len - 1, tok, kAnchorInitStddev, rng), true);
  AnchorSet anchors = build_anchor_grid(config.yaw_step, config.pitch_step, config.token_dim,
                                        derive_seed(init_seed, kStreamAnchors));
  p.add(param::kAnchors, std::move(anchors.embeddings), true);

  p.add(param::kImgW1, gaussian(hid, in, xavier(in, hid), rng), true);
  p.add(param::kImgB1, Eigen::MatrixXd::Zero(hid, 1), true);
  p.add(param::kImgW2, gaussian(hid, hid, xavier(hid, hid), rng), true);
  p.add(param::kImgB2, Eigen::MatrixXd::Zero(hid, 1), true);
  p.add(param::kImgW3, gaussian(feat, hid, xavier(hid, feat), rng), true);
  p.add(param::kImgB3, Eigen::MatrixXd::Zero(feat, 1), true);
  p.add(param::kRegW, gaussian(3, feat, xavier(feat, 3), rng), true);
  p.add(param::kRegB, Eigen::MatrixXd::Zero(3, 1), true);

  std::mt19937_64 proxy(derive_seed(proxy_seed, kStreamProxy));
  p.add(param::kTextW1, gaussian(feat, len * tok, xavier(len * tok, feat), proxy), false);
  p.add(param::kTextB1, gaussian(feat, 1, kAnchorInitStddev, proxy), false);
  p.add(param::kTextW2, gaussian(feat, feat, xavier(feat, feat), proxy), false);
  p.add(param::kTextB2, gaussian(feat, 1, kAnchorInitStddev, proxy), false);
  return p;
}

TextForward text_forward(const Eigen::MatrixXd& context, const Eigen::MatrixXd& gaze_tokens,
                         const ParameterSet& params) {
  const Eigen::MatrixXd& w1 = params.value(param::kTextW1);
  const Eigen::MatrixXd& b1 = params.value(param::kTextB1);
  const Eigen::MatrixXd& w2 = params.value(param::kTextW2);
  const Eigen::MatrixXd& b2 = params.value(param::kTextB2);
  const Eigen::Index tok = gaze_tokens.rows();
  if (tok == 0 || w1.cols() % tok != 0) {
    fail(ErrorKind::kShape, "gaze token dimension does not match the text encoder");
  }
  const Eigen::Index len = w1.cols() / tok;
  if (context.rows() != len - 1 || context.cols() != tok) {
    fail(ErrorKind::kShape, "prompt sequence must have length " + std::to_string(len) +
                                " with token dimension " + std::to_string(tok));
  }
  const Eigen::Index ctx_cols = (len - 1) * tok;

  TextForward fwd;
  fwd.tokens = gaze_tokens;
  fwd.context_part = b1.col(0);
  if (ctx_cols > 0) fwd.context_part += w1.leftCols(ctx_cols) * flatten_rows(context);
  Eigen::MatrixXd pre = w1.rightCols(tok) * gaze_tokens;
  pre.colwise() += fwd.context_part;
  fwd.hidden = pre.array().tanh().matrix();
  Eigen::MatrixXd out = w2 * fwd.hidden;
  out.colwise() += b2.col(0);
  fwd.out = normalize_columns(out, "text encoder");
  return fwd;
}

TextBackward text_backward(const TextForward& fwd, const Eigen::MatrixXd& d_features,
                           const ParameterSet& params) {
  const Eigen::MatrixXd& w1 = params.value(param::kTextW1);
  const Eigen::MatrixXd& w2 = params.value(param::kTextW2);
  const Eigen::Index tok = fwd.tokens.rows();
  const Eigen::Index len = w1.cols() / tok;
  const Eigen::Index ctx_cols = (len - 1) * tok;

  const Eigen::MatrixXd d_out = normalize_columns_backward(fwd.out, d_features);
  const Eigen::MatrixXd d_pre =
      (w2.transpose() * d_out).cwiseProduct((1.0 - fwd.hidden.array().square()).matrix());

  TextBackward back;
  back.d_tokens = w1.rightCols(tok).transpose() * d_pre;
  back.d_context = Eigen::MatrixXd::Zero(len - 1, tok);
  if (ctx_cols > 0) {
    const Eigen::VectorXd d_flat = w1.leftCols(ctx_cols).transpose() * d_pre.rowwise().sum();
    for (Eigen::Index r = 0; r < len - 1; ++r) {
      for (Eigen::Index c = 0; c < tok; ++c) back.d_context(r, c) = d_flat(r * tok + c);
    }
  }
  return back;
}

ImageForward image_forward(const Eigen::MatrixXd& inputs, const ParameterSet& params) {
  const Eigen::MatrixXd& w1 = params.value(param::kImgW1);
  if (inputs.rows() != w1.cols()) {
    fail(ErrorKind::kShape, "image input has dimension " + std::to_string(inputs.rows()) +
                                ", expected " + std::to_string(w1.cols()));
  }
  ImageForward fwd;
  fwd.input = inputs;
  Eigen::MatrixXd h = w1 * inputs;
  h.colwise() += params.value(param::kImgB1).col(0);
  fwd.hidden1 = h.array().tanh().matrix();
  h = params.value(param::kImgW2) * fwd.hidden1;
  h.colwise() += params.value(param::kImgB2).col(0);
  fwd.hidden2 = h.array().tanh().matrix();
  h = params.value(param::kImgW3) * fwd.hidden2;
  h.colwise() += params.value(param::kImgB3).col(0);
  fwd.out = normalize_columns(h, "image encoder");
  return fwd;
}

void image_backward(const ImageForward& fwd, const Eigen::MatrixXd& d_features,
                    ParameterSet& params) {
  const Eigen::MatrixXd d3 = normalize_columns_backward(fwd.out, d_features);
  params.grad(param::kImgW3) += d3 * fwd.hidden2.transpose();
  params.grad(param::kImgB3) += d3.rowwise().sum();

  const Eigen::MatrixXd d2 = (params.value(param::kImgW3).transpose() * d3)
                                 .cwiseProduct((1.0 - fwd.hidden2.array().square()).matrix());
  params.grad(param::kImgW2) += d2 * fwd.hidden1.transpose();
  params.grad(param::kImgB2) += d2.rowwise().sum();

  const Eigen::MatrixXd d1 = (params.value(param::kImgW2).transpose() * d2)
                                 .cwiseProduct((1.0 - fwd.hidden1.array().square()).matrix());
  params.grad(param::kImgW1) += d1 * fwd.input.transpose();
  params.grad(param::kImgB1) += d1.rowwise().sum();
}

RegressorForward regressor_forward(const Eigen::MatrixXd& features, const ParameterSet& params) {
  const Eigen::MatrixXd& w = params.value(param::kRegW);
  if (features.rows() != w.cols()) {
    fail(ErrorKind::kShape, "regressor input has dimension " + std::to_string(features.rows()) +
                                ", expected " + std::to_string(w.cols()));
  }
  RegressorForward fwd;
  fwd.features = features;
  fwd.raw = w * features;
  fwd.raw.colwise() += params.value(param::kRegB).col(0);
  return fwd;
}

Eigen::MatrixXd regressor_backward(const RegressorForward& fwd, const Eigen::MatrixXd& d_raw,
                                   ParameterSet& params) {
  params.grad(param::kRegW) += d_raw * fwd.features.transpose();
  params.grad(param::kRegB) += d_raw.rowwise().sum();
  return params.value(param::kRegW).transpose() * d_raw;
}

FeatureVector text_encoder_forward(const PromptSequence& seq, const ParameterSet& params) {
  const Eigen::MatrixXd& w1 = params.value(param::kTextW1);
  const auto tok = seq.gaze_token.size();
  if (tok == 0 || w1.cols() != static_cast<Eigen::Index>(seq.length()) * tok) {
    fail(ErrorKind::kShape, "prompt sequence length " + std::to_string(seq.length()) +
                                " does not match the text encoder");
  }
  const TextForward fwd = text_forward(seq.context, seq.gaze_token, params);
  return FeatureVector::normalized(fwd.out.unit.col(0));
}

FeatureVector image_encoder_forward(const Eigen::VectorXd& x, const ParameterSet& params) {
  const ImageForward fwd = image_forward(x, params);
  return FeatureVector::normalized(fwd.out.unit.col(0));
}

GazeVector regressor_forward(const FeatureVector& f, const ParameterSet& params) {
  const RegressorForward fwd = regressor_forward(Eigen::MatrixXd(f.values()), params);
  const Eigen::Vector3d raw = fwd.raw.col(0);
  if (!(raw.norm() > kDegenerateNorm)) {
    fail(ErrorKind::kDegenerate, "regressor produced a zero direction");
  }
  return GazeVector::normalized(raw);
}

}  // namespace gaze
