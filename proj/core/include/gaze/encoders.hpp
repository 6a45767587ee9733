// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

#include "gaze/config.hpp"
#include "gaze/geometry.hpp"
#include "gaze/normalize.hpp"
#include "gaze/params.hpp"

namespace gaze {

// Parameter names used by the model.
namespace param {
inline constexpr const char* kContext = "prompt.context";
inline constexpr const char* kAnchors = "prompt.anchors";
inline constexpr const char* kTextW1 = "text.w1";
inline constexpr const char* kTextB1 = "text.b1";
inline constexpr const char* kTextW2 = "text.w2";
inline constexpr const char* kTextB2 = "text.b2";
inline constexpr const char* kImgW1 = "image.w1";
inline constexpr const char* kImgB1 = "image.b1";
inline constexpr const char* kImgW2 = "image.w2";
inline constexpr const char* kImgB2 = "image.b2";
inline constexpr const char* kImgW3 = "image.w3";
inline constexpr const char* kImgB3 = "image.b3";
inline constexpr const char* kRegW = "regressor.w";
inline constexpr const char* kRegB = "regressor.b";
}  // namespace param

/// Unit-norm feature vector.
class FeatureVector {
 public:
  static FeatureVector normalized(const Eigen::VectorXd& raw);
  const Eigen::VectorXd& values() const { return values_; }
  double dot(const FeatureVector& other) const { return values_.dot(other.values_); }

 private:
  explicit FeatureVector(Eigen::VectorXd v) : values_(std::move(v)) {}
  Eigen::VectorXd values_;
};

/// L-1 shared context tokens followed by one gaze token.
struct PromptSequence {
  Eigen::MatrixXd context;     // (L-1) x D_tok
  Eigen::VectorXd gaze_token;  // D_tok

  std::size_t length() const { return static_cast<std::size_t>(context.rows()) + 1; }
};

/// Xavier-normal affine weights, zero biases, N(0, 0.02^2) prompt tokens and
/// anchors; the frozen text proxy comes from an independent stream.
ParameterSet init_parameters(const ModelConfig& config, std::uint64_t init_seed,
                             std::uint64_t proxy_seed);

FeatureVector text_encoder_forward(const PromptSequence& seq, const ParameterSet& params);
FeatureVector image_encoder_forward(const Eigen::VectorXd& x, const ParameterSet& params);
GazeVector regressor_forward(const FeatureVector& f, const ParameterSet& params);

// Batched forward/backward passes. Columns are samples.

struct TextForward {
  Eigen::VectorXd context_part;  // W1[:, context] * vec(context) + b1
  Eigen::MatrixXd tokens;        // D_tok x M gaze tokens
  Eigen::MatrixXd hidden;        // tanh activations, D_feat x M
  Normalized out;                // features
};

TextForward text_forward(const Eigen::MatrixXd& context, const Eigen::MatrixXd& gaze_tokens,
                         const ParameterSet& params);

struct TextBackward {
  Eigen::MatrixXd d_context;  // (L-1) x D_tok
  Eigen::MatrixXd d_tokens;   // D_tok x M
};

/// The proxy is frozen: gradients flow only to its inputs.
TextBackward text_backward(const TextForward& fwd, const Eigen::MatrixXd& d_features,
                           const ParameterSet& params);

struct ImageForward {
  Eigen::MatrixXd input;
  Eigen::MatrixXd hidden1;
  Eigen::MatrixXd hidden2;
  Normalized out;
};

ImageForward image_forward(const Eigen::MatrixXd& inputs, const ParameterSet& params);

/// Accumulates into the image-encoder gradients of `params`.
void image_backward(const ImageForward& fwd, const Eigen::MatrixXd& d_features,
                    ParameterSet& params);

struct RegressorForward {
  Eigen::MatrixXd features;
  Eigen::MatrixXd raw;  // 3 x B, before normalization
};

RegressorForward regressor_forward(const Eigen::MatrixXd& features, const ParameterSet& params);

/// Accumulates regressor gradients; returns d loss / d features.
Eigen::MatrixXd regressor_backward(const RegressorForward& fwd, const Eigen::MatrixXd& d_raw,
                                   ParameterSet& params);

}  // namespace gaze
