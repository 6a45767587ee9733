// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "gaze/error.hpp"

namespace gaze {

/// A named dense tensor. Trainable tensors carry a gradient of the same shape;
/// frozen ones have an empty gradient slot.
struct Tensor {
  std::string name;
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;
  bool trainable = true;
};

class ParameterSet {
 public:
  Tensor& add(std::string name, Eigen::MatrixXd value, bool trainable);

  bool contains(const std::string& name) const;
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  const Eigen::MatrixXd& value(const std::string& name) const { return at(name).value; }
  Eigen::MatrixXd& grad(const std::string& name);

  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }

  void zero_grad();
  std::size_t count() const;
  std::size_t trainable_count() const;

  /// Largest elementwise |a - b| over all tensors; shapes must match.
  double max_abs_diff(const ParameterSet& other) const;

  friend bool operator==(const ParameterSet& a, const ParameterSet& b);

 private:
  std::vector<Tensor> tensors_;
};

/// name -> {shape, trainable, data (row-major)}; doubles round-trip exactly.
nlohmann::ordered_json to_json(const ParameterSet& params);
ParameterSet parameters_from_json(const nlohmann::ordered_json& doc);

void save_parameters(const ParameterSet& params, const std::string& path);
ParameterSet load_parameters(const std::string& path);

}  // namespace gaze
