// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaze/params.hpp"

#include <algorithm>
#include <fstream>

namespace gaze {

Tensor& ParameterSet::add(std::string name, Eigen::MatrixXd value, bool trainable) {
  if (contains(name)) fail(ErrorKind::kInvariant, "duplicate parameter '" + name + "'");
  Tensor t;
  t.name = std::move(name);
  t.trainable = trainable;
  if (trainable) t.grad = Eigen::MatrixXd::Zero(value.rows(), value.cols());
  t.value = std::move(value);
  tensors_.push_back(std::move(t));
  return tensors_.back();
}

bool ParameterSet::contains(const std::string& name) const {
  return std::any_of(tensors_.begin(), tensors_.end(),
                     [&](const Tensor& t) { return t.name == name; });
}

Tensor& ParameterSet::at(const std::string& name) {
  for (auto& t : tensors_) {
    if (t.name == name) return t;
  }
  fail(ErrorKind::kShape, "no parameter named '" + name + "'");
}

const Tensor& ParameterSet::at(const std::string& name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t;
  }
  fail(ErrorKind::kShape, "no parameter named '" + name + "'");
}

Eigen::MatrixXd& ParameterSet::grad(const std::string& name) {
  Tensor& t = at(name);
  if (!t.trainable) fail(ErrorKind::kInvariant, "parameter '" + name + "' is frozen");
  return t.grad;
}

void ParameterSet::zero_grad() {
  for (auto& t : tensors_) {
    if (t.trainable) t.grad.setZero();
  }
}

std::size_t ParameterSet::count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += static_cast<std::size_t>(t.value.size());
  return n;
}

std::size_t ParameterSet::trainable_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) {
    if (t.trainable) n += static_cast<std::size_t>(t.value.size());
  }
  return n;
}

double ParameterSet::max_abs_diff(const ParameterSet& other) const {
  if (tensors_.size() != other.tensors_.size()) {
    fail(ErrorKind::kShape, "parameter sets have different tensor counts");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    const auto& a = tensors_[i].value;
    const auto& b = other.tensors_[i].value;
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      fail(ErrorKind::kShape, "shape mismatch for '" + tensors_[i].name + "'");
    }
    if (a.size() > 0) worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
  }
  return worst;
}

bool operator==(const ParameterSet& a, const ParameterSet& b) {
  if (a.tensors_.size() != b.tensors_.size()) return false;
  for (std::size_t i = 0; i < a.tensors_.size(); ++i) {
    const auto& x = a.tensors_[i];
    const auto& y = b.tensors_[i];
    if (x.name != y.name || x.trainable != y.trainable || x.value.rows() != y.value.rows() ||
        x.value.cols() != y.value.cols() || x.value != y.value) {
      return false;
    }
  }
  return true;
}

nlohmann::ordered_json to_json(const ParameterSet& params) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& t : params.tensors()) {
    nlohmann::ordered_json entry;
    entry["shape"] = {t.value.rows(), t.value.cols()};
    entry["trainable"] = t.trainable;
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(t.value.size()));
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.value.cols(); ++c) flat.push_back(t.value(r, c));
    }
    entry["data"] = std::move(flat);
    doc[t.name] = std::move(entry);
  }
  return doc;
}

ParameterSet parameters_from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_object()) fail(ErrorKind::kConfiguration, "checkpoint must be a JSON object");
  ParameterSet params;
  try {
    for (const auto& [name, entry] : doc.items()) {
      const auto rows = entry.at("shape").at(0).get<Eigen::Index>();
      const auto cols = entry.at("shape").at(1).get<Eigen::Index>();
      const auto& data = entry.at("data");
      if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
        fail(ErrorKind::kShape, "checkpoint tensor '" + name + "' has inconsistent shape");
      }
      Eigen::MatrixXd value(rows, cols);
      std::size_t k = 0;
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) value(r, c) = data[k++].get<double>();
      }
      params.add(name, std::move(value), entry.value("trainable", true));
    }
  } catch (const nlohmann::ordered_json::exception& e) {
    fail(ErrorKind::kConfiguration, std::string("malformed checkpoint: ") + e.what());
  }
  return params;
}

void save_parameters(const ParameterSet& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write '" + path + "'");
  out << to_json(params).dump() << '\n';
}

ParameterSet load_parameters(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot read '" + path + "'");
  nlohmann::ordered_json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfiguration, "'" + path + "' is not valid JSON: " + e.what());
  }
  return parameters_from_json(doc);
}

}  // namespace gaze
