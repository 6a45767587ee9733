// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaze/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace gaze {

const char* to_string(InterpolationScheme scheme) {
  switch (scheme) {
    case InterpolationScheme::kGlobalLinear: return "global";
    case InterpolationScheme::kPlanarBilinear: return "planar";
    case InterpolationScheme::kSphericalBilinear: return "spherical";
  }
  return "unknown";
}

InterpolationScheme parse_interpolation_scheme(const std::string& name) {
  if (name == "global" || name == "global-linear") return InterpolationScheme::kGlobalLinear;
  if (name == "planar" || name == "planar-bilinear") return InterpolationScheme::kPlanarBilinear;
  if (name == "spherical" || name == "spherical-bilinear") {
    return InterpolationScheme::kSphericalBilinear;
  }
  fail(ErrorKind::kConfiguration, "unknown interpolation scheme '" + name + "'");
}

namespace {

std::vector<double> lattice(double lo, double hi, double step, const char* axis) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    fail(ErrorKind::kConfiguration, std::string(axis) + " step must be positive");
  }
  const double span = hi - lo;
  const double count = span / step;
  const double rounded = std::round(count);
  if (rounded < 1.0 || std::abs(count - rounded) > 1e-9) {
    fail(ErrorKind::kConfiguration, std::string(axis) + " step " + std::to_string(step) +
                                        " does not divide the range evenly");
  }
  const auto n = static_cast<std::size_t>(rounded);
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) values[i] = lo + static_cast<double>(i) * step;
  values.back() = hi;
  return values;
}

// Lower bracket index in a sorted lattice, clamped so that the upper index exists.
std::size_t bracket(const std::vector<double>& values, double x) {
  const auto it = std::upper_bound(values.begin(), values.end(), x);
  const auto i = static_cast<std::ptrdiff_t>(it - values.begin()) - 1;
  return static_cast<std::size_t>(
      std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(values.size()) - 2));
}

}  // namespace

AnchorGrid::AnchorGrid(double yaw_step, double pitch_step)
    : yaw_step_(yaw_step), pitch_step_(pitch_step) {
  yaw_values_ = lattice(-180.0, 180.0, yaw_step, "yaw");
  pitch_values_ = lattice(-90.0, 90.0, pitch_step, "pitch");
  if (pitch_values_.size() < 3) {
    // A single pitch cell would span pole to pole, where the cross-row slerp is undefined.
    fail(ErrorKind::kConfiguration, "pitch step must be smaller than 180 degrees");
  }
  for (double p : pitch_values_) {
    for (double y : yaw_values_) {
      positions_.push_back({y, p});
      gazes_.push_back(yawpitch_to_vec({y, p}));
    }
  }
}

CellCorners AnchorGrid::locate_cell(const YawPitch& yp) const {
  yp.validate();
  const std::size_t yi = bracket(yaw_values_, yp.yaw);
  const std::size_t pi = bracket(pitch_values_, yp.pitch);
  CellCorners c;
  c.a1 = index(yi, pi);
  c.a2 = index(yi + 1, pi);
  c.a3 = index(yi, pi + 1);
  c.a4 = index(yi + 1, pi + 1);
  c.yaw_lo = yaw_values_[yi];
  c.yaw_hi = yaw_values_[yi + 1];
  c.pitch_lo = pitch_values_[pi];
  c.pitch_hi = pitch_values_[pi + 1];
  return c;
}

AnchorSet build_anchor_grid(double yaw_step, double pitch_step, std::size_t token_dim,
                            std::uint64_t init_seed) {
  if (token_dim == 0) fail(ErrorKind::kConfiguration, "token dimension must be positive");
  AnchorGrid grid(yaw_step, pitch_step);
  Eigen::MatrixXd emb(static_cast<Eigen::Index>(grid.size()),
                      static_cast<Eigen::Index>(token_dim));
  std::mt19937_64 rng(init_seed);
  std::normal_distribution<double> normal(0.0, kAnchorInitStddev);
  for (Eigen::Index k = 0; k < emb.rows(); ++k) {
    for (Eigen::Index d = 0; d < emb.cols(); ++d) emb(k, d) = normal(rng);
  }
  return AnchorSet{std::move(grid), std::move(emb)};
}

double InterpolationWeights::sum() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.weight;
  return s;
}

double InterpolationWeights::weight_of(std::size_t k) const {
  double s = 0.0;
  for (const auto& e : entries) {
    if (e.index == k) s += e.weight;
  }
  return s;
}

namespace {

// Slerp weights of the row point `at` between two row corners. Rows that
// collapse onto a pole use the linear limit at the yaw fraction u.
SlerpWeights row_weights(const GazeVector& left, const GazeVector& right, const GazeVector& at,
                         double u) {
  if (arc_angle(left.vec(), right.vec()) < kSlerpDegenerateAngle) return {1.0 - u, u};
  return slerp_weights(left, right, at);
}

}  // namespace

InterpolationWeights spherical_bilinear_weights(const YawPitch& yp, const AnchorGrid& grid) {
  const CellCorners c = grid.locate_cell(yp);
  const double u = (yp.yaw - c.yaw_lo) / (c.yaw_hi - c.yaw_lo);

  // Row points share the target's yaw, so a, target and b lie on one meridian.
  const GazeVector a = yawpitch_to_vec({yp.yaw, c.pitch_lo});
  const GazeVector b = yawpitch_to_vec({yp.yaw, c.pitch_hi});
  const GazeVector target = yawpitch_to_vec(yp);

  const SlerpWeights wa = row_weights(grid.gaze(c.a1), grid.gaze(c.a2), a, u);
  const SlerpWeights wb = row_weights(grid.gaze(c.a3), grid.gaze(c.a4), b, u);

  const double v = std::clamp(arc_angle(a.vec(), target.vec()) / arc_angle(a.vec(), b.vec()),
                              0.0, 1.0);
  const SlerpWeights wi = slerp_weights_at(a, b, v);

  InterpolationWeights out;
  out.scheme = InterpolationScheme::kSphericalBilinear;
  out.entries = {{c.a1, wi.w1 * wa.w1},
                 {c.a2, wi.w1 * wa.w2},
                 {c.a3, wi.w2 * wb.w1},
                 {c.a4, wi.w2 * wb.w2}};
  return out;
}

InterpolationWeights spherical_bilinear_weights(const GazeVector& g, const AnchorGrid& grid) {
  return spherical_bilinear_weights(vec_to_yawpitch(g), grid);
}

InterpolationWeights planar_bilinear_weights(const YawPitch& yp, const AnchorGrid& grid) {
  const CellCorners c = grid.locate_cell(yp);
  const double u = (yp.yaw - c.yaw_lo) / (c.yaw_hi - c.yaw_lo);
  const double v = (yp.pitch - c.pitch_lo) / (c.pitch_hi - c.pitch_lo);
  InterpolationWeights out;
  out.scheme = InterpolationScheme::kPlanarBilinear;
  out.entries = {{c.a1, (1.0 - u) * (1.0 - v)},
                 {c.a2, u * (1.0 - v)},
                 {c.a3, (1.0 - u) * v},
                 {c.a4, u * v}};
  return out;
}

InterpolationWeights planar_bilinear_weights(const GazeVector& g, const AnchorGrid& grid) {
  return planar_bilinear_weights(vec_to_yawpitch(g), grid);
}

InterpolationWeights global_linear_weights(const GazeVector& g,
                                           std::span<const GazeVector> anchors) {
  if (anchors.empty()) fail(ErrorKind::kEmptyRequest, "global interpolation needs anchors");
  std::vector<double> cosines(anchors.size());
  double total = 0.0;
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    cosines[j] = g.dot(anchors[j]);
    total += cosines[j];
  }
  if (std::abs(total) <= kGlobalSingularSum) {
    fail(ErrorKind::kSingular, "global interpolation: cosine sum " + std::to_string(total) +
                                   " is too close to zero to normalize");
  }
  InterpolationWeights out;
  out.scheme = InterpolationScheme::kGlobalLinear;
  out.entries.reserve(anchors.size());
  for (std::size_t j = 0; j < anchors.size(); ++j) out.entries.push_back({j, cosines[j] / total});
  return out;
}

InterpolationWeights global_linear_weights(const GazeVector& g, const AnchorGrid& grid) {
  return global_linear_weights(g, grid.gazes());
}

InterpolationWeights interpolation_weights(InterpolationScheme scheme, const GazeVector& g,
                                           const AnchorGrid& grid) {
  switch (scheme) {
    case InterpolationScheme::kGlobalLinear: return global_linear_weights(g, grid);
    case InterpolationScheme::kPlanarBilinear: return planar_bilinear_weights(g, grid);
    case InterpolationScheme::kSphericalBilinear: return spherical_bilinear_weights(g, grid);
  }
  fail(ErrorKind::kConfiguration, "unknown interpolation scheme");
}

Eigen::VectorXd interpolate_embedding(const InterpolationWeights& w,
                                      const Eigen::MatrixXd& embeddings) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(embeddings.cols());
  for (const auto& e : w.entries) {
    if (e.index >= static_cast<std::size_t>(embeddings.rows())) {
      fail(ErrorKind::kInvariant, "interpolation weight refers to anchor " +
                                      std::to_string(e.index) + " outside the embedding table");
    }
    out += e.weight * embeddings.row(static_cast<Eigen::Index>(e.index)).transpose();
  }
  return out;
}

GazeVector reconstruct_direction(const InterpolationWeights& w,
                                 std::span<const GazeVector> anchors) {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& e : w.entries) sum += e.weight * anchors[e.index].vec();
  return GazeVector::normalized(sum);
}

Eigen::MatrixXd cosine_matrix(const Eigen::MatrixXd& rows) {
  const Eigen::VectorXd norms = rows.rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    if (!(norms(i) > 0.0)) {
      fail(ErrorKind::kDegenerate, "row " + std::to_string(i) + " has zero norm");
    }
  }
  const Eigen::MatrixXd unit = norms.cwiseInverse().asDiagonal() * rows;
  return unit * unit.transpose();
}

GeoLoss geo_loss(std::span<const GazeVector> gazes, const Eigen::MatrixXd& embeddings) {
  const auto n = static_cast<Eigen::Index>(gazes.size());
  if (n < 2) fail(ErrorKind::kShape, "geometric consistency loss needs at least two anchors");
  if (embeddings.rows() != n) {
    fail(ErrorKind::kShape, "embedding rows do not match the anchor count");
  }
  Eigen::MatrixXd g(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) g.row(i) = gazes[static_cast<std::size_t>(i)].vec();

  const Eigen::VectorXd norms = embeddings.rowwise().norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(norms(i) > 0.0)) {
      fail(ErrorKind::kDegenerate, "anchor embedding " + std::to_string(i) + " has zero norm");
    }
  }
  const Eigen::MatrixXd cos_emb = cosine_matrix(embeddings);
  const Eigen::MatrixXd cos_gaze = cosine_matrix(g);

  const double scale = 1.0 / static_cast<double>(n * n);
  Eigen::MatrixXd sign = Eigen::MatrixXd::Zero(n, n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double diff = cos_emb(i, j) - cos_gaze(i, j);
      total += std::abs(diff);
      sign(i, j) = static_cast<double>((diff > 0.0) - (diff < 0.0));
    }
  }

  // d cos(A_i, A_j) / d A_i = (unit_j - cos_ij unit_i) / |A_i|; each unordered
  // pair appears twice in the double sum.
  const Eigen::MatrixXd unit = norms.cwiseInverse().asDiagonal() * embeddings;
  const Eigen::VectorXd diag = sign.cwiseProduct(cos_emb).rowwise().sum();
  Eigen::MatrixXd grad = sign * unit - diag.asDiagonal() * unit;
  grad = (2.0 * scale) * (norms.cwiseInverse().asDiagonal() * grad);

  return GeoLoss{scale * total, std::move(grad)};
}

GeoLoss geo_loss(const AnchorSet& set) { return geo_loss(set.grid.gazes(), set.embeddings); }

nlohmann::ordered_json to_json(const AnchorSet& set) {
  nlohmann::ordered_json doc;
  doc["yaw_step"] = set.grid.yaw_step();
  doc["pitch_step"] = set.grid.pitch_step();
  doc["token_dim"] = set.token_dim();
  doc["count"] = set.grid.size();
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index k = 0; k < set.embeddings.rows(); ++k) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index d = 0; d < set.embeddings.cols(); ++d) row.push_back(set.embeddings(k, d));
    rows.push_back(std::move(row));
  }
  doc["embeddings"] = std::move(rows);
  return doc;
}

AnchorSet anchor_set_from_json(const nlohmann::json& doc) {
  try {
    AnchorGrid grid(doc.at("yaw_step").get<double>(), doc.at("pitch_step").get<double>());
    const auto& rows = doc.at("embeddings");
    if (rows.size() != grid.size()) {
      fail(ErrorKind::kShape, "anchor file has " + std::to_string(rows.size()) +
                                  " embedding rows, grid needs " + std::to_string(grid.size()));
    }
    const std::size_t dim = rows.empty() ? 0 : rows.front().size();
    Eigen::MatrixXd emb(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k].size() != dim) fail(ErrorKind::kShape, "ragged anchor embedding matrix");
      for (std::size_t d = 0; d < dim; ++d) {
        emb(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d)) = rows[k][d].get<double>();
      }
    }
    return AnchorSet{std::move(grid), std::move(emb)};
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfiguration, std::string("malformed anchor set: ") + e.what());
  }
}

}  // namespace gaze
