// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "gaze/anchors.hpp"
#include "oracle_values.hpp"
#include "support.hpp"

using namespace gaze;
using test::near;

namespace {

std::size_t index_at(const AnchorGrid& grid, double yaw, double pitch) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid.position(k).yaw == yaw && grid.position(k).pitch == pitch) return k;
  }
  FAIL("no anchor at the requested position");
  return 0;
}

}  // namespace

TEST_CASE("default grid has 91 anchors laid out row-major") {
  const AnchorGrid grid(30, 30);
  CHECK(grid.size() == 91);
  CHECK(grid.yaw_count() == 13);
  CHECK(grid.pitch_count() == 7);
  CHECK(grid.yaw_values().front() == -180.0);
  CHECK(grid.yaw_values().back() == 180.0);
  CHECK(grid.position(grid.index(4, 2)).yaw == -60.0);
  CHECK(grid.position(grid.index(4, 2)).pitch == -30.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(grid.gaze(k) == yawpitch_to_vec(grid.position(k)));
  }
  CHECK(AnchorGrid(90, 90).size() == 15);
}

TEST_CASE("grid steps must divide the ranges") {
  CHECK(test::error_kind_of([] { AnchorGrid(25, 30); }) == ErrorKind::kConfiguration);
  CHECK(test::error_kind_of([] { AnchorGrid(30, 0); }) == ErrorKind::kConfiguration);
  CHECK(test::error_kind_of([] { AnchorGrid(30, 180); }) == ErrorKind::kConfiguration);
}

TEST_CASE("build_anchor_grid is seeded and has the configured width") {
  const AnchorSet a = build_anchor_grid(30, 30, 16, 5);
  const AnchorSet b = build_anchor_grid(30, 30, 16, 5);
  const AnchorSet c = build_anchor_grid(30, 30, 16, 6);
  CHECK(a.embeddings.rows() == 91);
  CHECK(a.embeddings.cols() == 16);
  CHECK(a.embeddings == b.embeddings);
  CHECK(a.embeddings != c.embeddings);
  // Sample standard deviation of 1456 draws from N(0, 0.02^2).
  const double mean = a.embeddings.mean();
  const double sd = std::sqrt((a.embeddings.array() - mean).square().sum() /
                              static_cast<double>(a.embeddings.size() - 1));
  CHECK(near(sd, 0.02, 0.0015));
}

TEST_CASE("locate_cell brackets, wraps and uses the lower-edge convention") {
  const AnchorGrid grid(30, 30);
  auto check = [&](double yaw, double pitch, double ylo, double plo) {
    const CellCorners c = grid.locate_cell({yaw, pitch});
    CHECK(c.yaw_lo == ylo);
    CHECK(c.yaw_hi == ylo + 30);
    CHECK(c.pitch_lo == plo);
    CHECK(c.pitch_hi == plo + 30);
    CHECK(c.a1 == index_at(grid, ylo, plo));
    CHECK(c.a2 == index_at(grid, ylo + 30, plo));
    CHECK(c.a3 == index_at(grid, ylo, plo + 30));
    CHECK(c.a4 == index_at(grid, ylo + 30, plo + 30));
  };
  check(10, 20, 0, 0);
  check(175, 0, 150, 0);
  check(30, 30, 30, 30);
  check(180, 90, 150, 60);
  check(-180, -90, -180, -90);
}

TEST_CASE("spherical-bilinear weights match the independent oracle") {
  const AnchorGrid grid(30, 30);
  for (const auto& tc : oracle::kSpherical) {
    CAPTURE(tc.yaw);
    CAPTURE(tc.pitch);
    const InterpolationWeights w = spherical_bilinear_weights(YawPitch{tc.yaw, tc.pitch}, grid);
    REQUIRE(w.entries.size() == 4);
    for (int k = 0; k < 4; ++k) {
      CHECK(w.entries[k].index == index_at(grid, tc.corners[k][0], tc.corners[k][1]));
      CHECK(near(w.entries[k].weight, tc.weights[k], 1e-12));
    }
  }
}

TEST_CASE("spherical-bilinear bottom-edge midpoint uses symmetric slerp weights") {
  const AnchorGrid grid(30, 30);
  const InterpolationWeights w = spherical_bilinear_weights(YawPitch{15, 0}, grid);
  const double expect = std::sin(deg2rad(15)) / std::sin(deg2rad(30));
  CHECK(near(w.entries[0].weight, expect, 1e-12));
  CHECK(near(w.entries[1].weight, expect, 1e-12));
  CHECK(w.entries[2].weight == 0.0);
  CHECK(w.entries[3].weight == 0.0);
}

TEST_CASE("corner recovery on every anchor of the default grid") {
  const AnchorGrid grid(30, 30);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CAPTURE(k);
    const InterpolationWeights w = spherical_bilinear_weights(grid.position(k), grid);
    CHECK(near(w.weight_of(k), 1.0, 1e-9));
    for (const auto& e : w.entries) {
      if (e.index != k) CHECK(near(e.weight, 0.0, 1e-9));
    }
    const InterpolationWeights p = planar_bilinear_weights(grid.position(k), grid);
    CHECK(near(p.weight_of(k), 1.0, 1e-12));
  }
}

TEST_CASE("spherical-bilinear reconstruction stays within one degree") {
  const AnchorGrid grid(30, 30);
  CHECK(angular_error(reconstruct_direction(spherical_bilinear_weights(YawPitch{15, 15}, grid),
                                            grid.gazes()),
                      yawpitch_to_vec({15, 15})) < 1.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> yaw(-180, 180), pitch(-90, 90);
  double worst = 0;
  for (int i = 0; i < 5000; ++i) {
    const YawPitch yp{yaw(rng), pitch(rng)};
    const auto w = spherical_bilinear_weights(yp, grid);
    worst = std::max(worst, angular_error(reconstruct_direction(w, grid.gazes()),
                                          yawpitch_to_vec(yp)));
  }
  CHECK(worst < 1.0);
  CHECK(worst <= oracle::kSphericalWorstSweepDeg + 1e-6);
}

TEST_CASE("weight sums: planar is a partition of unity, spherical stays in its bound") {
  const AnchorGrid grid(30, 30);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> yaw(-180, 180), pitch(-90, 90);
  for (int i = 0; i < 5000; ++i) {
    const YawPitch yp{yaw(rng), pitch(rng)};
    CHECK(near(planar_bilinear_weights(yp, grid).sum(), 1.0, 1e-15));
    const InterpolationWeights w = spherical_bilinear_weights(yp, grid);
    const CellCorners c = grid.locate_cell(yp);
    double theta_max = 0;
    for (std::size_t i1 : {c.a1, c.a2, c.a3, c.a4}) {
      for (std::size_t i2 : {c.a1, c.a2, c.a3, c.a4}) {
        theta_max = std::max(theta_max, arc_angle(grid.gaze(i1).vec(), grid.gaze(i2).vec()));
      }
    }
    const double bound = 1.0 / std::pow(std::cos(theta_max / 2), 2);
    CHECK(w.sum() >= 1.0 - 1e-12);
    CHECK(w.sum() <= bound + 1e-12);
    for (const auto& e : w.entries) CHECK(std::isfinite(e.weight));
  }
}

TEST_CASE("weights are continuous across cell boundaries") {
  const AnchorGrid grid(30, 30);
  auto dense = [&](const YawPitch& yp) {
    const InterpolationWeights w = spherical_bilinear_weights(yp, grid);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
    for (const auto& e : w.entries) v(static_cast<Eigen::Index>(e.index)) += e.weight;
    // The +-180 meridian and the poles are duplicated anchors; fold them so that
    // equal directions compare equal.
    for (std::size_t k = 0; k < grid.size(); ++k) {
      for (std::size_t j = 0; j < k; ++j) {
        if ((grid.gaze(j).vec() - grid.gaze(k).vec()).norm() < 1e-12) {
          v(static_cast<Eigen::Index>(j)) += v(static_cast<Eigen::Index>(k));
          v(static_cast<Eigen::Index>(k)) = 0;
          break;
        }
      }
    }
    return v;
  };
  const double eps = 1e-9;
  // Paths crossing a yaw line, a pitch line, the seam and a polar row.
  for (double pitch = -89.5; pitch <= 89.5; pitch += 0.5) {
    for (double yaw : {-150.0, -30.0, 0.0, 30.0, 120.0}) {
      CHECK((dense({yaw - eps, pitch}) - dense({yaw + eps, pitch})).cwiseAbs().maxCoeff() < 1e-6);
    }
    CHECK((dense({-180.0, pitch}) - dense({180.0, pitch})).cwiseAbs().maxCoeff() < 1e-6);
  }
  for (double yaw = -179.5; yaw <= 179.5; yaw += 0.5) {
    for (double pitch : {-60.0, -30.0, 0.0, 30.0, 60.0}) {
      CHECK((dense({yaw, pitch - eps}) - dense({yaw, pitch + eps})).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("planar-bilinear examples") {
  const AnchorGrid grid(30, 30);
  const InterpolationWeights c = planar_bilinear_weights(YawPitch{15, 15}, grid);
  for (const auto& e : c.entries) CHECK(e.weight == 0.25);
  const InterpolationWeights a = planar_bilinear_weights(YawPitch{0, 0}, grid);
  CHECK(a.entries[0].weight == 1.0);
}

TEST_CASE("global linear weights") {
  const std::vector<GazeVector> two{GazeVector(0, 0, 1), GazeVector(1, 0, 0)};
  InterpolationWeights w = global_linear_weights(GazeVector(0, 0, 1), two);
  CHECK(w.entries.size() == 2);
  CHECK(w.entries[0].weight == 1.0);
  CHECK(w.entries[1].weight == 0.0);
  w = global_linear_weights(yawpitch_to_vec({45, 0}), two);
  CHECK(near(w.entries[0].weight, 0.5, 1e-15));
  CHECK(near(w.entries[1].weight, 0.5, 1e-15));

  const std::vector<GazeVector> opposite{GazeVector(0, 0, 1), GazeVector(0, 0, -1)};
  const GazeVector g = yawpitch_to_vec({0, 60});  // <g, (0,0,1)> = 0.5
  CHECK(test::error_kind_of([&] { global_linear_weights(g, opposite); }) == ErrorKind::kSingular);

  // On the default grid the cosine sum vanishes on the z = 0 plane.
  const AnchorGrid grid(30, 30);
  CHECK(test::error_kind_of([&] { global_linear_weights(GazeVector(1, 0, 0), grid); }) ==
        ErrorKind::kSingular);
  const InterpolationWeights full = global_linear_weights(yawpitch_to_vec({10, 10}), grid);
  CHECK(full.entries.size() == 91);
  CHECK(near(full.sum(), 1.0, 1e-12));
}

TEST_CASE("interpolate_embedding is linear with no renormalization") {
  std::mt19937_64 rng(13);
  Eigen::MatrixXd emb = test::random_matrix(4, 5, rng);
  InterpolationWeights w;
  w.entries = {{0, 1.0}, {1, 0.0}, {2, 0.0}, {3, 0.0}};
  CHECK(interpolate_embedding(w, emb) == Eigen::VectorXd(emb.row(0).transpose()));

  emb.rowwise() = emb.row(0);
  w.entries = {{0, 0.3}, {1, 0.4}, {2, 0.2}, {3, 0.25}};
  CHECK((interpolate_embedding(w, emb) - w.sum() * Eigen::VectorXd(emb.row(0).transpose()))
            .norm() < 1e-14);

  Eigen::MatrixXd pair(2, 3);
  pair.row(0) << 1, -2, 3;
  pair.row(1) = -pair.row(0);
  w.entries = {{0, 0.5}, {1, 0.5}};
  CHECK(interpolate_embedding(w, pair).norm() == 0.0);

  w.entries = {{7, 1.0}};
  CHECK(test::error_kind_of([&] { interpolate_embedding(w, pair); }) == ErrorKind::kInvariant);
}

TEST_CASE("geo loss exact cases") {
  const AnchorGrid grid(30, 30);
  Eigen::MatrixXd emb(91, 3);
  for (std::size_t k = 0; k < 91; ++k) emb.row(static_cast<Eigen::Index>(k)) = grid.gaze(k).vec();
  const GeoLoss zero = geo_loss(grid.gazes(), emb);
  CHECK(zero.loss == 0.0);
  CHECK(zero.grad.cwiseAbs().maxCoeff() == 0.0);

  const std::vector<GazeVector> g{GazeVector(0, 0, 1), GazeVector(1, 0, 0)};
  Eigen::MatrixXd same(2, 2);
  same << 1, 0, 2, 0;
  CHECK(geo_loss(g, same).loss == 0.5);

  Eigen::MatrixXd bad = same;
  bad.row(1).setZero();
  CHECK(test::error_kind_of([&] { geo_loss(g, bad); }) == ErrorKind::kDegenerate);
  CHECK(test::error_kind_of([&] { geo_loss(std::span(g).first(1), same.topRows(1)); }) ==
        ErrorKind::kShape);
}

TEST_CASE("geo loss is invariant to rescaling any single embedding") {
  std::mt19937_64 rng(14);
  const AnchorGrid grid(30, 30);
  Eigen::MatrixXd emb = test::random_matrix(91, 16, rng);
  const double base = geo_loss(grid.gazes(), emb).loss;
  for (int k : {0, 17, 90}) {
    Eigen::MatrixXd scaled = emb;
    scaled.row(k) *= 7.5;
    CHECK(near(geo_loss(grid.gazes(), scaled).loss, base, 1e-14));
  }
}

TEST_CASE("anchor set JSON round trip") {
  const AnchorSet set = build_anchor_grid(90, 90, 4, 3);
  const nlohmann::ordered_json doc = to_json(set);
  CHECK(doc.begin().key() == "yaw_step");
  const AnchorSet back = anchor_set_from_json(nlohmann::json::parse(doc.dump()));
  CHECK(back.grid.size() == 15);
  CHECK(back.embeddings == set.embeddings);
}
