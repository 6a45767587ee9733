// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

// Reference values produced by tests/oracles/oracles.py (mpmath / scipy),
// frozen here so the C++ suite does not need Python at test time.

#pragma once

#include <array>

namespace oracle {

inline constexpr std::array<std::array<double, 3>, 2> kFibonacci2 = {{
    {0.86602540378443865, 0.5, 0.0},
    {-0.6385801803758555, -0.5, 0.58499175484030529},
}};
inline constexpr double kFibonacci256MinAngleDeg = 11.08747365484635;
inline constexpr double kFibonacci256CentroidNorm = 0.00019758747928673036;

struct SphericalCase {
  double yaw, pitch;
  std::array<std::array<double, 2>, 4> corners;
  std::array<double, 4> weights;
};

inline constexpr std::array<SphericalCase, 6> kSpherical = {{
    {15, 15, {{{0, 0}, {30, 0}, {0, 30}, {30, 30}}},
     {0.26794919243112271, 0.26794919243112271, 0.26500152455006357, 0.26615111402673727}},
    {10, 20, {{{0, 0}, {30, 0}, {0, 30}, {30, 30}}},
     {0.23756469845553883, 0.12061475842818323, 0.4642420608663306, 0.23568610734563856}},
    {175, 0, {{{150, 0}, {180, 0}, {150, 30}, {180, 30}}},
     {0.17431148549531635, 0.84523652348139887, 0.0, 0.0}},
    {15, 0, {{{0, 0}, {30, 0}, {0, 30}, {30, 30}}},
     {0.51763809020504152, 0.51763809020504152, 0.0, 0.0}},
    {-100, 75, {{{-120, 60}, {-90, 60}, {-120, 90}, {-90, 90}}},
     {0.17260148326455439, 0.34891882237499864, 0.17254603006834717, 0.34509206013669435}},
    {45, -80, {{{30, -90}, {60, -90}, {30, -60}, {60, -60}}},
     {0.34202014332566873, 0.34202014332566873, 0.17398605470725033, 0.17625527382685969}},
}};

// Worst reconstruction error of the spherical-bilinear weights on the 30 deg
// grid: 1000 random targets, and a dense 0.5 deg sweep of one yaw column.
inline constexpr double kSphericalWorstRandomDeg = 0.8660507098331225;
inline constexpr double kSphericalWorstSweepDeg = 0.8679464888646024;

// lr = 0.05, 64 steps per epoch, 30 epochs, 3 warm-up epochs.
inline constexpr std::array<std::array<double, 2>, 8> kLrSchedule = {{
    {0, 0.0},
    {1, 0.00026041666666666667},
    {96, 0.025},
    {191, 0.049739583333333333},
    {192, 0.05},
    {193, 0.049999958683629573},
    {1056, 0.025},
    {1919, 4.1316370426719885e-8},
}};

inline constexpr int kTrainableParams = 12227;
inline constexpr int kFrozenParams = 14464;
inline constexpr int kTotalParams = 26691;

// Mean angle between (0,0,1) and labels uniform on the front patch.
inline constexpr double kPatchMeanAngleToForwardDeg = 54.178748479576576;

// Rank correlation of x = [1, 2, 2, 3] and y = [1, 2, 3, 4], ties averaged.
inline constexpr double kSpearmanTies = 0.9486832980505139;

}  // namespace oracle
