// Copyright 2026 The lambdarc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "lambdarc/model.hpp"

namespace lambdarc {

enum class GopKind { RandomAccess, LowDelayP, LowDelayB };

inline bool is_low_delay(GopKind k) { return k != GopKind::RandomAccess; }

inline std::string_view gop_kind_name(GopKind k) {
  switch (k) {
    case GopKind::RandomAccess: return "ra";
    case GopKind::LowDelayP: return "ldp";
    default: return "ldb";
  }
}

inline constexpr int kMaxFrameLevel = 4;
inline constexpr int kNumFrameLevels = kMaxFrameLevel + 1;  // level 0 = intra

struct FrameSlot {
  int decode_index;      // 1-based position in coding order
  int poc;               // display offset within the GOP
  int level;             // 1..4 (0 is reserved for intra frames)
  int qp_offset;
  double lambda_weight;  // the structure's lambda multiplier
  int ref_distance;      // frames to the nearest reference
};

struct GopStructure {
  GopKind kind;
  int gop_length;
  std::vector<FrameSlot> slots;
};

/// Fixed hierarchical coding structures. LDP and LDB share one table; the
/// kind is carried through for labelling only.
inline GopStructure build_structure(GopKind kind) {
  if (kind == GopKind::RandomAccess) {
    return GopStructure{kind,
                        8,
                        {
                            {1, 8, 1, 1, 0.442, 8},
                            {2, 4, 2, 2, 0.3536, 4},
                            {3, 2, 3, 3, 0.3536, 2},
                            {4, 1, 4, 4, 0.68, 1},
                            {5, 3, 4, 4, 0.68, 1},
                            {6, 6, 3, 3, 0.3536, 2},
                            {7, 5, 4, 4, 0.68, 1},
                            {8, 7, 4, 4, 0.68, 1},
                        }};
  }
  return GopStructure{kind,
                      4,
                      {
                          {1, 1, 3, 3, 0.4624, 1},
                          {2, 2, 2, 2, 0.4624, 2},
                          {3, 3, 3, 3, 0.4624, 1},
                          {4, 4, 1, 1, 0.578, 4},
                      }};
}

/// Per-level model coefficients plus the relative-efficiency vector d.
/// Level 0 starts as a copy of level 1 (intra frames have no fitted model of
/// their own at init time).
struct LevelInitTable {
  std::array<ModelCoefficients, kNumFrameLevels> coeffs{};
  std::array<double, kNumFrameLevels> relative_efficiency{};
};

inline constexpr std::array<double, 4> kRaLevelRatios{4.2, 3.0, 2.0, 1.0};  // levels 1..4
inline constexpr double kRaCenterAlpha = 4.4;   // at frame level 2
inline constexpr double kRaCenterGamma = 0.005;
inline constexpr double kLdAlpha = 2.4;
inline constexpr double kLdGamma = 0.005;
inline constexpr double kInitBeta = -1.35;
inline constexpr double kGammaCapFraction = 0.1;  // gamma <= 0.1 * target bpp

inline LevelInitTable init_coefficients(GopKind kind, double target_bpp) {
  if (!(target_bpp > 0.0)) throw std::invalid_argument("init_coefficients: target_bpp must be positive");
  const double gamma_cap = kGammaCapFraction * target_bpp;
  LevelInitTable table;
  if (kind == GopKind::RandomAccess) {
    for (int level = 1; level <= 4; ++level) {
      const double d = kRaLevelRatios[level - 1] / kRaLevelRatios[1];  // center at level 2
      table.coeffs[level] = {kRaCenterAlpha * d, kInitBeta,
                             std::min(kRaCenterGamma * d, gamma_cap), 1.0};
      table.relative_efficiency[level] = d;
    }
  } else {
    for (int level = 1; level <= 4; ++level) {
      table.coeffs[level] = {kLdAlpha, kInitBeta, std::min(kLdGamma, gamma_cap), 1.0};
      table.relative_efficiency[level] = 1.0;
    }
  }
  table.coeffs[0] = table.coeffs[1];
  table.relative_efficiency[0] = table.relative_efficiency[1];
  return table;
}

/// Pairwise C ratios, ratios[i][j] = c[i] / c[j]. Diagnostic only.
inline std::vector<std::vector<double>> level_efficiency_check(std::span<const double> fitted_c) {
  if (fitted_c.size() < 2) {
    throw std::invalid_argument("level_efficiency_check: need at least two levels");
  }
  std::vector<std::vector<double>> ratios(fitted_c.size(), std::vector<double>(fitted_c.size()));
  for (std::size_t i = 0; i < fitted_c.size(); ++i) {
    for (std::size_t j = 0; j < fitted_c.size(); ++j) ratios[i][j] = fitted_c[i] / fitted_c[j];
  }
  return ratios;
}

}  // namespace lambdarc
