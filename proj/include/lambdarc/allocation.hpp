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
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "lambdarc/gop.hpp"
#include "lambdarc/model.hpp"
#include "lambdarc/numeric.hpp"

namespace lambdarc {

inline constexpr std::int64_t kMinRateBits = 100;  // per-frame floor

/// Sequence-level allocation ledgers. All rates in bpp.
///  - r_am: per-frame amortized intra overhead for the active intra period.
///  - overflow_accum: cumulative non-intra (actual - target), fed back
///    through the smooth window.
///  - frames_left_in_intra_period: non-intra frames still paying r_am; when
///    it reaches zero r_am reverts to zero until the next intra frame.
struct AllocatorState {
  double r_am = 0.0;
  double overflow_accum = 0.0;
  int frames_left_in_intra_period = 0;
  int smooth_window = 40;
  int intra_period = 32;
  double r_avg = 0.1;
};

/// Raw GOP budget in bpp*frames; may be negative, callers clamp to
/// n_gop * minRate.
inline double gop_budget(const AllocatorState& st, int n_gop) {
  if (n_gop < 1) throw std::invalid_argument("gop_budget: n_gop must be >= 1");
  return (st.r_avg - st.r_am - st.overflow_accum / st.smooth_window) * n_gop;
}

/// Retires the window compensation a committed GOP budget has scheduled:
/// R_of paid into a budget stops being owed. Without this the R_of/SW
/// deduction repeats forever and the run rate settles below target.
inline void schedule_compensation(AllocatorState& st, int n_gop) {
  st.overflow_accum -= st.overflow_accum / st.smooth_window * n_gop;
}

/// Starts a new amortization span after an intra frame: r_i0 is the frame's
/// inter-style target, r_i2 its actual rate. period_frames <= 0 means the
/// nominal intra period.
inline void amortize_intra(AllocatorState& st, double r_i0, double r_i2, int period_frames = 0) {
  if (period_frames <= 0) period_frames = st.intra_period;
  if (period_frames < 2) {
    if (r_i2 != r_i0) {
      throw std::invalid_argument("amortize_intra: cannot amortize a non-zero overhead in a one-frame period");
    }
    st.r_am = 0.0;
    st.frames_left_in_intra_period = 0;
    return;
  }
  st.r_am = (r_i2 - r_i0) / static_cast<double>(period_frames - 1);
  st.frames_left_in_intra_period = period_frames - 1;
}

/// Books one encoded frame. Intra frames record r_i3 = r_i0, so they add
/// nothing to the window and do not pay amortization.
inline void record_frame(AllocatorState& st, double r_i0, double r_actual, bool is_intra) {
  if (is_intra) return;
  st.overflow_accum += r_actual - r_i0;
  if (st.frames_left_in_intra_period > 0 && --st.frames_left_in_intra_period == 0) {
    st.r_am = 0.0;
  }
}

/// Frame-level allocation weights per level; level 0 is unused (intra frames
/// are budgeted standalone).
inline std::array<double, kNumFrameLevels> omega_defaults(GopKind kind) {
  if (kind == GopKind::RandomAccess) return {1.0, 1.0, 2.5, 4.5, 10.0};
  return {1.0, 1.0, 4.0, 5.0, 5.0};
}

struct PictureModel {
  ModelCoefficients coeffs;
  double omega;
  int level;
};

struct FrameBudget {
  double target_bpp;        // R_i0 after the minRate floor
  double lambda_weight;     // omega
  int level;
  std::int64_t min_rate_bits;
};

struct GopAllocation {
  std::vector<FrameBudget> budgets;
  double central_lambda = 0.0;
  bool floor_limited = false;  // every frame pinned at minRate
};

inline constexpr double kCentralLambdaLo = 1e-4;
inline constexpr double kCentralLambdaHi = 1e6;
inline constexpr int kCentralLambdaIters = 100;

/// Weighted picture-level allocation: finds the central lambda whose
/// per-frame rates R_i = max((lambda*omega_i/alpha_i)^(1/beta_i) - gamma_i,
/// minRate) sum to r_gop, by bisection on the monotone total.
inline GopAllocation allocate_pictures(std::span<const PictureModel> pics, double r_gop,
                                       double min_rate_bpp,
                                       std::int64_t min_rate_bits = kMinRateBits) {
  if (pics.empty()) throw std::invalid_argument("allocate_pictures: no pictures");

  auto total_rate = [&](double lambda) {
    double sum = 0.0;
    for (const PictureModel& p : pics) {
      sum += std::max(bpp_from_lambda(p.coeffs, lambda * p.omega), min_rate_bpp);
    }
    return sum;
  };

  GopAllocation out;
  const double at_hi = total_rate(kCentralLambdaHi);
  if (r_gop <= at_hi) {
    // Asking for less than the floor total: every frame sits at minRate.
    out.central_lambda = kCentralLambdaHi;
    out.floor_limited = true;
  } else if (r_gop >= total_rate(kCentralLambdaLo)) {
    out.central_lambda = kCentralLambdaLo;
  } else {
    out.central_lambda =
        bisect_decreasing(total_rate, kCentralLambdaLo, kCentralLambdaHi, r_gop,
                          kCentralLambdaIters);
  }
  out.budgets.reserve(pics.size());
  for (const PictureModel& p : pics) {
    const double bpp =
        std::max(bpp_from_lambda(p.coeffs, out.central_lambda * p.omega), min_rate_bpp);
    out.budgets.push_back(FrameBudget{bpp, p.omega, p.level, min_rate_bits});
  }
  return out;
}

/// Pre-encode intra budget: kappa times the inter-style estimate, capped at
/// half the intra period's total target.
inline double intra_target(const AllocatorState& st, double p_frame_estimate, double kappa = 4.0,
                           int period_frames = 0) {
  if (!(p_frame_estimate > 0.0)) {
    throw std::invalid_argument("intra_target: estimate must be positive");
  }
  if (period_frames <= 0) period_frames = st.intra_period;
  return std::min(kappa * p_frame_estimate, 0.5 * period_frames * st.r_avg);
}

}  // namespace lambdarc
