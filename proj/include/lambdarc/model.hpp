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

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lambdarc {

/// Rate model for one frame level: lambda = alpha * (bpp + gamma)^beta.
/// decay scales the coefficient-update strengths and shrinks as the level
/// accumulates observations.
struct ModelCoefficients {
  double alpha = 4.4;    // > 0
  double beta = -1.35;   // < 0
  double gamma = 0.005;  // >= 0, bpp units
  double decay = 1.0;    // (0, 1]
};

/// Ground-truth distortion curve D(R) = max(0, c*(R + b)^-k - t).
/// The rate axis is bpp; c carries MSE units, b shifts the rate axis,
/// t is the distortion-axis intercept.
struct RdGroundTruth {
  double c = 1.0;  // > 0
  double k = 1.0;  // > 0, typically near 1
  double b = 0.0;  // >= 0
  double t = 0.0;  // >= 0
};

/// QP = c1 * ln(lambda) + c2.
struct QpLambdaMap {
  double c1 = 4.3;
  double c2 = 14.6;
};

struct VideoGeometry {
  int width = 416;
  int height = 240;
  double frame_rate = 30.0;

  double pixels() const { return static_cast<double>(width) * static_cast<double>(height); }
  double bpp_from_bits(double bits) const { return bits / pixels(); }
  double bits_from_bpp(double bpp) const { return bpp * pixels(); }
  double bpp_from_bitrate(double bits_per_second) const {
    return bits_per_second / (frame_rate * pixels());
  }
  double bitrate_from_bpp(double bpp) const { return bpp * frame_rate * pixels(); }
};

inline constexpr int kQpMin = 0;
inline constexpr int kQpMax = 51;
inline constexpr double kLambdaMin = 0.01;
inline constexpr double kLambdaMax = 1.0e5;

inline double clamp_lambda(double lambda) { return std::clamp(lambda, kLambdaMin, kLambdaMax); }
inline int clamp_qp_range(int qp) { return std::clamp(qp, kQpMin, kQpMax); }

inline double lambda_from_bpp(const ModelCoefficients& m, double bpp) {
  if (!(bpp + m.gamma > 0.0)) {
    throw std::domain_error("lambda_from_bpp: bpp + gamma must be positive");
  }
  return m.alpha * std::pow(bpp + m.gamma, m.beta);
}

/// Inverse of lambda_from_bpp, clamped at zero from below.
inline double bpp_from_lambda(const ModelCoefficients& m, double lambda) {
  return std::max(0.0, std::pow(lambda / m.alpha, 1.0 / m.beta) - m.gamma);
}

/// Rounds half away from zero. Range clamping to [0, 51] is the caller's job.
inline int qp_from_lambda(const QpLambdaMap& map, double lambda) {
  return static_cast<int>(std::lround(map.c1 * std::log(lambda) + map.c2));
}

inline double lambda_from_qp(const QpLambdaMap& map, double qp) {
  return std::exp((qp - map.c2) / map.c1);
}

inline double distortion_from_rate(const RdGroundTruth& gt, double rate) {
  if (!(rate + gt.b > 0.0)) {
    throw std::domain_error("distortion_from_rate: rate + b must be positive");
  }
  return std::max(0.0, gt.c * std::pow(rate + gt.b, -gt.k) - gt.t);
}

/// Negative slope of the distortion curve (clamp-free form).
inline double lambda_from_rate(const RdGroundTruth& gt, double rate) {
  if (!(rate + gt.b > 0.0)) {
    throw std::domain_error("lambda_from_rate: rate + b must be positive");
  }
  return gt.c * gt.k * std::pow(rate + gt.b, -gt.k - 1.0);
}

/// Rate at which the curve's slope equals -lambda, clamped at zero.
inline double rate_from_lambda_gt(const RdGroundTruth& gt, double lambda) {
  return std::max(0.0, std::pow(gt.c * gt.k / lambda, 1.0 / (gt.k + 1.0)) - gt.b);
}

}  // namespace lambdarc
