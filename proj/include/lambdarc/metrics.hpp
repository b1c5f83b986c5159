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
#include <span>
#include <stdexcept>
#include <vector>

#include "lambdarc/numeric.hpp"

namespace lambdarc {

inline constexpr double kPsnrCapDb = 100.0;

/// Absolute rate error in percent of target.
inline double delta_r(double r_out, double r_target) {
  if (!(r_target > 0.0)) throw std::domain_error("delta_r: target must be positive");
  return std::abs(r_out - r_target) / r_target * 100.0;
}

/// 8-bit PSNR; zero (or vanishing) MSE maps to the cap.
inline double psnr_from_mse(double mse, double cap_db = kPsnrCapDb) {
  if (!(mse > 0.0)) return cap_db;
  return std::min(cap_db, 10.0 * std::log10(255.0 * 255.0 / mse));
}

struct RdPoint {
  double bitrate;  // bits/second
  double psnr_db;
};

enum class BdFitKind { CubicPolynomial, PiecewiseCubicHermite };

namespace detail {

struct BdCurve {
  std::vector<double> psnr;      // ascending
  std::vector<double> log_rate;  // log10(bitrate)
};

inline BdCurve prepare_curve(std::span<const RdPoint> points, const char* who) {
  if (points.size() < 4) {
    throw std::invalid_argument(std::string(who) + ": need at least 4 rate points");
  }
  std::vector<RdPoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const RdPoint& a, const RdPoint& b) { return a.psnr_db < b.psnr_db; });
  BdCurve curve;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!(sorted[i].bitrate > 0.0)) {
      throw std::invalid_argument(std::string(who) + ": bitrates must be positive");
    }
    if (i > 0 && !(sorted[i].psnr_db > sorted[i - 1].psnr_db)) {
      throw std::invalid_argument(std::string(who) + ": PSNR values must be distinct");
    }
    curve.psnr.push_back(sorted[i].psnr_db);
    curve.log_rate.push_back(std::log10(sorted[i].bitrate));
  }
  return curve;
}

/// Mean of the cubic least-squares fit of log-rate over [lo, hi], with the
/// abscissa shifted by `shift` for conditioning.
inline double cubic_mean_log_rate(const BdCurve& curve, double lo, double hi, double shift) {
  std::vector<double> x(curve.psnr.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = curve.psnr[i] - shift;
  const std::vector<double> coeffs = polyfit(x, curve.log_rate, 3);
  return polyint(coeffs, lo - shift, hi - shift) / (hi - lo);
}

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolant integral over
/// [lo, hi], divided by the interval length.
inline double pchip_mean_log_rate(const BdCurve& curve, double lo, double hi) {
  const std::vector<double>& x = curve.psnr;
  const std::vector<double>& y = curve.log_rate;
  const std::size_t n = x.size();
  std::vector<double> h(n - 1), delta(n - 1), m(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  m[0] = delta[0];
  m[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      m[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  // Integrate each Hermite segment clipped to [lo, hi] with 8-point
  // Gauss-Legendre (exact for cubics).
  static constexpr double kNodes[4] = {-0.8611363115940526, -0.3399810435848563,
                                       0.3399810435848563, 0.8611363115940526};
  static constexpr double kWeights[4] = {0.3478548451374538, 0.6521451548625461,
                                         0.6521451548625461, 0.3478548451374538};
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = std::max(lo, x[i]);
    const double b = std::min(hi, x[i + 1]);
    if (b <= a) continue;
    auto hermite = [&](double xx) {
      const double s = (xx - x[i]) / h[i];
      const double s2 = s * s, s3 = s2 * s;
      return y[i] * (2 * s3 - 3 * s2 + 1) + h[i] * m[i] * (s3 - 2 * s2 + s) +
             y[i + 1] * (-2 * s3 + 3 * s2) + h[i] * m[i + 1] * (s3 - s2);
    };
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int g = 0; g < 4; ++g) integral += kWeights[g] * hermite(mid + half * kNodes[g]) * half;
  }
  return integral / (hi - lo);
}

}  // namespace detail

/// Average bitrate difference of test against anchor at equal quality, in
/// percent; negative means the test curve saves bits.
inline double bd_rate(std::span<const RdPoint> anchor, std::span<const RdPoint> test,
                      BdFitKind fit = BdFitKind::CubicPolynomial) {
  const detail::BdCurve a = detail::prepare_curve(anchor, "bd_rate anchor");
  const detail::BdCurve t = detail::prepare_curve(test, "bd_rate test");
  const double lo = std::max(a.psnr.front(), t.psnr.front());
  const double hi = std::min(a.psnr.back(), t.psnr.back());
  if (!(hi > lo)) throw std::domain_error("bd_rate: PSNR ranges do not overlap");

  double mean_a, mean_t;
  if (fit == BdFitKind::CubicPolynomial) {
    const double shift = 0.5 * (lo + hi);
    mean_a = detail::cubic_mean_log_rate(a, lo, hi, shift);
    mean_t = detail::cubic_mean_log_rate(t, lo, hi, shift);
  } else {
    mean_a = detail::pchip_mean_log_rate(a, lo, hi);
    mean_t = detail::pchip_mean_log_rate(t, lo, hi);
  }
  return (std::pow(10.0, mean_t - mean_a) - 1.0) * 100.0;
}

}  // namespace lambdarc
