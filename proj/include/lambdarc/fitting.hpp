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
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lambdarc/model.hpp"
#include "lambdarc/numeric.hpp"

namespace lambdarc {

/// One measured operating point: distortion in MSE, rate in bpp.
struct RdSample {
  int qp;
  double bpp;
  double mse;
};

enum class ModelKind { Classic, Proposed };

inline std::string_view model_kind_name(ModelKind k) {
  return k == ModelKind::Classic ? "classic" : "proposed";
}

struct FitResult {
  ModelKind model_kind;
  double c = 0.0;
  double k = 0.0;
  double b = 0.0;  // 0 for the classic model
  double t = 0.0;  // 0 for the classic model
  double r_squared = 0.0;
  double rmse = 0.0;
  bool converged = false;
  int iterations = 0;

  double predict(double bpp) const { return c * std::pow(bpp + b, -k) - t; }
};

class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// r^2 and RMSE of predictions against observations.
inline std::pair<double, double> goodness(std::span<const double> actual,
                                          std::span<const double> predicted) {
  if (actual.size() != predicted.size() || actual.size() < 2) {
    throw std::invalid_argument("goodness: need two equally sized series of length >= 2");
  }
  double mean = 0.0;
  for (double v : actual) mean += v;
  mean /= static_cast<double>(actual.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    ss_tot += (actual[i] - mean) * (actual[i] - mean);
  }
  if (ss_tot == 0.0) throw DegenerateDataError("goodness: zero total variance");
  return {1.0 - ss_res / ss_tot, std::sqrt(ss_res / static_cast<double>(actual.size()))};
}

namespace detail {

inline constexpr int kFitIterationCap = 2000;
inline constexpr double kFitRelTol = 1e-10;
inline constexpr double kLogParamFloor = -60.0;  // exp(-60) ~ 9e-27, effectively zero
inline constexpr double kLogParamCeil = 60.0;

inline void validate_samples(std::span<const RdSample> samples, std::size_t min_count,
                             const char* who) {
  if (samples.size() < min_count) {
    throw DegenerateDataError(std::string(who) + ": need at least " +
                              std::to_string(min_count) + " samples");
  }
  for (const RdSample& s : samples) {
    if (!(s.bpp > 0.0) || s.mse < 0.0) {
      throw DegenerateDataError(std::string(who) + ": samples need bpp > 0 and mse >= 0");
    }
  }
  const double bpp0 = samples[0].bpp, mse0 = samples[0].mse;
  bool bpp_varies = false, mse_varies = false;
  for (const RdSample& s : samples) {
    bpp_varies |= s.bpp != bpp0;
    mse_varies |= s.mse != mse0;
  }
  if (!bpp_varies) throw DegenerateDataError(std::string(who) + ": all bpp values equal");
  if (!mse_varies) throw DegenerateDataError(std::string(who) + ": all mse values equal");
}

inline double clamp_log(double v) { return std::clamp(v, kLogParamFloor, kLogParamCeil); }

/// Sum of squared residuals in the untransformed distortion domain.
inline double proposed_sse(std::span<const RdSample> samples, double c, double k, double b,
                           double t) {
  double sse = 0.0;
  for (const RdSample& s : samples) {
    const double r = c * std::pow(s.bpp + b, -k) - t - s.mse;
    sse += r * r;
  }
  return sse;
}

/// Log-domain init for (C, K): ln mse = ln C - K ln bpp over mse > 0 points.
inline std::pair<double, double> classic_init(std::span<const RdSample> samples) {
  std::vector<double> lx, ly;
  for (const RdSample& s : samples) {
    if (s.mse > 0.0) {
      lx.push_back(std::log(s.bpp));
      ly.push_back(std::log(s.mse));
    }
  }
  if (lx.size() < 2) return {1.0, 1.0};
  LinearFit fit;
  try {
    fit = linear_regression(lx, ly);
  } catch (const std::invalid_argument&) {
    return {1.0, 1.0};
  }
  const double k0 = std::clamp(-fit.slope, 0.05, 10.0);
  const double c0 = std::clamp(std::exp(fit.intercept), 1e-12, 1e12);
  return {c0, k0};
}

}  // namespace detail

/// Least-squares fit of D = C * bpp^-K.
inline FitResult fit_classic(std::span<const RdSample> samples) {
  detail::validate_samples(samples, 3, "fit_classic");
  const auto [c0, k0] = detail::classic_init(samples);

  auto objective = [&](std::span<const double> p) {
    const double c = std::exp(detail::clamp_log(p[0]));
    const double k = std::exp(detail::clamp_log(p[1]));
    return detail::proposed_sse(samples, c, k, 0.0, 0.0);
  };
  const double start[2] = {std::log(c0), std::log(k0)};
  SimplexResult best = nelder_mead(objective, start, 0.3, detail::kFitRelTol,
                                   detail::kFitIterationCap);
  // polish from the first optimum
  SimplexResult polish = nelder_mead(objective, best.x, 0.05, detail::kFitRelTol,
                                     detail::kFitIterationCap);
  polish.iterations += best.iterations;
  if (polish.value <= best.value) best = std::move(polish);

  FitResult res;
  res.model_kind = ModelKind::Classic;
  res.c = std::exp(detail::clamp_log(best.x[0]));
  res.k = std::exp(detail::clamp_log(best.x[1]));
  res.converged = best.converged;
  res.iterations = best.iterations;
  std::vector<double> actual, pred;
  for (const RdSample& s : samples) {
    actual.push_back(s.mse);
    pred.push_back(res.predict(s.bpp));
  }
  std::tie(res.r_squared, res.rmse) = goodness(actual, pred);
  return res;
}

/// Constrained least-squares fit of D = C*(bpp + B)^-K - T with C, K > 0 and
/// B, T >= 0 (positivity via log reparameterization; B and T may converge to
/// the numerical floor, i.e. effectively zero).
inline FitResult fit_proposed(std::span<const RdSample> samples) {
  detail::validate_samples(samples, 5, "fit_proposed");

  double min_bpp = samples[0].bpp, min_pos_mse = -1.0;
  for (const RdSample& s : samples) {
    min_bpp = std::min(min_bpp, s.bpp);
    if (s.mse > 0.0 && (min_pos_mse < 0.0 || s.mse < min_pos_mse)) min_pos_mse = s.mse;
  }
  if (min_pos_mse < 0.0) min_pos_mse = 1e-6;

  auto objective = [&](std::span<const double> p) {
    const double c = std::exp(detail::clamp_log(p[0]));
    const double k = std::exp(detail::clamp_log(p[1]));
    const double b = std::exp(detail::clamp_log(p[2]));
    const double t = std::exp(detail::clamp_log(p[3]));
    return detail::proposed_sse(samples, c, k, b, t);
  };

  const FitResult classic = fit_classic(samples);
  const double b0 = std::max(0.05 * min_bpp, 1e-12);
  const double t0 = std::max(0.5 * min_pos_mse, 1e-12);

  // Start 1: classic (C, K) with the heuristic B, T offsets.
  const double start1[4] = {std::log(classic.c), std::log(classic.k), std::log(b0), std::log(t0)};
  // Start 2: the classic solution itself, B and T at the log floor. The
  // classic model is nested in this one, so the best reachable value can
  // never be worse than the classic SSE.
  const double start2[4] = {std::log(classic.c), std::log(classic.k), detail::kLogParamFloor,
                            detail::kLogParamFloor};

  SimplexResult best = nelder_mead(objective, start1, 0.4, detail::kFitRelTol,
                                   detail::kFitIterationCap);
  int total_iters = best.iterations;
  for (std::span<const double> start : {std::span<const double>(start2, 4),
                                        std::span<const double>(best.x)}) {
    SimplexResult next =
        nelder_mead(objective, start, 0.15, detail::kFitRelTol, detail::kFitIterationCap);
    total_iters += next.iterations;
    if (next.value < best.value) best = std::move(next);
  }

  FitResult res;
  res.model_kind = ModelKind::Proposed;
  res.c = std::exp(detail::clamp_log(best.x[0]));
  res.k = std::exp(detail::clamp_log(best.x[1]));
  res.b = std::exp(detail::clamp_log(best.x[2]));
  res.t = std::exp(detail::clamp_log(best.x[3]));
  res.converged = best.converged;
  res.iterations = total_iters;
  std::vector<double> actual, pred;
  for (const RdSample& s : samples) {
    actual.push_back(s.mse);
    pred.push_back(res.predict(s.bpp));
  }
  std::tie(res.r_squared, res.rmse) = goodness(actual, pred);
  return res;
}

struct QpRange {
  int lo;
  int hi;
};

inline constexpr std::array<QpRange, 4> kDefaultQpRanges{
    QpRange{4, 51}, QpRange{4, 22}, QpRange{17, 37}, QpRange{32, 51}};

/// One row of the per-range fit report. result is empty when the range could
/// not be fitted; note then carries the reason.
struct RangeFit {
  QpRange range;
  ModelKind kind;
  std::optional<FitResult> result;
  std::string note;
};

/// Fits both models to every QP sub-range. Per-range failures are reported
/// inline and do not affect the other ranges.
inline std::vector<RangeFit> fit_report(std::span<const RdSample> samples,
                                        std::span<const QpRange> ranges) {
  std::vector<RangeFit> report;
  for (const QpRange& range : ranges) {
    std::vector<RdSample> sub;
    for (const RdSample& s : samples) {
      if (s.qp >= range.lo && s.qp <= range.hi) sub.push_back(s);
    }
    for (ModelKind kind : {ModelKind::Classic, ModelKind::Proposed}) {
      RangeFit row{range, kind, std::nullopt, {}};
      if (sub.size() < 5) {
        row.note = "insufficient data";
      } else {
        try {
          row.result = kind == ModelKind::Classic ? fit_classic(sub) : fit_proposed(sub);
        } catch (const DegenerateDataError& err) {
          row.note = err.what();
        }
      }
      report.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace lambdarc
