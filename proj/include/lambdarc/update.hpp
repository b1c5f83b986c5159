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

#include "lambdarc/gop.hpp"
#include "lambdarc/model.hpp"

namespace lambdarc {

inline constexpr double kAlphaMin = 0.05;
inline constexpr double kAlphaMax = 500.0;
inline constexpr double kBetaMin = -3.0;
inline constexpr double kBetaMax = -0.1;
inline constexpr double kDecayFactor = 0.99;

// Robustness rails on the update step (they leave the err = 0 fixed point
// untouched). The log-bpp regressor is clipped so the beta step stays
// contractive at any operating point (sigma_beta * 3^2 < 2) and keeps its
// sign above 1 bpp; the per-step error bound stops a single wild observation
// from slamming coefficients between their clamps.
inline constexpr double kLogBppRegressorMin = -3.0;
inline constexpr double kLogBppRegressorMax = -0.1;
inline constexpr double kUpdateErrorClip = 2.0;

/// Gradient-step sizes for (alpha, beta, gamma). gamma_cap bounds gamma after
/// every update, mirroring the initialization clip.
struct UpdateStrengths {
  double sigma_alpha = 0.05;
  double sigma_beta = 0.2;
  double sigma_gamma = 0.0;
  double gamma_cap = 0.0;

  /// scale_all applies the target-bpp scaling to all three strengths instead
  /// of only gamma's (the alternate reading; kept as an experiment switch).
  static UpdateStrengths defaults(double target_bpp, bool scale_all = false) {
    UpdateStrengths s;
    if (scale_all) {
      s.sigma_alpha = 0.05 * target_bpp;
      s.sigma_beta = 0.2 * target_bpp;
    }
    s.sigma_gamma = 1.0e-6 * target_bpp;
    s.gamma_cap = kGammaCapFraction * target_bpp;
    return s;
  }
};

/// One encoded frame as seen by the model: the frame was coded at lambda_used
/// aiming for bpp_target and came out at bpp_actual.
struct UpdateObservation {
  double bpp_target;   // bpp0
  double lambda_used;  // lambda0
  double bpp_actual;   // bpp1
};

/// Squared log error e^2 = 0.5*(ln lambda0 - ln lambda1)^2 of the model
/// against one observation.
inline double squared_log_error(const ModelCoefficients& m, const UpdateObservation& obs) {
  const double pred = lambda_from_bpp(m, obs.bpp_actual);
  const double e = std::log(obs.lambda_used) - std::log(pred);
  return 0.5 * e * e;
}

struct ErrorGradient {
  double d_alpha;
  double d_beta;
  double d_gamma;
};

/// Analytic partials of e^2 with respect to (alpha, beta, gamma).
inline ErrorGradient error_gradient(const ModelCoefficients& m, const UpdateObservation& obs) {
  const double pred = lambda_from_bpp(m, obs.bpp_actual);
  const double e = std::log(obs.lambda_used) - std::log(pred);
  const double log_term = std::log(obs.bpp_actual + m.gamma);
  return {-e / m.alpha, -e * log_term, -e * m.beta / (obs.bpp_actual + m.gamma)};
}

/// One descent step against the observation, with decay-scaled strengths,
/// post-update clamps and the decay multiplication. The alpha step descends
/// on ln(alpha) (step proportional to alpha): the raw partial -err/alpha
/// would give ln(alpha) an effective rate of sigma/alpha^2, freezing alpha
/// near 4 and diverging below 0.3; the multiplicative form adapts at the
/// same rate at every scale and matches the reference rate-control lineage.
inline ModelCoefficients lms_update(const ModelCoefficients& m, const UpdateObservation& obs,
                                    const UpdateStrengths& s) {
  if (!(obs.bpp_actual + m.gamma > 0.0)) {
    throw std::domain_error("lms_update: bpp_actual + gamma must be positive");
  }
  const double pred = m.alpha * std::pow(obs.bpp_actual + m.gamma, m.beta);
  const double err = std::clamp(std::log(obs.lambda_used) - std::log(pred), -kUpdateErrorClip,
                                kUpdateErrorClip);
  const double log_term = std::clamp(std::log(obs.bpp_actual + m.gamma), kLogBppRegressorMin,
                                     kLogBppRegressorMax);

  ModelCoefficients out = m;
  out.alpha = std::clamp(m.alpha + s.sigma_alpha * m.decay * err * m.alpha, kAlphaMin, kAlphaMax);
  out.beta = std::clamp(m.beta + s.sigma_beta * m.decay * err * log_term, kBetaMin, kBetaMax);
  out.gamma = std::clamp(
      m.gamma + s.sigma_gamma * m.decay * err * m.beta / (obs.bpp_actual + m.gamma), 0.0,
      s.gamma_cap);
  out.decay = kDecayFactor * m.decay;
  return out;
}

/// Scene-change hook: all levels back to initial coefficients, decay back to 1.
inline void scene_change_reset(LevelInitTable& table, GopKind kind, double target_bpp) {
  table = init_coefficients(kind, target_bpp);
}

}  // namespace lambdarc
