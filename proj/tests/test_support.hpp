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
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "lambdarc/controller.hpp"
#include "lambdarc/fitting.hpp"
#include "lambdarc/model.hpp"
#include "lambdarc/rng.hpp"
#include "lambdarc/simulator.hpp"

namespace lambdarc::testsupport {

/// Ground truth for fit datasets: constrained so every QP in [4, 51] yields a
/// strictly positive bpp and a clamp-free positive distortion.
inline RdGroundTruth draw_fit_ground_truth(SplitMix64& rng) {
  RdGroundTruth gt;
  gt.c = rng.log_uniform(0.5, 50.0);
  gt.k = rng.uniform(0.85, 1.15);
  const QpLambdaMap map{};
  const double raw_rate_hi_qp =
      std::pow(gt.c * gt.k / lambda_from_qp(map, 51), 1.0 / (gt.k + 1.0));
  gt.b = rng.uniform(0.0, std::min(0.05, 0.8 * raw_rate_hi_qp));
  const double rate_lo_qp = rate_from_lambda_gt(gt, lambda_from_qp(map, 4));
  const double d_min = gt.c * std::pow(rate_lo_qp + gt.b, -gt.k);
  gt.t = rng.uniform(0.0, std::min(0.5, 0.8 * d_min));
  return gt;
}

/// Variant for parameter-recovery checks: B and T bounded away from zero so a
/// relative recovery tolerance is well defined.
inline RdGroundTruth draw_recovery_ground_truth(SplitMix64& rng) {
  const QpLambdaMap map{};
  RdGroundTruth gt;
  gt.c = rng.log_uniform(0.5, 50.0);
  gt.k = rng.uniform(0.85, 1.15);
  const double raw_rate_hi_qp =
      std::pow(gt.c * gt.k / lambda_from_qp(map, 51), 1.0 / (gt.k + 1.0));
  gt.b = rng.uniform(0.005, std::max(0.006, std::min(0.05, 0.8 * raw_rate_hi_qp)));
  const double rate_lo_qp = rate_from_lambda_gt(gt, lambda_from_qp(map, 4));
  const double d_min = gt.c * std::pow(rate_lo_qp + gt.b, -gt.k);
  gt.t = rng.uniform(0.05, std::max(0.06, std::min(0.5, 0.8 * d_min)));
  return gt;
}

/// 48 samples, one per QP in [4, 51], from the clamp-free curve, with
/// optional multiplicative lognormal distortion noise.
inline std::vector<RdSample> make_fit_dataset(const RdGroundTruth& gt, double noise_sigma,
                                              std::uint64_t seed) {
  const QpLambdaMap map{};
  SplitMix64 rng(mix_key(seed, 0xf17));
  std::vector<RdSample> samples;
  for (int qp = 4; qp <= 51; ++qp) {
    const double bpp = rate_from_lambda_gt(gt, lambda_from_qp(map, qp));
    double mse = gt.c * std::pow(bpp + gt.b, -gt.k) - gt.t;
    if (noise_sigma > 0.0) mse *= std::exp(noise_sigma * rng.normal());
    samples.push_back({qp, bpp, mse});
  }
  return samples;
}

/// Constant-curve sequence exactly representable by the controller's model
/// family (K = 1, B = T = 0).
inline SyntheticSequence exact_family_sequence(double c, int n_frames,
                                               std::array<double, kNumFrameLevels> efficiency,
                                               VideoGeometry geometry = {}) {
  SyntheticSequence seq;
  seq.geometry = geometry;
  seq.noise_sigma = 0.0;
  seq.level_efficiency = efficiency;
  seq.frames.assign(static_cast<std::size_t>(n_frames), {{c, 1.0, 0.0, 0.0}, 0});
  return seq;
}

/// Replays the consistency-control windows over a decode-ordered frame log,
/// with the controller's semantics: history older than kQpHistoryWindow
/// encoded frames is forgotten and scene changes clear it entirely.
inline int count_qp_window_violations(std::span<const FrameRecord> frames,
                                      std::span<const int> scene_changes = {}) {
  struct Entry {
    int qp;
    int decode_index;
  };
  std::array<std::optional<Entry>, kNumFrameLevels> last_level;
  std::optional<int> last_any;
  int violations = 0;
  for (const FrameRecord& f : frames) {
    if (std::binary_search(scene_changes.begin(), scene_changes.end(), f.poc)) {
      last_level.fill(std::nullopt);
      last_any.reset();
    }
    const auto& same = last_level[static_cast<std::size_t>(f.level)];
    const bool anchor_live =
        same && f.decode_index - same->decode_index < kQpHistoryWindow &&
        !(last_any && std::abs(same->qp - *last_any) > kSameLevelQpWindow + kAnyFrameQpWindow);
    if (anchor_live && std::abs(f.qp_final - same->qp) > kSameLevelQpWindow) ++violations;
    if (last_any && std::abs(f.qp_final - *last_any) > kAnyFrameQpWindow) ++violations;
    last_level[static_cast<std::size_t>(f.level)] = {f.qp_final, f.decode_index};
    last_any = f.qp_final;
  }
  return violations;
}

/// The paper-protocol target for a sequence: the average bitrate a fixed-QP
/// run produces.
inline double cqp_probe_bitrate(const ControllerConfig& base, const SyntheticSequence& seq,
                                int qp) {
  ControllerConfig cfg = base;
  cfg.target_bitrate = 1.0e6;  // placeholder; unused by the CQP path
  const RunResult res = run(cfg, seq, RcMode::Cqp, qp);
  return res.summary.total_bits / (seq.frame_count() / cfg.geometry.frame_rate);
}

}  // namespace lambdarc::testsupport
