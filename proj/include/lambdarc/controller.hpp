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
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lambdarc/allocation.hpp"
#include "lambdarc/gop.hpp"
#include "lambdarc/metrics.hpp"
#include "lambdarc/model.hpp"
#include "lambdarc/simulator.hpp"
#include "lambdarc/update.hpp"

namespace lambdarc {

inline constexpr int kSameLevelQpWindow = 3;
inline constexpr int kAnyFrameQpWindow = 10;
inline constexpr int kQpHistoryWindow = 32;  // frames; older QP history is forgotten

/// Consistency control: keep QP within +-3 of the previous frame of the same
/// level and +-10 of the previous encoded frame. If the two windows cannot
/// both be met, the same-level window wins. Missing history disables the
/// corresponding constraint.
inline int clamp_qp(int qp_raw, std::optional<int> last_same_level, std::optional<int> last_any) {
  int lo = kQpMin, hi = kQpMax;
  if (last_any) {
    lo = std::max(lo, *last_any - kAnyFrameQpWindow);
    hi = std::min(hi, *last_any + kAnyFrameQpWindow);
  }
  if (last_same_level) {
    const int slo = *last_same_level - kSameLevelQpWindow;
    const int shi = *last_same_level + kSameLevelQpWindow;
    if (std::max(lo, slo) > std::min(hi, shi)) {
      lo = std::max(kQpMin, slo);
      hi = std::min(kQpMax, shi);
    } else {
      lo = std::max(lo, slo);
      hi = std::min(hi, shi);
    }
  }
  return std::clamp(qp_raw, lo, hi);
}

enum class RcMode { Abr, Cqp };

struct ControllerConfig {
  GopKind kind = GopKind::RandomAccess;
  VideoGeometry geometry{};
  double target_bitrate = 1.0e6;  // bits/second
  int intra_period = 32;
  int smooth_window = 40;
  QpLambdaMap qp_lambda_map{};
  std::uint64_t seed = 1;
  double kappa_intra = 4.0;        // intra refinement multiplier
  bool scale_all_strengths = false;

  double target_bpp() const { return geometry.bpp_from_bitrate(target_bitrate); }

  void validate() const {
    if (geometry.width <= 0 || geometry.height <= 0 || !(geometry.frame_rate > 0.0)) {
      throw std::invalid_argument("config: geometry must be positive");
    }
    if (!(target_bitrate > 0.0)) throw std::invalid_argument("config: target_bitrate must be positive");
    if (intra_period < 1) throw std::invalid_argument("config: intra_period must be >= 1");
    if (smooth_window < 1) throw std::invalid_argument("config: smooth_window must be >= 1");
    if (!(qp_lambda_map.c1 > 0.0)) throw std::invalid_argument("config: qp map slope must be positive");
    if (!(kappa_intra > 0.0)) throw std::invalid_argument("config: kappa_intra must be positive");
  }
};

struct FrameRecord {
  int poc = 0;
  int decode_index = 0;
  int level = 0;
  double target_bpp = 0.0;    // R_i0
  double recorded_bpp = 0.0;  // R_i3
  double actual_bpp = 0.0;
  double lambda = 0.0;        // lambda implied by the final QP
  int qp_raw = 0;
  int qp_final = 0;
  double mse = 0.0;
  double psnr_db = 0.0;
};

/// Per-intra-period bookkeeping, used by the conservation checks.
struct IntraPeriodStats {
  int start_poc = 0;
  int period_frames = 0;
  double r_i0 = 0.0;  // inter-style target
  double r_i1 = 0.0;  // refined target
  double r_i2 = 0.0;  // actual
  double amortized_total = 0.0;  // sum of r_am deductions charged to budgets
};

struct LevelStats {
  int level = 0;
  int frames = 0;
  double mean_bpp = 0.0;
  double mean_psnr_db = 0.0;
  double mean_qp = 0.0;
};

struct RunSummary {
  double total_bits = 0.0;
  double target_bits = 0.0;
  double delta_r_percent = 0.0;
  double mean_psnr_db = 0.0;
  std::vector<LevelStats> per_level;
  std::vector<IntraPeriodStats> intra_periods;
};

/// Drives the per-frame pipeline: allocate -> lambda -> QP -> consistency
/// clamp -> encode -> record -> coefficient update. Frames are processed in
/// decode order; intra frames (poc multiple of the intra period) are budgeted
/// standalone and anchor the GOP batches that follow them.
class RateController {
 public:
  RateController(const ControllerConfig& cfg, int n_frames)
      : cfg_(cfg),
        n_frames_(n_frames),
        structure_(build_structure(cfg.kind)),
        omega_(omega_defaults(cfg.kind)),
        table_(init_coefficients(cfg.kind, cfg.target_bpp())),
        strengths_(UpdateStrengths::defaults(cfg.target_bpp(), cfg.scale_all_strengths)),
        min_rate_bpp_(static_cast<double>(kMinRateBits) / cfg.geometry.pixels()) {
    cfg_.validate();
    if (n_frames_ < 1) throw std::invalid_argument("controller: need at least one frame");
    alloc_.smooth_window = cfg.smooth_window;
    alloc_.intra_period = cfg.intra_period;
    alloc_.r_avg = cfg.target_bpp();
  }

  bool done() const { return next_decode_index_ >= n_frames_; }

  /// Scene-change hook: every level's coefficients and decay back to initial
  /// values, QP consistency history cleared (post-reset frames behave like a
  /// fresh run). Allocation ledgers are kept.
  void reset_models() {
    scene_change_reset(table_, cfg_.kind, cfg_.target_bpp());
    last_qp_level_.fill(std::nullopt);
    last_qp_any_.reset();
  }

  /// Encodes the next frame in decode order under rate control.
  FrameRecord step(const SyntheticSequence& seq) {
    if (done()) throw std::logic_error("controller: sequence already finished");
    if (pending_.empty()) plan_next_batch();
    const Planned f = pending_.front();
    pending_.pop_front();

    if (std::binary_search(seq.scene_changes.begin(), seq.scene_changes.end(), f.poc)) {
      reset_models();
    }

    const double lambda_est = clamp_lambda(lambda_from_bpp(table_.coeffs[f.level], f.encode_target));
    const int qp_raw = qp_from_lambda(cfg_.qp_lambda_map, lambda_est);
    const int qp = clamp_qp(qp_raw, live_same_level_history(f.level), last_qp_any_);

    const EncodeResult enc = encode_frame(seq, f.poc, f.level, qp);
    const double actual_bpp = cfg_.geometry.bpp_from_bits(enc.bits);
    const double lambda_used = lambda_from_qp(cfg_.qp_lambda_map, qp);

    if (f.is_intra) {
      IntraPeriodStats& period = periods_.back();
      period.r_i2 = actual_bpp;
      if (period.period_frames >= 2) {
        amortize_intra(alloc_, period.r_i0, actual_bpp, period.period_frames);
      }
    }
    const double ledger_target = f.is_intra ? periods_.back().r_i0 : f.encode_target;
    record_frame(alloc_, ledger_target, actual_bpp, f.is_intra);

    table_.coeffs[f.level] =
        lms_update(table_.coeffs[f.level], {f.encode_target, lambda_used, actual_bpp}, strengths_);
    if (f.is_intra) {
      // Intra frames arrive once per period, far too rarely for the gradient
      // update alone; refit alpha exactly through the observation (the
      // gradient step above still drifts beta and gamma).
      ModelCoefficients& intra = table_.coeffs[0];
      intra.alpha = std::clamp(lambda_used * std::pow(actual_bpp + intra.gamma, -intra.beta),
                               kAlphaMin, kAlphaMax);
    }

    last_qp_level_[f.level] = {qp, next_decode_index_};
    last_qp_any_ = qp;

    FrameRecord rec;
    rec.poc = f.poc;
    rec.decode_index = next_decode_index_++;
    rec.level = f.level;
    rec.target_bpp = ledger_target;
    rec.recorded_bpp = f.is_intra ? ledger_target : actual_bpp;
    rec.actual_bpp = actual_bpp;
    rec.lambda = lambda_used;
    rec.qp_raw = qp_raw;
    rec.qp_final = qp;
    rec.mse = enc.mse;
    rec.psnr_db = psnr_from_mse(enc.mse);
    return rec;
  }

  /// Fixed-QP path: per-level QP = base + slot offset, no rate-control state
  /// is touched.
  FrameRecord step_cqp(const SyntheticSequence& seq, int base_qp) {
    if (done()) throw std::logic_error("controller: sequence already finished");
    if (cqp_plan_.empty()) plan_cqp();
    const Planned f = cqp_plan_[static_cast<std::size_t>(next_decode_index_)];

    const int qp = clamp_qp_range(base_qp + f.qp_offset);
    const EncodeResult enc = encode_frame(seq, f.poc, f.level, qp);
    const double actual_bpp = cfg_.geometry.bpp_from_bits(enc.bits);

    FrameRecord rec;
    rec.poc = f.poc;
    rec.decode_index = next_decode_index_++;
    rec.level = f.level;
    rec.target_bpp = actual_bpp;
    rec.recorded_bpp = actual_bpp;
    rec.actual_bpp = actual_bpp;
    rec.lambda = lambda_from_qp(cfg_.qp_lambda_map, qp);
    rec.qp_raw = qp;
    rec.qp_final = qp;
    rec.mse = enc.mse;
    rec.psnr_db = psnr_from_mse(enc.mse);
    return rec;
  }

  const LevelInitTable& level_table() const { return table_; }
  const AllocatorState& allocator() const { return alloc_; }
  const std::vector<IntraPeriodStats>& intra_periods() const { return periods_; }
  const ControllerConfig& config() const { return cfg_; }

 private:
  struct Planned {
    int poc;
    int level;
    int qp_offset;
    double encode_target;  // bpp aimed at when choosing lambda (R_i1 for intra)
    bool is_intra;
  };

  bool is_intra_poc(int poc) const { return poc % cfg_.intra_period == 0; }

  /// Same-level QP history, treated as absent when stale: entries older than
  /// kQpHistoryWindow encoded frames are forgotten (for the usual intra
  /// period of 32 an intra frame is never tied to the previous one), and an
  /// anchor that cannot be honoured together with the hard +-10 neighbour
  /// window (startup fan-out, operating-point jumps) no longer describes the
  /// current coding state, exactly as across a scene cut.
  std::optional<int> live_same_level_history(int level) const {
    const auto& entry = last_qp_level_[static_cast<std::size_t>(level)];
    if (!entry) return std::nullopt;
    if (next_decode_index_ - entry->decode_index >= kQpHistoryWindow) return std::nullopt;
    if (last_qp_any_ &&
        std::abs(entry->qp - *last_qp_any_) > kSameLevelQpWindow + kAnyFrameQpWindow) {
      return std::nullopt;
    }
    return entry->qp;
  }

  /// Plans the next standalone intra frame or the next GOP batch. Batches are
  /// display-contiguous spans of non-intra frames truncated at the next intra
  /// poc (or the end of the sequence); slots keep the table's decode order.
  void plan_next_batch() {
    const int p = next_batch_start_;
    if (is_intra_poc(p)) {
      const double raw = gop_budget(alloc_, 1);
      schedule_compensation(alloc_, 1);
      const double r_i0 = std::max(raw, min_rate_bpp_);
      const int period_frames = std::min(cfg_.intra_period, n_frames_ - p);
      const double r_i1 = std::max(
          intra_target(alloc_, r_i0, cfg_.kappa_intra, period_frames), min_rate_bpp_);
      periods_.push_back({p, period_frames, r_i0, r_i1, 0.0, 0.0});
      pending_.push_back({p, 0, 0, r_i1, true});
      next_batch_start_ = p + 1;
      return;
    }

    const int base = p - 1;
    const int next_intra = (p / cfg_.intra_period + 1) * cfg_.intra_period;
    const int limit = std::min({base + structure_.gop_length, next_intra - 1, n_frames_ - 1});

    std::vector<const FrameSlot*> batch;
    for (const FrameSlot& slot : structure_.slots) {
      if (base + slot.poc <= limit) batch.push_back(&slot);
    }
    const int n_batch = static_cast<int>(batch.size());
    const double r_gop =
        std::max(gop_budget(alloc_, n_batch), n_batch * min_rate_bpp_);
    schedule_compensation(alloc_, n_batch);
    if (alloc_.r_am != 0.0 && !periods_.empty()) {
      periods_.back().amortized_total += alloc_.r_am * n_batch;
    }

    std::vector<PictureModel> models;
    models.reserve(batch.size());
    for (const FrameSlot* slot : batch) {
      models.push_back({table_.coeffs[slot->level], omega_[slot->level], slot->level});
    }
    const GopAllocation alloc = allocate_pictures(models, r_gop, min_rate_bpp_);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      pending_.push_back({base + batch[i]->poc, batch[i]->level, batch[i]->qp_offset,
                          alloc.budgets[i].target_bpp, false});
    }
    next_batch_start_ = limit + 1;
  }

  /// Full decode-order plan for the CQP path (same frame ordering as ABR).
  void plan_cqp() {
    int start = 0;
    while (static_cast<int>(cqp_plan_.size()) < n_frames_) {
      if (is_intra_poc(start)) {
        cqp_plan_.push_back({start, 0, 0, 0.0, true});
        ++start;
        continue;
      }
      const int base = start - 1;
      const int next_intra = (start / cfg_.intra_period + 1) * cfg_.intra_period;
      const int limit = std::min({base + structure_.gop_length, next_intra - 1, n_frames_ - 1});
      for (const FrameSlot& slot : structure_.slots) {
        if (base + slot.poc <= limit) {
          cqp_plan_.push_back({base + slot.poc, slot.level, slot.qp_offset, 0.0, false});
        }
      }
      start = limit + 1;
    }
  }

  ControllerConfig cfg_;
  int n_frames_;
  GopStructure structure_;
  std::array<double, kNumFrameLevels> omega_;
  LevelInitTable table_;
  UpdateStrengths strengths_;
  AllocatorState alloc_{};
  double min_rate_bpp_;

  struct QpHistoryEntry {
    int qp;
    int decode_index;
  };
  std::array<std::optional<QpHistoryEntry>, kNumFrameLevels> last_qp_level_{};
  std::optional<int> last_qp_any_{};
  std::deque<Planned> pending_;
  std::vector<Planned> cqp_plan_;
  std::vector<IntraPeriodStats> periods_;
  int next_batch_start_ = 0;
  int next_decode_index_ = 0;
};

struct RunResult {
  std::vector<FrameRecord> frames;
  RunSummary summary;
};

/// Runs a whole sequence in ABR or CQP mode and aggregates the summary.
inline RunResult run(const ControllerConfig& cfg, const SyntheticSequence& seq, RcMode mode,
                     int base_qp = 32) {
  RateController ctrl(cfg, seq.frame_count());
  RunResult out;
  out.frames.reserve(seq.frames.size());
  while (!ctrl.done()) {
    out.frames.push_back(mode == RcMode::Abr ? ctrl.step(seq) : ctrl.step_cqp(seq, base_qp));
  }

  RunSummary& sum = out.summary;
  const double pixels = cfg.geometry.pixels();
  std::array<LevelStats, kNumFrameLevels> levels{};
  for (const FrameRecord& f : out.frames) {
    sum.total_bits += f.actual_bpp * pixels;
    sum.mean_psnr_db += f.psnr_db;
    LevelStats& ls = levels[static_cast<std::size_t>(f.level)];
    ls.level = f.level;
    ls.frames += 1;
    ls.mean_bpp += f.actual_bpp;
    ls.mean_psnr_db += f.psnr_db;
    ls.mean_qp += f.qp_final;
  }
  sum.mean_psnr_db /= static_cast<double>(out.frames.size());
  for (LevelStats& ls : levels) {
    if (ls.frames == 0) continue;
    ls.mean_bpp /= ls.frames;
    ls.mean_psnr_db /= ls.frames;
    ls.mean_qp /= ls.frames;
    sum.per_level.push_back(ls);
  }
  if (mode == RcMode::Abr) {
    sum.target_bits = cfg.target_bpp() * pixels * static_cast<double>(seq.frame_count());
    sum.delta_r_percent = delta_r(sum.total_bits, sum.target_bits);
    sum.intra_periods = ctrl.intra_periods();
  }
  return out;
}

}  // namespace lambdarc
