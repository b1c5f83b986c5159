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
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "lambdarc/controller.hpp"
#include "lambdarc/csv.hpp"
#include "lambdarc/simulator.hpp"

namespace lambdarc {

inline constexpr int kSequenceSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One experiment: controller settings plus the synthetic content to run on.
struct RunConfig {
  ControllerConfig controller{};
  SequenceProfile profile = SequenceProfile::Stationary;
  int n_frames = 300;
  double noise_sigma = 0.05;
  std::array<double, kNumFrameLevels> level_efficiency = kDefaultLevelEfficiency;
  double scene_factor = 4.0;

  SyntheticSequence build_sequence() const {
    SyntheticSequence seq = make_sequence(profile, n_frames, controller.seed,
                                          controller.geometry, scene_factor);
    seq.noise_sigma = noise_sigma;
    seq.level_efficiency = level_efficiency;
    seq.qp_map = controller.qp_lambda_map;
    return seq;
  }
};

inline GopKind gop_kind_from_name(const std::string& name) {
  if (name == "ra") return GopKind::RandomAccess;
  if (name == "ldp") return GopKind::LowDelayP;
  if (name == "ldb") return GopKind::LowDelayB;
  throw ConfigError("unknown structure kind '" + name + "' (expected ra, ldp or ldb)");
}

inline SequenceProfile profile_from_name(const std::string& name) {
  if (name == "stationary") return SequenceProfile::Stationary;
  if (name == "two_scene") return SequenceProfile::TwoScene;
  if (name == "ramp") return SequenceProfile::Ramp;
  throw ConfigError("unknown profile '" + name + "' (expected stationary, two_scene or ramp)");
}

inline nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(gop_kind_name(cfg.controller.kind));
  j["width"] = cfg.controller.geometry.width;
  j["height"] = cfg.controller.geometry.height;
  j["frame_rate"] = cfg.controller.geometry.frame_rate;
  j["target_bitrate"] = cfg.controller.target_bitrate;
  j["intra_period"] = cfg.controller.intra_period;
  j["smooth_window"] = cfg.controller.smooth_window;
  j["qp_map_c1"] = cfg.controller.qp_lambda_map.c1;
  j["qp_map_c2"] = cfg.controller.qp_lambda_map.c2;
  j["kappa_intra"] = cfg.controller.kappa_intra;
  j["scale_all_strengths"] = cfg.controller.scale_all_strengths;
  j["seed"] = cfg.controller.seed;
  j["profile"] = std::string(sequence_profile_name(cfg.profile));
  j["n_frames"] = cfg.n_frames;
  j["noise_sigma"] = cfg.noise_sigma;
  j["level_efficiency"] = cfg.level_efficiency;
  j["scene_factor"] = cfg.scene_factor;
  return j;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  try {
    cfg.controller.kind = gop_kind_from_name(j.at("kind").get<std::string>());
    cfg.controller.geometry.width = j.at("width").get<int>();
    cfg.controller.geometry.height = j.at("height").get<int>();
    cfg.controller.geometry.frame_rate = j.at("frame_rate").get<double>();
    cfg.controller.target_bitrate = j.at("target_bitrate").get<double>();
    cfg.controller.intra_period = j.at("intra_period").get<int>();
    cfg.controller.smooth_window = j.value("smooth_window", 40);
    cfg.controller.qp_lambda_map.c1 = j.value("qp_map_c1", 4.3);
    cfg.controller.qp_lambda_map.c2 = j.value("qp_map_c2", 14.6);
    cfg.controller.kappa_intra = j.value("kappa_intra", 4.0);
    cfg.controller.scale_all_strengths = j.value("scale_all_strengths", false);
    cfg.controller.seed = j.value("seed", std::uint64_t{1});
    cfg.profile = profile_from_name(j.value("profile", std::string("stationary")));
    cfg.n_frames = j.at("n_frames").get<int>();
    cfg.noise_sigma = j.value("noise_sigma", 0.05);
    if (j.contains("level_efficiency")) {
      const auto eff = j.at("level_efficiency");
      if (!eff.is_array() || eff.size() != kNumFrameLevels) {
        throw ConfigError("level_efficiency must be an array of 5 values");
      }
      for (std::size_t i = 0; i < kNumFrameLevels; ++i) {
        cfg.level_efficiency[i] = eff[i].get<double>();
      }
    }
    cfg.scene_factor = j.value("scene_factor", 4.0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  if (cfg.n_frames < 1) throw ConfigError("bad config: n_frames must be >= 1");
  if (cfg.noise_sigma < 0.0 || cfg.noise_sigma > 0.5) {
    throw ConfigError("bad config: noise_sigma must be in [0, 0.5]");
  }
  try {
    cfg.controller.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  return cfg;
}

inline nlohmann::ordered_json sequence_to_json(const SyntheticSequence& seq) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSequenceSchemaVersion;
  j["width"] = seq.geometry.width;
  j["height"] = seq.geometry.height;
  j["frame_rate"] = seq.geometry.frame_rate;
  j["noise_sigma"] = seq.noise_sigma;
  j["seed"] = seq.seed;
  j["level_efficiency"] = seq.level_efficiency;
  j["qp_map_c1"] = seq.qp_map.c1;
  j["qp_map_c2"] = seq.qp_map.c2;
  j["scene_changes"] = seq.scene_changes;
  nlohmann::ordered_json frames = nlohmann::ordered_json::array();
  for (const FrameGroundTruth& f : seq.frames) {
    frames.push_back({{"c", f.base.c}, {"k", f.base.k}, {"b", f.base.b}, {"t", f.base.t},
                      {"scene_id", f.scene_id}});
  }
  j["frames"] = std::move(frames);
  return j;
}

inline SyntheticSequence sequence_from_json(const nlohmann::json& j) {
  SyntheticSequence seq;
  try {
    if (j.at("schema_version").get<int>() != kSequenceSchemaVersion) {
      throw ConfigError("unsupported sequence schema version");
    }
    seq.geometry.width = j.at("width").get<int>();
    seq.geometry.height = j.at("height").get<int>();
    seq.geometry.frame_rate = j.at("frame_rate").get<double>();
    seq.noise_sigma = j.at("noise_sigma").get<double>();
    seq.seed = j.at("seed").get<std::uint64_t>();
    const auto eff = j.at("level_efficiency");
    for (std::size_t i = 0; i < kNumFrameLevels; ++i) seq.level_efficiency[i] = eff.at(i).get<double>();
    seq.qp_map.c1 = j.value("qp_map_c1", 4.3);
    seq.qp_map.c2 = j.value("qp_map_c2", 14.6);
    seq.scene_changes = j.at("scene_changes").get<std::vector<int>>();
    for (const auto& f : j.at("frames")) {
      seq.frames.push_back({{f.at("c").get<double>(), f.at("k").get<double>(),
                             f.at("b").get<double>(), f.at("t").get<double>()},
                            f.value("scene_id", 0)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad sequence: ") + e.what());
  }
  return seq;
}

inline std::string frame_log_csv(std::span<const FrameRecord> frames) {
  std::string out =
      "poc,decode_index,level,target_bpp,recorded_bpp,actual_bpp,lambda,qp_raw,qp_final,mse,"
      "psnr_db\n";
  for (const FrameRecord& f : frames) {
    out += std::to_string(f.poc) + "," + std::to_string(f.decode_index) + "," +
           std::to_string(f.level) + "," + format_double(f.target_bpp) + "," +
           format_double(f.recorded_bpp) + "," + format_double(f.actual_bpp) + "," +
           format_double(f.lambda) + "," + std::to_string(f.qp_raw) + "," +
           std::to_string(f.qp_final) + "," + format_double(f.mse) + "," +
           format_double(f.psnr_db) + "\n";
  }
  return out;
}

inline nlohmann::ordered_json summary_to_json(const RunSummary& sum, RcMode mode) {
  nlohmann::ordered_json j;
  j["mode"] = mode == RcMode::Abr ? "abr" : "cqp";
  j["total_bits"] = sum.total_bits;
  j["target_bits"] = sum.target_bits;
  j["delta_r_percent"] = sum.delta_r_percent;
  j["mean_psnr_db"] = sum.mean_psnr_db;
  nlohmann::ordered_json levels = nlohmann::ordered_json::array();
  for (const LevelStats& ls : sum.per_level) {
    levels.push_back({{"level", ls.level},
                      {"frames", ls.frames},
                      {"mean_bpp", ls.mean_bpp},
                      {"mean_psnr_db", ls.mean_psnr_db},
                      {"mean_qp", ls.mean_qp}});
  }
  j["per_level"] = std::move(levels);
  return j;
}

}  // namespace lambdarc
