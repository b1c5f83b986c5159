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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lambdarc/config.hpp"
#include "lambdarc/lambdarc.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInputData = 3;
constexpr int kExitInternal = 4;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

bool verbose_logging() {
  static const bool enabled = [] {
    const char* env = std::getenv("LAMBDARC_VERBOSE");
    return env != nullptr && env[0] != '\0' && env[0] != '0';
  }();
  return enabled;
}

void vlog(const std::string& message) {
  if (verbose_logging()) std::cerr << "lambdarc: " << message << "\n";
}

/// Writes via a temp file and rename so readers never see partial output.
void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

void prepare_output_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw InputError(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir) && !force) {
      throw InputError(dir.string() + " is not empty; pass --force to overwrite");
    }
  } else {
    fs::create_directories(dir);
  }
}

lambdarc::RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": invalid JSON: " + e.what());
  }
  try {
    return lambdarc::config_from_json(j);
  } catch (const lambdarc::ConfigError& e) {
    throw InputError(path + ": " + e.what());
  }
}

ordered_json manifest_base(const std::string& subcommand) {
  ordered_json m;
  m["tool"] = "lambdarc";
  m["version"] = lambdarc::kVersion;
  m["subcommand"] = subcommand;
  return m;
}

struct LegResult {
  lambdarc::RunResult run;
  double bitrate_bps = 0.0;
};

LegResult run_leg(const lambdarc::RunConfig& cfg, const lambdarc::SyntheticSequence& seq,
                  lambdarc::RcMode mode, int base_qp) {
  LegResult leg;
  leg.run = lambdarc::run(cfg.controller, seq, mode, base_qp);
  const double seconds = cfg.n_frames / cfg.controller.geometry.frame_rate;
  leg.bitrate_bps = leg.run.summary.total_bits / seconds;
  return leg;
}

void write_run_outputs(const fs::path& dir, const lambdarc::RunResult& result,
                       lambdarc::RcMode mode) {
  write_file_atomic(dir / "frames.csv", lambdarc::frame_log_csv(result.frames));
  write_file_atomic(dir / "summary.json",
                    lambdarc::summary_to_json(result.summary, mode).dump(2) + "\n");
}

// ---------------------------------------------------------------- fit

int cmd_fit(const std::string& input, const std::string& output, const std::string& ranges_arg) {
  std::vector<lambdarc::QpRange> ranges;
  if (ranges_arg.empty()) {
    ranges.assign(lambdarc::kDefaultQpRanges.begin(), lambdarc::kDefaultQpRanges.end());
  } else {
    std::istringstream ss(ranges_arg);
    std::string token;
    while (std::getline(ss, token, ',')) {
      const auto dash = token.find('-');
      if (dash == std::string::npos) throw InputError("bad range '" + token + "', expected lo-hi");
      try {
        ranges.push_back({std::stoi(token.substr(0, dash)), std::stoi(token.substr(dash + 1))});
      } catch (const std::exception&) {
        throw InputError("bad range '" + token + "', expected lo-hi");
      }
    }
    if (ranges.empty()) throw InputError("no QP ranges given");
  }

  const std::vector<lambdarc::RdSample> samples = lambdarc::read_samples_csv(input);
  const std::vector<lambdarc::RangeFit> report = lambdarc::fit_report(samples, ranges);
  write_file_atomic(output, lambdarc::fit_report_csv(report));
  std::cout << "wrote " << output << " (" << report.size() << " rows)\n";
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const std::string& config_path, const std::string& mode_arg, int base_qp,
                 const std::string& out_dir, bool force, bool dump_sequence) {
  lambdarc::RcMode mode;
  if (mode_arg == "abr") {
    mode = lambdarc::RcMode::Abr;
  } else if (mode_arg == "cqp") {
    mode = lambdarc::RcMode::Cqp;
  } else {
    throw CLI::ValidationError("--mode", "expected 'abr' or 'cqp'");
  }

  const lambdarc::RunConfig cfg = load_config(config_path);
  const fs::path dir(out_dir);
  prepare_output_dir(dir, force);

  vlog("simulate: " + std::string(lambdarc::gop_kind_name(cfg.controller.kind)) + " " +
       std::to_string(cfg.n_frames) + " frames, mode " + mode_arg);
  const lambdarc::SyntheticSequence seq = cfg.build_sequence();
  const lambdarc::RunResult result = lambdarc::run(cfg.controller, seq, mode, base_qp);
  write_run_outputs(dir, result, mode);
  if (dump_sequence) {
    write_file_atomic(dir / "sequence.json", lambdarc::sequence_to_json(seq).dump(2) + "\n");
  }

  ordered_json manifest = manifest_base("simulate");
  manifest["mode"] = mode_arg;
  manifest["base_qp"] = base_qp;
  manifest["config"] = lambdarc::config_to_json(cfg);
  manifest["outputs"] = {"frames.csv", "summary.json"};
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");

  std::cout << "total_bits=" << lambdarc::format_double(result.summary.total_bits)
            << " mean_psnr_db=" << lambdarc::format_double(result.summary.mean_psnr_db);
  if (mode == lambdarc::RcMode::Abr) {
    std::cout << " delta_r_percent=" << lambdarc::format_double(result.summary.delta_r_percent);
  }
  std::cout << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

int cmd_sweep(const std::string& config_path, std::vector<int> qps, const std::string& out_dir,
              bool force) {
  if (qps.empty()) qps = {22, 27, 32, 37};
  if (qps.size() < 4) {
    throw CLI::ValidationError("--qps", "need at least 4 QP points for the BD fit");
  }
  for (int qp : qps) {
    if (qp < lambdarc::kQpMin || qp > lambdarc::kQpMax) {
      throw CLI::ValidationError("--qps", "QP values must be in [0, 51]");
    }
  }

  const lambdarc::RunConfig cfg = load_config(config_path);
  const fs::path dir(out_dir);
  prepare_output_dir(dir, force);
  const lambdarc::SyntheticSequence seq = cfg.build_sequence();

  // CQP legs (anchor), one per QP, in parallel.
  std::vector<std::future<LegResult>> cqp_futures;
  for (int qp : qps) {
    cqp_futures.push_back(std::async(std::launch::async, run_leg, std::cref(cfg), std::cref(seq),
                                     lambdarc::RcMode::Cqp, qp));
  }
  std::vector<LegResult> cqp_legs;
  for (auto& f : cqp_futures) cqp_legs.push_back(f.get());
  for (std::size_t i = 0; i < qps.size(); ++i) {
    vlog("cqp qp=" + std::to_string(qps[i]) +
         " bitrate=" + lambdarc::format_double(cqp_legs[i].bitrate_bps));
  }

  // ABR legs at the CQP-measured rates.
  std::vector<lambdarc::RunConfig> abr_cfgs;
  for (const LegResult& leg : cqp_legs) {
    lambdarc::RunConfig c = cfg;
    c.controller.target_bitrate = leg.bitrate_bps;
    abr_cfgs.push_back(c);
  }
  std::vector<std::future<LegResult>> abr_futures;
  for (const lambdarc::RunConfig& c : abr_cfgs) {
    abr_futures.push_back(std::async(std::launch::async, run_leg, std::cref(c), std::cref(seq),
                                     lambdarc::RcMode::Abr, 0));
  }
  std::vector<LegResult> abr_legs;
  for (auto& f : abr_futures) abr_legs.push_back(f.get());

  std::vector<lambdarc::RdPoint> cqp_points, abr_points;
  double mean_delta_r = 0.0;
  for (std::size_t i = 0; i < qps.size(); ++i) {
    cqp_points.push_back({cqp_legs[i].bitrate_bps, cqp_legs[i].run.summary.mean_psnr_db});
    abr_points.push_back({abr_legs[i].bitrate_bps, abr_legs[i].run.summary.mean_psnr_db});
    mean_delta_r += abr_legs[i].run.summary.delta_r_percent;

    const std::string qp_name = "cqp_qp" + std::to_string(qps[i]);
    const std::string abr_name = "abr_rate" + std::to_string(i);
    fs::create_directories(dir / qp_name);
    fs::create_directories(dir / abr_name);
    write_run_outputs(dir / qp_name, cqp_legs[i].run, lambdarc::RcMode::Cqp);
    write_run_outputs(dir / abr_name, abr_legs[i].run, lambdarc::RcMode::Abr);
  }
  mean_delta_r /= static_cast<double>(qps.size());
  const double bd = lambdarc::bd_rate(cqp_points, abr_points);

  ordered_json cmp;
  cmp["qps"] = qps;
  cmp["cqp_points"] = ordered_json::array();
  cmp["abr_points"] = ordered_json::array();
  for (std::size_t i = 0; i < qps.size(); ++i) {
    cmp["cqp_points"].push_back(
        {{"bitrate", cqp_points[i].bitrate}, {"psnr_db", cqp_points[i].psnr_db}});
    cmp["abr_points"].push_back(
        {{"bitrate", abr_points[i].bitrate}, {"psnr_db", abr_points[i].psnr_db}});
  }
  cmp["bd_rate_percent"] = bd;
  cmp["mean_delta_r_percent"] = mean_delta_r;
  write_file_atomic(dir / "comparison.json", cmp.dump(2) + "\n");

  ordered_json manifest = manifest_base("sweep");
  manifest["qps"] = qps;
  manifest["config"] = lambdarc::config_to_json(cfg);
  manifest["outputs"] = {"comparison.json"};
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");

  std::cout << "bd_rate_percent=" << lambdarc::format_double(bd)
            << " mean_delta_r_percent=" << lambdarc::format_double(mean_delta_r) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- bdrate

int cmd_bdrate(const std::string& anchor_path, const std::string& test_path, bool pchip) {
  const auto anchor = lambdarc::read_curve_csv(anchor_path);
  const auto test = lambdarc::read_curve_csv(test_path);
  const double bd = lambdarc::bd_rate(anchor, test,
                                      pchip ? lambdarc::BdFitKind::PiecewiseCubicHermite
                                            : lambdarc::BdFitKind::CubicPolynomial);
  std::cout << lambdarc::format_double(bd) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- structures

int cmd_structures(const std::string& kind_arg, const std::string& output) {
  std::vector<lambdarc::GopKind> kinds;
  if (kind_arg.empty()) {
    kinds = {lambdarc::GopKind::RandomAccess, lambdarc::GopKind::LowDelayP,
             lambdarc::GopKind::LowDelayB};
  } else {
    try {
      kinds = {lambdarc::gop_kind_from_name(kind_arg)};
    } catch (const lambdarc::ConfigError& e) {
      throw CLI::ValidationError("--kind", e.what());
    }
  }
  ordered_json j = ordered_json::array();
  for (lambdarc::GopKind kind : kinds) {
    const lambdarc::GopStructure st = lambdarc::build_structure(kind);
    ordered_json entry;
    entry["kind"] = std::string(lambdarc::gop_kind_name(kind));
    entry["gop_length"] = st.gop_length;
    entry["slots"] = ordered_json::array();
    for (const lambdarc::FrameSlot& s : st.slots) {
      entry["slots"].push_back({{"decode_index", s.decode_index},
                                {"poc", s.poc},
                                {"level", s.level},
                                {"qp_offset", s.qp_offset},
                                {"lambda_weight", s.lambda_weight},
                                {"ref_distance", s.ref_distance}});
    }
    j.push_back(std::move(entry));
  }
  const std::string text = j.dump(2) + "\n";
  if (output.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(output, text);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lambda-domain rate control toolkit"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "fit distortion-rate models to qp,bpp,mse samples");
  std::string fit_input, fit_output, fit_ranges;
  fit->add_option("--input", fit_input, "sample CSV (qp,bpp,mse)")->required();
  fit->add_option("--output", fit_output, "report CSV path")->required();
  fit->add_option("--ranges", fit_ranges, "QP ranges, e.g. 4-51,4-22,17-37,32-51");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run one rate-controlled encode simulation");
  std::string sim_config, sim_mode = "abr", sim_out;
  int sim_qp = 32;
  bool sim_force = false, sim_dump_seq = false;
  simulate->add_option("--config", sim_config, "config JSON")->required();
  simulate->add_option("--mode", sim_mode, "abr or cqp");
  simulate->add_option("--qp", sim_qp, "base QP for cqp mode");
  simulate->add_option("--out", sim_out, "output directory")->required();
  simulate->add_flag("--force", sim_force, "allow writing into a non-empty directory");
  simulate->add_flag("--dump-sequence", sim_dump_seq, "also write sequence.json");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "CQP anchor sweep plus ABR runs and BD-rate");
  std::string sweep_config, sweep_out;
  std::vector<int> sweep_qps;
  bool sweep_force = false;
  sweep->add_option("--config", sweep_config, "config JSON")->required();
  sweep->add_option("--qps", sweep_qps, "QP list (default 22 27 32 37)")->delimiter(',');
  sweep->add_option("--out", sweep_out, "output directory")->required();
  sweep->add_flag("--force", sweep_force, "allow writing into a non-empty directory");

  // bdrate
  auto* bdrate = app.add_subcommand("bdrate", "BD-rate between two bitrate,psnr_db curves");
  std::string bd_anchor, bd_test;
  bool bd_pchip = false;
  bdrate->add_option("--anchor", bd_anchor, "anchor curve CSV")->required();
  bdrate->add_option("--test", bd_test, "test curve CSV")->required();
  bdrate->add_flag("--pchip", bd_pchip, "piecewise-cubic-hermite fit instead of cubic polynomial");

  // structures
  auto* structures = app.add_subcommand("structures", "dump the coding structure tables as JSON");
  std::string st_kind, st_output;
  structures->add_option("--kind", st_kind, "ra, ldp or ldb (default: all)");
  structures->add_option("--output", st_output, "write to file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_input, fit_output, fit_ranges);
    if (simulate->parsed()) {
      return cmd_simulate(sim_config, sim_mode, sim_qp, sim_out, sim_force, sim_dump_seq);
    }
    if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_qps, sweep_out, sweep_force);
    if (bdrate->parsed()) return cmd_bdrate(bd_anchor, bd_test, bd_pchip);
    if (structures->parsed()) return cmd_structures(st_kind, st_output);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputData;
  } catch (const lambdarc::CsvParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputData;
  } catch (const lambdarc::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputData;
  } catch (const lambdarc::DegenerateDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputData;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
