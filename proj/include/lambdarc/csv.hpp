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

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lambdarc/fitting.hpp"
#include "lambdarc/metrics.hpp"

namespace lambdarc {

/// Fixed, locale-independent float formatting; identical inputs always
/// produce identical bytes.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class CsvParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? std::string()
                                                : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_number(const std::string& text, const std::string& file, int line_no,
                           const char* column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw CsvParseError(file + ":" + std::to_string(line_no) + ": bad " + column + " value '" +
                        text + "'");
  }
}

}  // namespace detail

/// Reads qp,bpp,mse sample files (header row required). Errors carry the
/// offending line number.
inline std::vector<RdSample> read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvParseError(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw CsvParseError(path + ": empty file");
  {
    const auto header = detail::split_csv_line(line);
    if (header.size() < 3 || header[0] != "qp" || header[1] != "bpp" || header[2] != "mse") {
      throw CsvParseError(path + ":1: expected header 'qp,bpp,mse'");
    }
  }
  std::vector<RdSample> samples;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() < 3) {
      throw CsvParseError(path + ":" + std::to_string(line_no) + ": expected 3 columns");
    }
    RdSample s;
    s.qp = static_cast<int>(detail::parse_number(fields[0], path, line_no, "qp"));
    s.bpp = detail::parse_number(fields[1], path, line_no, "bpp");
    s.mse = detail::parse_number(fields[2], path, line_no, "mse");
    samples.push_back(s);
  }
  if (samples.empty()) throw CsvParseError(path + ": no sample rows");
  return samples;
}

/// Reads bitrate,psnr_db curve files (header row required).
inline std::vector<RdPoint> read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvParseError(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw CsvParseError(path + ": empty file");
  {
    const auto header = detail::split_csv_line(line);
    if (header.size() < 2 || header[0] != "bitrate" || header[1] != "psnr_db") {
      throw CsvParseError(path + ":1: expected header 'bitrate,psnr_db'");
    }
  }
  std::vector<RdPoint> points;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() < 2) {
      throw CsvParseError(path + ":" + std::to_string(line_no) + ": expected 2 columns");
    }
    points.push_back({detail::parse_number(fields[0], path, line_no, "bitrate"),
                      detail::parse_number(fields[1], path, line_no, "psnr_db")});
  }
  if (points.empty()) throw CsvParseError(path + ": no data rows");
  return points;
}

inline std::string fit_report_csv(std::span<const RangeFit> report) {
  std::string out = "range,model,C,K,B,T,r2,rmse,converged\n";
  for (const RangeFit& row : report) {
    out += std::to_string(row.range.lo) + "-" + std::to_string(row.range.hi) + ",";
    out += std::string(model_kind_name(row.kind)) + ",";
    if (row.result) {
      const FitResult& r = *row.result;
      out += format_double(r.c) + "," + format_double(r.k) + "," + format_double(r.b) + "," +
             format_double(r.t) + "," + format_double(r.r_squared) + "," + format_double(r.rmse) +
             "," + (r.converged ? "true" : "false") + "\n";
    } else {
      out += ",,,,,," + row.note + "\n";
    }
  }
  return out;
}

}  // namespace lambdarc
