// Copyright 2026 The geopipe Authors. All Rights Reserved.
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

// Measured pass-time / activation-memory tables and the profiles built from
// them. CSV schema (UTF-8, LF, header required):
//
//   tokens,t_f_us,t_b_us,act_mem_bytes
//   4096,812.5,1630.25,1073741824

#ifndef GEOPIPE_CALIBRATION_HPP_
#define GEOPIPE_CALIBRATION_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "geopipe/core_model.hpp"
#include "geopipe/error.hpp"

namespace geopipe {

inline constexpr std::string_view kMeasurementHeader = "tokens,t_f_us,t_b_us,act_mem_bytes";

struct MeasurementRow {
  std::int64_t tokens = 0;
  Duration t_f{0};
  Duration t_b{0};
  Bytes act_mem = 0;
  friend bool operator==(const MeasurementRow&, const MeasurementRow&) = default;
};

struct MeasurementTable {
  std::vector<MeasurementRow> rows;  // sorted by tokens
};

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    auto comma = line.find(',');
    out.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

inline std::int64_t parse_i64(std::string_view s, const char* col, int line) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(std::string("malformed ") + col + " value '" + std::string(s) + "'", line);
  return v;
}

// Microseconds in decimal notation to whole nanoseconds.
inline Duration parse_us(std::string_view s, const char* col, int line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ParseError(std::string("malformed ") + col + " value '" + std::string(s) + "'", line);
  return Duration{std::llround(v * 1000.0)};
}

}  // namespace detail

// Microseconds with exactly three decimals; exact for integer nanoseconds.
inline std::string format_us(Duration d) {
  const std::int64_t ns = d.count();
  const std::int64_t whole = ns / 1000, frac = std::abs(ns % 1000);
  std::string out = (ns < 0 && whole == 0 ? "-" : "") + std::to_string(whole) + ".";
  std::string f = std::to_string(frac);
  return out + std::string(3 - f.size(), '0') + f;
}

inline MeasurementTable load_measurements(std::istream& in) {
  std::string line;
  int lineno = 0;
  bool header = false;
  MeasurementTable table;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != kMeasurementHeader)
        throw ParseError("expected header '" + std::string(kMeasurementHeader) + "'", lineno);
      header = true;
      continue;
    }
    const auto cols = detail::split_csv(line);
    if (cols.size() != 4) throw ParseError("expected 4 columns, got " + std::to_string(cols.size()), lineno);
    MeasurementRow r{detail::parse_i64(cols[0], "tokens", lineno), detail::parse_us(cols[1], "t_f_us", lineno),
                     detail::parse_us(cols[2], "t_b_us", lineno), detail::parse_i64(cols[3], "act_mem_bytes", lineno)};
    if (r.tokens < 1) throw ParseError("tokens must be positive", lineno);
    if (r.t_f < Duration::zero() || r.t_b < Duration::zero() || r.act_mem < 0)
      throw ParseError("durations and memory must be non-negative", lineno);
    table.rows.push_back(r);
  }
  if (!header) throw ParseError("empty measurement file");
  if (table.rows.empty()) throw ParseError("measurement file has no data rows");
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const auto& a, const auto& b) { return a.tokens < b.tokens; });
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    if (table.rows[i].tokens == table.rows[i - 1].tokens)
      throw ConfigError("duplicate measurement row for tokens=" + std::to_string(table.rows[i].tokens));
  return table;
}

inline MeasurementTable load_measurements(std::string_view document) {
  std::istringstream is{std::string(document)};
  return load_measurements(is);
}

inline MeasurementTable load_measurements_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open measurement file " + path.string());
  try {
    return load_measurements(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline void write_measurements(const MeasurementTable& table, std::ostream& out) {
  out << kMeasurementHeader << '\n';
  for (const auto& r : table.rows)
    out << r.tokens << ',' << format_us(r.t_f) << ',' << format_us(r.t_b) << ',' << r.act_mem << '\n';
}

// Knots verbatim, no smoothing. Clamped below the first row, last segment
// continued above the last.
inline ComputeProfile fit_profile(const MeasurementTable& table) {
  std::vector<ComputeProfile::Knot> knots;
  knots.reserve(table.rows.size());
  for (const auto& r : table.rows) knots.push_back({r.tokens, r.t_f, r.t_b, r.act_mem});
  return ComputeProfile(std::move(knots), Extrapolation::kLinearTail);
}

using FractionalDuration = std::chrono::duration<double, std::nano>;

// Test fixture generator: t = max(base, per_token * tokens) on each grid point.
inline ComputeProfile synth_profile(Duration base_overhead, FractionalDuration per_token_f,
                                    FractionalDuration per_token_b, double act_per_token,
                                    const std::vector<std::int64_t>& token_grid) {
  if (token_grid.empty()) throw ConfigError("synthetic profile needs a non-empty token grid");
  std::vector<ComputeProfile::Knot> knots;
  for (auto tokens : token_grid) {
    auto scaled = [&](FractionalDuration per) {
      return std::max(base_overhead, Duration{std::llround(per.count() * static_cast<double>(tokens))});
    };
    knots.push_back({tokens, scaled(per_token_f), scaled(per_token_b),
                     std::llround(act_per_token * static_cast<double>(tokens))});
  }
  return ComputeProfile(std::move(knots), Extrapolation::kLinearTail);
}

}  // namespace geopipe

#endif  // GEOPIPE_CALIBRATION_HPP_
