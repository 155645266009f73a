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

// Chrome trace-event export of a simulated timeline, and the per-stage
// metrics CSV.

#ifndef GEOPIPE_TRACE_HPP_
#define GEOPIPE_TRACE_HPP_

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geopipe/calibration.hpp"
#include "geopipe/core_model.hpp"
#include "geopipe/simulator.hpp"

namespace geopipe {

inline double to_trace_us(Duration d) { return static_cast<double>(d.count()) / 1000.0; }

// One track per stage (pid = datacenter, tid = stage). Durations are "X"
// events named F{j}/B{j}; message arrivals are thread-scoped instants on the
// receiving stage.
inline nlohmann::json export_trace(const SimReport& rep, const ClusterSpec& cluster) {
  using nlohmann::json;
  json events = json::array();
  const int p = rep.num_stages;
  auto dc = [&](int stage) { return stage < cluster.num_stages() ? cluster.placement[stage] : 0; };
  std::vector<int> named_dc;
  for (int s = 0; s < p; ++s) {
    if (std::find(named_dc.begin(), named_dc.end(), dc(s)) == named_dc.end()) {
      named_dc.push_back(dc(s));
      events.push_back({{"name", "process_name"}, {"ph", "M"}, {"ts", 0}, {"pid", dc(s)}, {"tid", s},
                        {"args", {{"name", "dc" + std::to_string(dc(s))}}}});
    }
    events.push_back({{"name", "thread_name"}, {"ph", "M"}, {"ts", 0}, {"pid", dc(s)}, {"tid", s},
                      {"args", {{"name", "stage" + std::to_string(s)}}}});
  }
  for (int s = 0; s < p; ++s)
    for (const auto& e : rep.timeline[s])
      events.push_back({{"name", e.task.label()},
                        {"cat", e.task.kind == TaskKind::kForward ? "forward" : "backward"},
                        {"ph", "X"},
                        {"ts", to_trace_us(e.start)},
                        {"dur", to_trace_us(e.end - e.start)},
                        {"pid", dc(s)},
                        {"tid", s},
                        {"args", {{"micro_batch", e.task.micro_batch}}}});
  for (const auto& msg : rep.messages)
    events.push_back({{"name", std::string(msg.kind == TaskKind::kForward ? "recv act " : "recv grad ") +
                                   std::to_string(msg.micro_batch)},
                      {"cat", "message"},
                      {"ph", "i"},
                      {"s", "t"},
                      {"ts", to_trace_us(msg.arrival)},
                      {"pid", dc(msg.to)},
                      {"tid", msg.to},
                      {"args", {{"from_stage", msg.from}, {"sent_us", to_trace_us(msg.sent)}}}});
  return events;
}

// Checks the documented field schema; returns one message per problem.
inline std::vector<std::string> validate_trace(const nlohmann::json& doc) {
  std::vector<std::string> errs;
  if (!doc.is_array()) return {"trace document must be a JSON array"};
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& ev = doc[i];
    const std::string at = "event " + std::to_string(i) + ": ";
    if (!ev.is_object()) {
      errs.push_back(at + "not an object");
      continue;
    }
    if (!ev.contains("name") || !ev["name"].is_string()) errs.push_back(at + "missing string 'name'");
    if (!ev.contains("ph") || !ev["ph"].is_string()) {
      errs.push_back(at + "missing string 'ph'");
      continue;
    }
    const auto ph = ev["ph"].get<std::string>();
    if (ph != "X" && ph != "i" && ph != "M") errs.push_back(at + "unsupported phase '" + ph + "'");
    if (!ev.contains("ts") || !ev["ts"].is_number() || ev["ts"].get<double>() < 0)
      errs.push_back(at + "missing non-negative 'ts'");
    for (const char* k : {"pid", "tid"})
      if (!ev.contains(k) || !ev[k].is_number_integer()) errs.push_back(at + "missing integer '" + k + "'");
    if (ph == "X" && (!ev.contains("dur") || !ev["dur"].is_number() || ev["dur"].get<double>() < 0))
      errs.push_back(at + "duration event needs non-negative 'dur'");
  }
  return errs;
}

inline void write_json(const nlohmann::json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(1) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

// stage,busy_us,idle_us per stage, then a "total" row.
inline void write_metrics_csv(const SimReport& rep, std::ostream& out) {
  out << "stage,busy_us,idle_us\n";
  Duration busy{0}, idle{0};
  for (int s = 0; s < rep.num_stages; ++s) {
    out << s << ',' << format_us(rep.busy[s]) << ',' << format_us(rep.idle[s]) << '\n';
    busy += rep.busy[s];
    idle += rep.idle[s];
  }
  out << "total," << format_us(busy) << ',' << format_us(idle) << '\n';
}

}  // namespace geopipe

#endif  // GEOPIPE_TRACE_HPP_
