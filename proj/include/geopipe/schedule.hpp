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

// Per-stage task orders for classic 1F1B and the warm-up-extended variant,
// plus feasibility checks and dependency-chain identification.

#ifndef GEOPIPE_SCHEDULE_HPP_
#define GEOPIPE_SCHEDULE_HPP_

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "geopipe/core_model.hpp"
#include "geopipe/error.hpp"

namespace geopipe {

enum class TaskKind : std::uint8_t { kForward, kBackward };

struct Task {
  TaskKind kind = TaskKind::kForward;
  int stage = 0;
  int micro_batch = 1;  // 1-based

  std::string label() const { return (kind == TaskKind::kForward ? "F" : "B") + std::to_string(micro_batch); }
  friend bool operator==(const Task&, const Task&) = default;
};

struct ScheduleSpec {
  int num_stages = 0;
  int num_micro_batches = 0;
  std::vector<int> delta_n;              // extra warm-up forwards per stage
  std::vector<std::vector<Task>> stages;  // execution order per stage

  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

// W_i = min(m - 1, p - 1 - i + delta_n_i).
inline int warmup_depth(int num_stages, int num_micro_batches, int stage, int delta_n) {
  return std::min(num_micro_batches - 1, num_stages - 1 - stage + delta_n);
}

// Extra lead of stage i over stage i + 1, i.e. the lead granted across link i.
inline int link_lead(std::span<const int> delta_n, int link) { return delta_n[link] - delta_n[link + 1]; }

// Reconstructs the stage vector from per-link leads: delta_n_i = sum_{j >= i} lead_j.
inline std::vector<int> delta_n_from_leads(std::span<const int> leads) {
  std::vector<int> dn(leads.size() + 1, 0);
  for (int i = static_cast<int>(leads.size()) - 1; i >= 0; --i) dn[i] = dn[i + 1] + leads[i];
  return dn;
}

inline std::vector<std::string> delta_n_shape_violations(int num_stages, std::span<const int> delta_n) {
  std::vector<std::string> out;
  if (static_cast<int>(delta_n.size()) != num_stages) {
    out.push_back("delta_n has " + std::to_string(delta_n.size()) + " entries, expected " + std::to_string(num_stages));
    return out;
  }
  for (int i = 0; i < num_stages; ++i)
    if (delta_n[i] < 0) out.push_back("delta_n[" + std::to_string(i) + "] is negative");
  if (delta_n.back() != 0) out.push_back("delta_n of the last stage must be 0");
  for (int i = 0; i + 1 < num_stages; ++i)
    if (delta_n[i] < delta_n[i + 1])
      out.push_back("delta_n must be non-increasing: delta_n[" + std::to_string(i) + "] < delta_n[" +
                    std::to_string(i + 1) + "]");
  return out;
}

namespace detail {

inline std::vector<Task> one_stage_order(int stage, int m, int warmup) {
  std::vector<Task> out;
  out.reserve(2 * m);
  for (int j = 1; j <= warmup; ++j) out.push_back({TaskKind::kForward, stage, j});
  for (int k = 1; k <= m - warmup; ++k) {
    out.push_back({TaskKind::kForward, stage, warmup + k});
    out.push_back({TaskKind::kBackward, stage, k});
  }
  for (int k = m - warmup + 1; k <= m; ++k) out.push_back({TaskKind::kBackward, stage, k});
  return out;
}

}  // namespace detail

inline ScheduleSpec build_geopipe(int num_stages, int num_micro_batches, std::vector<int> delta_n) {
  if (num_stages < 1 || num_micro_batches < 1) throw ConfigError("schedule needs p >= 1 and m >= 1");
  if (auto v = delta_n_shape_violations(num_stages, delta_n); !v.empty()) throw ValidationError(std::move(v));
  ScheduleSpec spec{num_stages, num_micro_batches, std::move(delta_n), {}};
  spec.stages.reserve(num_stages);
  for (int i = 0; i < num_stages; ++i)
    spec.stages.push_back(detail::one_stage_order(
        i, num_micro_batches, warmup_depth(num_stages, num_micro_batches, i, spec.delta_n[i])));
  return spec;
}

inline ScheduleSpec build_1f1b(int num_stages, int num_micro_batches) {
  return build_geopipe(num_stages, num_micro_batches, std::vector<int>(std::max(num_stages, 0), 0));
}

// Number of forwards a stage list issues before its first backward.
inline int leading_forwards(std::span<const Task> order) {
  int n = 0;
  for (const auto& t : order) {
    if (t.kind != TaskKind::kForward) break;
    ++n;
  }
  return n;
}

// Largest number of forwards whose backward has not yet run, over the list.
inline int peak_in_flight(std::span<const Task> order) {
  int live = 0, peak = 0;
  for (const auto& t : order) {
    live += t.kind == TaskKind::kForward ? 1 : -1;
    peak = std::max(peak, live);
  }
  return peak;
}

struct Violation {
  enum class Kind { kShape, kOrder, kHbm, kWarmup };
  Kind kind;
  int stage;  // -1 when not stage-specific
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
  std::vector<std::string> messages() const {
    std::vector<std::string> out;
    for (const auto& v : violations) out.push_back(v.message);
    return out;
  }
};

// Shape and order checks that need no cluster context.
inline ValidationReport validate_structure(const ScheduleSpec& spec) {
  ValidationReport rep;
  const int p = spec.num_stages, m = spec.num_micro_batches;
  auto add = [&](Violation::Kind k, int stage, std::string msg) { rep.violations.push_back({k, stage, std::move(msg)}); };
  for (auto& s : delta_n_shape_violations(p, spec.delta_n)) add(Violation::Kind::kShape, -1, std::move(s));
  if (static_cast<int>(spec.stages.size()) != p) {
    add(Violation::Kind::kShape, -1, "schedule lists " + std::to_string(spec.stages.size()) + " stages, expected " +
                                         std::to_string(p));
    return rep;
  }
  for (int i = 0; i < p; ++i) {
    const std::string where = "stage " + std::to_string(i) + ": ";
    std::vector<int> seen_f(m + 1, 0), seen_b(m + 1, 0);
    bool bad = false;
    for (const auto& t : spec.stages[i]) {
      if (t.stage != i || t.micro_batch < 1 || t.micro_batch > m) {
        add(Violation::Kind::kOrder, i, where + "task " + t.label() + " out of range");
        bad = true;
        continue;
      }
      if (t.kind == TaskKind::kForward) {
        ++seen_f[t.micro_batch];
      } else {
        if (seen_f[t.micro_batch] == 0)
          add(Violation::Kind::kOrder, i, where + t.label() + " runs before F" + std::to_string(t.micro_batch));
        ++seen_b[t.micro_batch];
      }
    }
    for (int j = 1; j <= m && !bad; ++j) {
      if (seen_f[j] != 1 || seen_b[j] != 1) {
        add(Violation::Kind::kOrder, i, where + "not a permutation of {F_j, B_j}: micro-batch " + std::to_string(j) +
                                            " appears " + std::to_string(seen_f[j]) + "F/" +
                                            std::to_string(seen_b[j]) + "B");
        break;
      }
    }
  }
  for (int i = 0; i + 1 < p; ++i) {
    const int wa = leading_forwards(spec.stages[i]), wb = leading_forwards(spec.stages[i + 1]);
    if (wa < wb)
      add(Violation::Kind::kWarmup, i + 1,
          "warm-up depth must be non-increasing: stage " + std::to_string(i) + " has " + std::to_string(wa) +
              ", stage " + std::to_string(i + 1) + " has " + std::to_string(wb));
  }
  return rep;
}

inline ValidationReport validate(const ScheduleSpec& spec, const ClusterSpec& cluster, const ComputeProfile& profile,
                                 const HbmSpec& hbm, const IterationConfig& cfg) {
  if (spec.num_stages != cluster.num_stages())
    throw ConfigError("schedule has " + std::to_string(spec.num_stages) + " stages, cluster has " +
                      std::to_string(cluster.num_stages()));
  if (spec.num_micro_batches != cfg.num_micro_batches())
    throw ConfigError("schedule has " + std::to_string(spec.num_micro_batches) + " micro-batches, config has " +
                      std::to_string(cfg.num_micro_batches()));
  hbm.check(spec.num_stages);
  ValidationReport rep = validate_structure(spec);
  if (static_cast<int>(spec.stages.size()) != spec.num_stages) return rep;
  for (int i = 0; i < spec.num_stages; ++i) {
    const int warm = std::max(0, peak_in_flight(spec.stages[i]) - 1);
    const Bytes used = hbm_usage(i, profile, hbm, cfg.tokens_per_micro_batch(), warm);
    if (used > hbm.bound_bytes[i])
      rep.violations.push_back({Violation::Kind::kHbm, i,
                                "stage " + std::to_string(i) + ": HBM usage " + std::to_string(used) +
                                    " B exceeds bound " + std::to_string(hbm.bound_bytes[i]) + " B (warm-up " +
                                    std::to_string(warm) + ")"});
  }
  return rep;
}

// Cheap HBM feasibility of a generated schedule, without building it.
inline bool hbm_feasible(int num_stages, const IterationConfig& cfg, std::span<const int> delta_n,
                         const ComputeProfile& profile, const HbmSpec& hbm) {
  for (int i = 0; i < num_stages; ++i) {
    const int w = warmup_depth(num_stages, cfg.num_micro_batches(), i, delta_n[i]);
    if (hbm_usage(i, profile, hbm, cfg.tokens_per_micro_batch(), w) > hbm.bound_bytes[i]) return false;
  }
  return true;
}

// Effective latency of every link given the current warm-up extension.
inline std::vector<Duration> effective_link_latencies(const ClusterSpec& cluster, const IterationConfig& cfg,
                                                      const ComputeProfile& profile, std::span<const int> delta_n) {
  const int p = cluster.num_stages();
  if (static_cast<int>(delta_n.size()) != p) throw ConfigError("delta_n length does not match stage count");
  const Bytes msg = activation_message_bytes(cfg);
  const PassTimes pt = profile.pass_times(cfg.tokens_per_micro_batch());
  std::vector<Duration> out;
  out.reserve(p - 1);
  for (int l = 0; l + 1 < p; ++l)
    out.push_back(effective_latency(link_latency(cluster.links[l], msg, cluster.prop_delay_per_km),
                                    link_lead(delta_n, l), pt.forward, pt.backward));
  return out;
}

// The link with the largest effective latency; ties go to the lowest index.
inline int dependency_chain(const ClusterSpec& cluster, const IterationConfig& cfg, const ComputeProfile& profile,
                            std::span<const int> delta_n) {
  if (cluster.num_stages() < 2) throw ConfigError("dependency chain needs at least two stages (no links)");
  const auto eff = effective_link_latencies(cluster, cfg, profile, delta_n);
  return static_cast<int>(std::max_element(eff.begin(), eff.end()) - eff.begin());
}

// Line-oriented text form:
//   # p=2 m=4 delta_n=1,0
//   0: F1 F2 F3 B1 F4 B2 B3 B4
//   1: F1 B1 F2 B2 F3 B3 F4 B4
inline std::string to_text(const ScheduleSpec& spec) {
  std::ostringstream os;
  os << "# p=" << spec.num_stages << " m=" << spec.num_micro_batches << " delta_n=";
  for (std::size_t i = 0; i < spec.delta_n.size(); ++i) os << (i ? "," : "") << spec.delta_n[i];
  os << '\n';
  for (std::size_t i = 0; i < spec.stages.size(); ++i) {
    os << i << ':';
    for (const auto& t : spec.stages[i]) os << ' ' << t.label();
    os << '\n';
  }
  return os.str();
}

namespace detail {

inline int parse_int(std::string_view s, int line) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError("bad integer '" + std::string(s) + "'", line);
  return v;
}

}  // namespace detail

inline ScheduleSpec parse_schedule_text(std::string_view text) {
  ScheduleSpec spec;
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    if (line[0] == '#') {
      ls >> tok;
      while (ls >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) throw ParseError("bad header field '" + tok + "'", lineno);
        auto key = tok.substr(0, eq);
        std::string_view val = std::string_view(tok).substr(eq + 1);
        if (key == "p") {
          spec.num_stages = detail::parse_int(val, lineno);
        } else if (key == "m") {
          spec.num_micro_batches = detail::parse_int(val, lineno);
        } else if (key == "delta_n") {
          while (!val.empty()) {
            auto comma = val.find(',');
            spec.delta_n.push_back(detail::parse_int(val.substr(0, comma), lineno));
            val = comma == std::string_view::npos ? std::string_view{} : val.substr(comma + 1);
          }
        } else {
          throw ParseError("unknown header field '" + key + "'", lineno);
        }
      }
      header = true;
      continue;
    }
    if (!header) throw ParseError("missing '# p=.. m=.. delta_n=..' header", lineno);
    ls >> tok;
    if (tok.empty() || tok.back() != ':') throw ParseError("expected '<stage>:'", lineno);
    const int stage = detail::parse_int(std::string_view(tok).substr(0, tok.size() - 1), lineno);
    if (stage != static_cast<int>(spec.stages.size())) throw ParseError("stages must be listed in order", lineno);
    auto& order = spec.stages.emplace_back();
    while (ls >> tok) {
      if (tok.size() < 2 || (tok[0] != 'F' && tok[0] != 'B')) throw ParseError("bad task '" + tok + "'", lineno);
      order.push_back({tok[0] == 'F' ? TaskKind::kForward : TaskKind::kBackward, stage,
                       detail::parse_int(std::string_view(tok).substr(1), lineno)});
    }
  }
  if (!header) throw ParseError("empty schedule document");
  return spec;
}

}  // namespace geopipe

#endif  // GEOPIPE_SCHEDULE_HPP_
