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

// Deterministic discrete-event execution of a ScheduleSpec.
//
// Each stage runs its list strictly in order, one task at a time. A forward
// on stage i > 0 waits for the activation of the same micro-batch from stage
// i - 1; a backward on stage i < p - 1 waits for the gradient from stage
// i + 1. Sends are non-blocking: a message leaves when the producing task
// ends and arrives one link latency later, and never delays the sender.
// Receivers buffer without limit.

#ifndef GEOPIPE_SIMULATOR_HPP_
#define GEOPIPE_SIMULATOR_HPP_

#include <algorithm>
#include <cstdint>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "geopipe/core_model.hpp"
#include "geopipe/error.hpp"
#include "geopipe/schedule.hpp"

namespace geopipe {

// Everything the event loop needs, already reduced to durations.
struct StageTimings {
  std::vector<PassTimes> stage;       // per stage
  std::vector<Duration> forward_link;   // activation latency of link i
  std::vector<Duration> backward_link;  // gradient latency of link i

  static StageTimings uniform(int stages, PassTimes pt, std::vector<Duration> link_latency) {
    return {std::vector<PassTimes>(stages, pt), link_latency, link_latency};
  }
};

struct TimelineEntry {
  Task task;
  Duration start{0};
  Duration end{0};
  Duration idle_before{0};  // gap since the previous task on the stage (or t = 0)
  int waited_link = -1;     // link whose message ended that gap, -1 if none
};

struct Message {
  TaskKind kind;  // kForward: activation, kBackward: gradient
  int from = 0;
  int to = 0;
  int micro_batch = 0;
  Duration sent{0};
  Duration arrival{0};
};

// Idle attributed to one link during the steady 1F1B phase of its upstream
// stage (backwards that directly follow a forward, excluding the first).
struct LinkBubble {
  Duration steady_idle{0};
  int occurrences = 0;  // steady gaps > 0
  int samples = 0;      // steady backwards inspected

  Duration per_occurrence() const { return occurrences ? steady_idle / occurrences : Duration::zero(); }
  Duration per_micro_batch() const { return samples ? steady_idle / samples : Duration::zero(); }
};

struct SimReport {
  int num_stages = 0;
  int num_micro_batches = 0;
  std::vector<std::vector<TimelineEntry>> timeline;  // [stage][list position]
  std::vector<Message> messages;                     // in send order
  Duration makespan{0};
  std::vector<Duration> busy;
  std::vector<Duration> idle;
  double bubble_ratio = 0.0;
  std::vector<LinkBubble> links;
  std::int64_t task_events = 0;
  std::int64_t message_events = 0;

  friend bool operator==(const SimReport& a, const SimReport& b) {
    auto key = [](const SimReport& r) {
      return std::tie(r.num_stages, r.num_micro_batches, r.makespan, r.busy, r.idle, r.task_events, r.message_events);
    };
    if (key(a) != key(b) || a.bubble_ratio != b.bubble_ratio || a.timeline.size() != b.timeline.size() ||
        a.messages.size() != b.messages.size())
      return false;
    for (std::size_t s = 0; s < a.timeline.size(); ++s) {
      if (a.timeline[s].size() != b.timeline[s].size()) return false;
      for (std::size_t k = 0; k < a.timeline[s].size(); ++k) {
        const auto &x = a.timeline[s][k], &y = b.timeline[s][k];
        if (!(x.task == y.task) || x.start != y.start || x.end != y.end || x.idle_before != y.idle_before ||
            x.waited_link != y.waited_link)
          return false;
      }
    }
    for (std::size_t i = 0; i < a.messages.size(); ++i) {
      const auto &x = a.messages[i], &y = b.messages[i];
      if (std::tie(x.kind, x.from, x.to, x.micro_batch, x.sent, x.arrival) !=
          std::tie(y.kind, y.from, y.to, y.micro_batch, y.sent, y.arrival))
        return false;
    }
    return true;
  }
};

namespace detail {

struct Event {
  Duration time;
  int stage;
  int position;  // list position of the task that ends or consumes the message
  int type;      // 0 task end, 1 message arrival
  bool operator>(const Event& o) const {
    return std::tie(time, stage, position, type) > std::tie(o.time, o.stage, o.position, o.type);
  }
};

}  // namespace detail

inline SimReport simulate(const ScheduleSpec& spec, const StageTimings& timings) {
  if (auto rep = validate_structure(spec); !rep.ok()) throw ValidationError(rep.messages());
  const int p = spec.num_stages, m = spec.num_micro_batches;
  if (static_cast<int>(timings.stage.size()) != p || static_cast<int>(timings.forward_link.size()) != p - 1 ||
      static_cast<int>(timings.backward_link.size()) != p - 1)
    throw ConfigError("stage timings do not match a " + std::to_string(p) + "-stage schedule");

  SimReport rep;
  rep.num_stages = p;
  rep.num_micro_batches = m;
  rep.timeline.resize(p);

  // position_of[s][kind][j]: where task (kind, j) sits in stage s's list.
  std::vector<std::vector<int>> fwd_pos(p, std::vector<int>(m + 1)), bwd_pos(p, std::vector<int>(m + 1));
  for (int s = 0; s < p; ++s)
    for (int k = 0; k < 2 * m; ++k) {
      const Task& t = spec.stages[s][k];
      (t.kind == TaskKind::kForward ? fwd_pos : bwd_pos)[s][t.micro_batch] = k;
    }

  std::vector<std::vector<char>> have_act(p, std::vector<char>(m + 1, 0)), have_grad(p, std::vector<char>(m + 1, 0));
  std::vector<int> next(p, 0);
  std::vector<char> running(p, 0);
  std::vector<Duration> last_end(p, Duration::zero());
  std::priority_queue<detail::Event, std::vector<detail::Event>, std::greater<>> queue;

  auto dependency_met = [&](int s, const Task& t) {
    if (t.kind == TaskKind::kForward) return s == 0 || have_act[s][t.micro_batch];
    return s == p - 1 || have_grad[s][t.micro_batch];
  };

  auto try_start = [&](int s, Duration now) {
    if (running[s] || next[s] >= 2 * m) return;
    const Task& t = spec.stages[s][next[s]];
    if (!dependency_met(s, t)) return;
    TimelineEntry e;
    e.task = t;
    e.start = now;
    e.end = now + (t.kind == TaskKind::kForward ? timings.stage[s].forward : timings.stage[s].backward);
    e.idle_before = now - last_end[s];
    if (e.idle_before > Duration::zero()) e.waited_link = t.kind == TaskKind::kForward ? s - 1 : s;
    rep.timeline[s].push_back(e);
    running[s] = 1;
    queue.push({e.end, s, next[s], 0});
  };

  for (int s = 0; s < p; ++s) try_start(s, Duration::zero());

  while (!queue.empty()) {
    const detail::Event ev = queue.top();
    queue.pop();
    const int s = ev.stage;
    if (ev.type == 0) {
      ++rep.task_events;
      const Task& t = spec.stages[s][ev.position];
      running[s] = 0;
      last_end[s] = ev.time;
      ++next[s];
      if (t.kind == TaskKind::kForward && s + 1 < p) {
        const Duration at = ev.time + timings.forward_link[s];
        rep.messages.push_back({TaskKind::kForward, s, s + 1, t.micro_batch, ev.time, at});
        queue.push({at, s + 1, fwd_pos[s + 1][t.micro_batch], 1});
      } else if (t.kind == TaskKind::kBackward && s > 0) {
        const Duration at = ev.time + timings.backward_link[s - 1];
        rep.messages.push_back({TaskKind::kBackward, s, s - 1, t.micro_batch, ev.time, at});
        queue.push({at, s - 1, bwd_pos[s - 1][t.micro_batch], 1});
      }
    } else {
      ++rep.message_events;
      const Task& t = spec.stages[s][ev.position];
      (t.kind == TaskKind::kForward ? have_act : have_grad)[s][t.micro_batch] = 1;
    }
    try_start(s, ev.time);
  }

  std::vector<std::string> blocked;
  for (int s = 0; s < p; ++s)
    if (next[s] < 2 * m) {
      const Task& t = spec.stages[s][next[s]];
      blocked.push_back("stage " + std::to_string(s) + ": " + t.label() + " waiting for " +
                        (t.kind == TaskKind::kForward ? "activation from stage " + std::to_string(s - 1)
                                                      : "gradient from stage " + std::to_string(s + 1)));
    }
  if (!blocked.empty()) {
    std::string what = "simulation deadlocked with " + std::to_string(blocked.size()) + " blocked stage(s)";
    for (const auto& b : blocked) what += "\n  " + b;
    throw DeadlockError(what, std::move(blocked));
  }

  rep.busy.assign(p, Duration::zero());
  for (int s = 0; s < p; ++s) {
    for (const auto& e : rep.timeline[s]) rep.busy[s] += e.end - e.start;
    rep.makespan = std::max(rep.makespan, rep.timeline[s].back().end);
  }
  rep.idle.resize(p);
  Duration busy_total{0};
  for (int s = 0; s < p; ++s) {
    rep.idle[s] = rep.makespan - rep.busy[s];
    busy_total += rep.busy[s];
  }
  rep.bubble_ratio =
      rep.makespan > Duration::zero()
          ? static_cast<double>(p * rep.makespan.count() - busy_total.count()) / static_cast<double>(p * rep.makespan.count())
          : 0.0;

  rep.links.resize(std::max(p - 1, 0));
  for (int s = 0; s + 1 < p; ++s) {
    const auto& row = rep.timeline[s];
    bool first_backward = true;
    for (std::size_t k = 1; k < row.size(); ++k) {
      if (row[k].task.kind != TaskKind::kBackward) continue;
      if (first_backward) {
        first_backward = false;
        continue;
      }
      if (row[k - 1].task.kind != TaskKind::kForward) continue;
      auto& lb = rep.links[s];
      ++lb.samples;
      if (row[k].idle_before > Duration::zero()) {
        lb.steady_idle += row[k].idle_before;
        ++lb.occurrences;
      }
    }
  }
  return rep;
}

inline StageTimings stage_timings(const ClusterSpec& cluster, const ComputeProfile& profile,
                                  const IterationConfig& cfg) {
  const int p = cluster.num_stages();
  const PassTimes pt = profile.pass_times(cfg.tokens_per_micro_batch());
  const Bytes act = activation_message_bytes(cfg), grad = gradient_message_bytes(cfg);
  StageTimings t{std::vector<PassTimes>(p, pt), {}, {}};
  for (const auto& l : cluster.links) {
    t.forward_link.push_back(link_latency(l, act, cluster.prop_delay_per_km));
    t.backward_link.push_back(link_latency(l, grad, cluster.prop_delay_per_km));
  }
  return t;
}

// Validates, then simulates under the cluster's latency model.
inline SimReport simulate(const ClusterSpec& cluster, const ScheduleSpec& spec, const ComputeProfile& profile,
                          const IterationConfig& cfg, const HbmSpec& hbm) {
  cluster.check();
  if (auto rep = validate(spec, cluster, profile, hbm, cfg); !rep.ok()) throw ValidationError(rep.messages());
  return simulate(spec, stage_timings(cluster, profile, cfg));
}

struct BubbleMetrics {
  double bubble_ratio = 0.0;
  Duration total_idle{0};
  Duration capacity{0};  // p * makespan
  double steady_bubble_ratio = 0.0;
  std::vector<Duration> link_bubble_per_occurrence;
  std::vector<Duration> link_bubble_per_micro_batch;
  std::vector<int> link_occurrences;
};

// Whole-iteration bubble ratio 1 - sum(busy) / (p * makespan), plus the
// steady-phase variant restricted to each stage's alternating section.
inline BubbleMetrics bubble_metrics(const SimReport& rep) {
  BubbleMetrics bm;
  bm.bubble_ratio = rep.bubble_ratio;
  bm.capacity = rep.makespan * rep.num_stages;
  for (auto d : rep.idle) bm.total_idle += d;
  Duration steady_idle{0}, steady_busy{0};
  for (const auto& row : rep.timeline) {
    int first_b = -1, last_f = -1;
    for (int k = 0; k < static_cast<int>(row.size()); ++k) {
      if (row[k].task.kind == TaskKind::kBackward && first_b < 0) first_b = k;
      if (row[k].task.kind == TaskKind::kForward) last_f = k;
    }
    if (first_b < 0) continue;
    for (int k = first_b + 1; k <= std::min<int>(last_f + 1, static_cast<int>(row.size()) - 1); ++k) {
      steady_idle += row[k].idle_before;
      steady_busy += row[k].end - row[k].start;
    }
  }
  const auto steady_total = steady_idle + steady_busy;
  bm.steady_bubble_ratio =
      steady_total > Duration::zero() ? static_cast<double>(steady_idle.count()) / steady_total.count() : 0.0;
  for (const auto& l : rep.links) {
    bm.link_bubble_per_occurrence.push_back(l.per_occurrence());
    bm.link_bubble_per_micro_batch.push_back(l.per_micro_batch());
    bm.link_occurrences.push_back(l.occurrences);
  }
  return bm;
}

// Relative bubble-ratio reduction of `improved` over `baseline`.
inline double reduction(double baseline, double improved) {
  return baseline > 0.0 ? (baseline - improved) / baseline : 0.0;
}

// First-order cross-DC bubble: per-occurrence size on the dependency chain
// (round trip minus absorbed lead) times the number of micro-batches the
// chain's downstream stage runs outside warm-up. An estimate only.
inline Duration estimate_cross_dc_bubble(const ClusterSpec& cluster, const IterationConfig& cfg,
                                         const ComputeProfile& profile, std::span<const int> delta_n) {
  const int p = cluster.num_stages(), m = cfg.num_micro_batches();
  const int chain = dependency_chain(cluster, cfg, profile, delta_n);
  const PassTimes pt = profile.pass_times(cfg.tokens_per_micro_batch());
  const Duration t_c = link_latency(cluster.links[chain], activation_message_bytes(cfg), cluster.prop_delay_per_km);
  const Duration per = std::max(Duration::zero(), 2 * t_c - link_lead(delta_n, chain) * pt.sum());
  const int downstream_warmup = warmup_depth(p, m, chain + 1, delta_n[chain + 1]);
  return per * (m - downstream_warmup);
}

}  // namespace geopipe

#endif  // GEOPIPE_SIMULATOR_HPP_
