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

// Configuration search for the warm-up-extended schedule: greedy refinement
// of the dependency chain, a seeded genetic search over (micro-batch size,
// sequence length, per-link lead), and cross-DC bandwidth sweeps.

#ifndef GEOPIPE_OPTIMIZER_HPP_
#define GEOPIPE_OPTIMIZER_HPP_

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "geopipe/calibration.hpp"
#include "geopipe/core_model.hpp"
#include "geopipe/error.hpp"
#include "geopipe/schedule.hpp"
#include "geopipe/simulator.hpp"

namespace geopipe {

// Makespan of the generated schedule for `delta_n`; skips validation.
inline Duration schedule_makespan(int num_stages, const IterationConfig& cfg, const std::vector<int>& delta_n,
                                  const StageTimings& timings) {
  return simulate(build_geopipe(num_stages, cfg.num_micro_batches(), delta_n), timings).makespan;
}

struct RefineStep {
  int link = 0;
  std::vector<int> delta_n;
  Duration makespan{0};
};

struct RefineResult {
  std::vector<int> delta_n;
  Duration makespan{0};
  Duration baseline_makespan{0};
  std::vector<RefineStep> steps;  // accepted increments, in order
};

// Greedy dependency-chain refinement. Each round ranks links by effective
// latency (the chain first) and grants one more lead on the first link whose
// increment stays within HBM and strictly lowers the simulated makespan, or
// failing that, does not raise it. Stops when every effective latency is zero
// or no link can take another lead. Leads are capped at saturation, so the
// loop is finite.
inline RefineResult refine_dependency_chain(const ClusterSpec& cluster, const IterationConfig& cfg,
                                            const ComputeProfile& profile, const HbmSpec& hbm) {
  cluster.check();
  const int p = cluster.num_stages(), m = cfg.num_micro_batches();
  hbm.check(p);
  const StageTimings timings = stage_timings(cluster, profile, cfg);
  RefineResult res;
  res.delta_n.assign(p, 0);
  res.makespan = res.baseline_makespan = schedule_makespan(p, cfg, res.delta_n, timings);
  if (p < 2) return res;

  while (true) {
    const auto eff = effective_link_latencies(cluster, cfg, profile, res.delta_n);
    std::vector<int> order;
    for (int l = 0; l < p - 1; ++l)
      if (eff[l] > Duration::zero()) order.push_back(l);
    if (order.empty()) break;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eff[a] > eff[b]; });

    // Prefer the first increment that strictly helps. Failing that, take the
    // first one that does not hurt: a residual latency can sit off the
    // critical path for now and still cost once an upstream link is fixed.
    std::vector<std::pair<int, std::vector<int>>> tried;
    std::vector<Duration> spans;
    for (int link : order) {
      if (warmup_depth(p, m, link, res.delta_n[link]) >= m - 1) continue;  // lead saturated
      auto cand = res.delta_n;
      for (int i = 0; i <= link; ++i) ++cand[i];
      if (!hbm_feasible(p, cfg, cand, profile, hbm)) continue;
      spans.push_back(schedule_makespan(p, cfg, cand, timings));
      tried.emplace_back(link, std::move(cand));
      if (spans.back() < res.makespan) break;
    }
    std::size_t pick = 0;
    while (pick < tried.size() && spans[pick] >= res.makespan) ++pick;
    if (pick == tried.size()) {
      pick = 0;
      while (pick < tried.size() && spans[pick] > res.makespan) ++pick;
    }
    const bool accepted = pick < tried.size();
    if (accepted) {
      res.delta_n = std::move(tried[pick].second);
      res.makespan = spans[pick];
      res.steps.push_back({tried[pick].first, res.delta_n, res.makespan});
    }
    if (!accepted) break;
  }
  return res;
}

// The space the genetic search walks: every allowed (micro-batch size,
// sequence length) pair that splits the token budget, times per-link leads.
struct SearchSpace {
  std::int64_t total_tokens = 0;
  std::vector<int> micro_batch_sizes;
  std::vector<int> seq_lens;
  int hidden_dim = 1;
  int bytes_per_element = 2;
  double gradient_scale = 1.0;
  int max_lead = -1;  // per-link cap; negative means (largest m) - 1

  static SearchSpace around(const IterationConfig& cfg) {
    return {cfg.total_tokens(), {cfg.micro_batch_size()}, {cfg.seq_len()}, cfg.hidden_dim(),
            cfg.bytes_per_element(), cfg.gradient_scale(), -1};
  }

  bool divides(int mbs_index, int seq_index) const {
    const std::int64_t per = std::int64_t{micro_batch_sizes[mbs_index]} * seq_lens[seq_index];
    return total_tokens >= per && total_tokens % per == 0;
  }

  IterationConfig config(int mbs_index, int seq_index) const {
    return IterationConfig::from_total_tokens(micro_batch_sizes[mbs_index], seq_lens[seq_index], total_tokens,
                                              hidden_dim, bytes_per_element, gradient_scale);
  }
};

struct Genome {
  int mbs_index = 0;
  int seq_index = 0;
  std::vector<int> leads;  // one per link
  friend auto operator<=>(const Genome&, const Genome&) = default;
};

struct GaParams {
  int population = 32;
  int generations = 100;
  int tournament = 3;
  double crossover_rate = 0.9;
  double mutation_rate = 0.1;
  std::uint64_t seed = 0;
  int jobs = 1;

  void check() const {
    if (population < 2) throw ConfigError("GA population must be >= 2");
    if (generations < 0) throw ConfigError("GA generations must be >= 0");
    if (tournament < 1) throw ConfigError("GA tournament size must be >= 1");
    if (!(crossover_rate >= 0 && crossover_rate <= 1) || !(mutation_rate >= 0 && mutation_rate <= 1))
      throw ConfigError("GA rates must lie in [0, 1]");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
  }
};

struct OptResult {
  Genome best;
  std::vector<int> best_delta_n;
  int best_micro_batch_size = 0;
  int best_seq_len = 0;
  int best_num_micro_batches = 0;
  Duration best_makespan{0};
  double best_bubble_ratio = 0.0;
  Genome baseline;
  Duration baseline_makespan{0};
  double baseline_bubble_ratio = 0.0;
  std::vector<Duration> history;  // best makespan after each generation, generation 0 first; excludes the final climb
  std::int64_t evaluations = 0;   // distinct schedules simulated
};

namespace detail {

class GeneticSearch {
 public:
  GeneticSearch(const ClusterSpec& cluster, const ComputeProfile& profile, const HbmSpec& hbm,
                const SearchSpace& space, const GaParams& params)
      : cluster_(cluster), profile_(profile), hbm_(hbm), space_(space), params_(params),
        p_(cluster.num_stages()), rng_(params.seed) {
    cluster_.check();
    hbm_.check(p_);
    params_.check();
    if (space_.micro_batch_sizes.empty() || space_.seq_lens.empty())
      throw ConfigError("allowed micro-batch sizes and sequence lengths must be non-empty");
    classify_pairs();
  }

  OptResult run(std::optional<std::pair<int, int>> reference) {
    Genome base{feasible_.front().first, feasible_.front().second, std::vector<int>(p_ - 1, 0)};
    if (reference && pair_ok(reference->first, reference->second)) {
      base.mbs_index = reference->first;
      base.seq_index = reference->second;
    }

    std::vector<Genome> pop{base};
    while (static_cast<int>(pop.size()) < params_.population) pop.push_back(random_genome());
    for (auto& g : pop) repair(g);
    evaluate(pop);

    OptResult res;
    res.baseline = base;
    res.baseline_makespan = fitness(base);
    sort_population(pop);
    res.history.push_back(fitness(pop.front()));

    const int elites = std::min(2, params_.population);
    for (int gen = 0; gen < params_.generations; ++gen) {
      std::vector<Genome> next(pop.begin(), pop.begin() + elites);
      while (static_cast<int>(next.size()) < params_.population) {
        const Genome& a = tournament(pop);
        const Genome& b = tournament(pop);
        Genome child = coin(params_.crossover_rate) ? crossover(a, b) : a;
        mutate(child);
        repair(child);
        next.push_back(std::move(child));
      }
      evaluate(next);
      pop = std::move(next);
      sort_population(pop);
      res.history.push_back(fitness(pop.front()));
    }

    // The pair choice reshapes the whole lead landscape, and a pair that only
    // wins with deep leads tends to die out of the population early. Every
    // pair's best genome is climbed to a local optimum before picking.
    res.best = pop.front();
    for (auto [a, b] : feasible_) {
      auto it = niche_best_.find({a, b});
      Genome g = it != niche_best_.end() ? it->second : Genome{a, b, std::vector<int>(p_ - 1, 0)};
      if (it == niche_best_.end()) {
        repair(g);
        evaluate({g});
      }
      g = climb(std::move(g));
      if (better(g, res.best)) res.best = g;
    }
    res.best_delta_n = delta_n_from_leads(res.best.leads);
    const IterationConfig cfg = space_.config(res.best.mbs_index, res.best.seq_index);
    res.best_micro_batch_size = cfg.micro_batch_size();
    res.best_seq_len = cfg.seq_len();
    res.best_num_micro_batches = cfg.num_micro_batches();
    res.best_makespan = fitness(res.best);
    res.best_bubble_ratio =
        simulate(build_geopipe(p_, cfg.num_micro_batches(), res.best_delta_n), timings(res.best)).bubble_ratio;
    const IterationConfig base_cfg = space_.config(base.mbs_index, base.seq_index);
    res.baseline_bubble_ratio = simulate(build_1f1b(p_, base_cfg.num_micro_batches()), timings(base)).bubble_ratio;
    res.evaluations = static_cast<std::int64_t>(memo_.size());
    return res;
  }

 private:
  using Key = std::vector<int>;  // mbs index, seq index, warm-up depths

  void classify_pairs() {
    std::vector<std::string> reasons;
    const int na = static_cast<int>(space_.micro_batch_sizes.size());
    const int nb = static_cast<int>(space_.seq_lens.size());
    ok_.assign(na, std::vector<char>(nb, 0));
    int max_m = 1;
    for (int a = 0; a < na; ++a)
      for (int b = 0; b < nb; ++b) {
        const std::string tag = "mbs=" + std::to_string(space_.micro_batch_sizes[a]) +
                                " seq=" + std::to_string(space_.seq_lens[b]) + ": ";
        if (space_.micro_batch_sizes[a] < 1 || space_.seq_lens[b] < 1) {
          reasons.push_back(tag + "non-positive value");
          continue;
        }
        if (!space_.divides(a, b)) {
          reasons.push_back(tag + "does not divide total_tokens=" + std::to_string(space_.total_tokens));
          continue;
        }
        const IterationConfig cfg = space_.config(a, b);
        if (!hbm_feasible(p_, cfg, std::vector<int>(p_, 0), profile_, hbm_)) {
          reasons.push_back(tag + "1F1B baseline exceeds the HBM bound");
          continue;
        }
        ok_[a][b] = 1;
        feasible_.emplace_back(a, b);
        max_m = std::max(max_m, cfg.num_micro_batches());
        timings_[{a, b}] = stage_timings(cluster_, profile_, cfg);
      }
    if (feasible_.empty()) {
      std::string what = "no feasible configuration:";
      for (const auto& r : reasons) what += "\n  " + r;
      throw InfeasibleError(what);
    }
    max_lead_ = space_.max_lead >= 0 ? space_.max_lead : max_m - 1;
  }

  bool pair_ok(int a, int b) const {
    return a >= 0 && b >= 0 && a < static_cast<int>(ok_.size()) && b < static_cast<int>(ok_[a].size()) && ok_[a][b];
  }

  const StageTimings& timings(const Genome& g) const { return timings_.at({g.mbs_index, g.seq_index}); }

  int uniform(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
  bool coin(double prob) { return static_cast<double>(rng_() >> 11) * 0x1.0p-53 < prob; }

  Genome random_genome() {
    Genome g{uniform(static_cast<int>(space_.micro_batch_sizes.size())),
             uniform(static_cast<int>(space_.seq_lens.size())), std::vector<int>(p_ - 1)};
    for (auto& l : g.leads) l = uniform(max_lead_ + 1);
    return g;
  }

  // Snap to the nearest feasible pair, then shed leads until HBM fits. The
  // feasible region is a down-set in lead space, so this always terminates.
  void repair(Genome& g) const {
    if (!pair_ok(g.mbs_index, g.seq_index)) {
      auto best = feasible_.front();
      int best_d = std::numeric_limits<int>::max();
      for (auto [a, b] : feasible_) {
        const int d = std::abs(a - g.mbs_index) + std::abs(b - g.seq_index);
        if (d < best_d) {
          best_d = d;
          best = {a, b};
        }
      }
      g.mbs_index = best.first;
      g.seq_index = best.second;
    }
    for (auto& l : g.leads) l = std::clamp(l, 0, max_lead_);
    const IterationConfig cfg = space_.config(g.mbs_index, g.seq_index);
    const int m = cfg.num_micro_batches();
    while (true) {
      const auto dn = delta_n_from_leads(g.leads);
      int violating = -1;
      for (int i = 0; i < p_ && violating < 0; ++i)
        if (hbm_usage(i, profile_, hbm_, cfg.tokens_per_micro_batch(), warmup_depth(p_, m, i, dn[i])) >
            hbm_.bound_bytes[i])
          violating = i;
      if (violating < 0) return;
      int j = violating;
      while (j < p_ - 1 && g.leads[j] == 0) ++j;
      if (j >= p_ - 1) return;  // baseline infeasible; excluded by classify_pairs
      --g.leads[j];
    }
  }

  Key key(const Genome& g) const {
    const int m = space_.config(g.mbs_index, g.seq_index).num_micro_batches();
    const auto dn = delta_n_from_leads(g.leads);
    Key k{g.mbs_index, g.seq_index};
    for (int i = 0; i < p_; ++i) k.push_back(warmup_depth(p_, m, i, dn[i]));
    return k;
  }

  Duration fitness(const Genome& g) const { return memo_.at(key(g)); }

  // Fitness evaluations are independent; only they run in parallel.
  void evaluate(const std::vector<Genome>& pop) {
    std::vector<std::pair<Key, const Genome*>> todo;
    for (const auto& g : pop) {
      auto k = key(g);
      if (memo_.count(k) || std::any_of(todo.begin(), todo.end(), [&](const auto& t) { return t.first == k; }))
        continue;
      todo.emplace_back(std::move(k), &g);
    }
    std::vector<Duration> out(todo.size());
    auto work = [&](std::size_t i) {
      const Genome& g = *todo[i].second;
      const IterationConfig cfg = space_.config(g.mbs_index, g.seq_index);
      out[i] = schedule_makespan(p_, cfg, delta_n_from_leads(g.leads), timings(g));
    };
    const int jobs = std::min<int>(params_.jobs, static_cast<int>(todo.size()));
    if (jobs <= 1) {
      for (std::size_t i = 0; i < todo.size(); ++i) work(i);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::jthread> pool;
      for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&] {
          for (std::size_t i; (i = next.fetch_add(1)) < todo.size();) work(i);
        });
    }
    for (std::size_t i = 0; i < todo.size(); ++i) memo_.emplace(std::move(todo[i].first), out[i]);
    for (const auto& g : pop) {
      auto [it, fresh] = niche_best_.try_emplace({g.mbs_index, g.seq_index}, g);
      if (!fresh && better(g, it->second)) it->second = g;
    }
  }

  // Steepest descent over single-lead +-1 moves.
  Genome climb(Genome g) {
    while (true) {
      std::vector<Genome> nb;
      for (std::size_t i = 0; i < g.leads.size(); ++i)
        for (int d : {1, -1}) {
          Genome n = g;
          n.leads[i] = std::clamp(n.leads[i] + d, 0, max_lead_);
          repair(n);
          if (n.leads != g.leads) nb.push_back(std::move(n));
        }
      if (nb.empty()) return g;
      evaluate(nb);
      const Genome* best = &g;
      for (const auto& n : nb)
        if (better(n, *best)) best = &n;
      if (best == &g) return g;
      g = *best;
    }
  }

  // Lower makespan first, then less total lead, then genome order.
  bool better(const Genome& a, const Genome& b) const {
    const auto fa = fitness(a), fb = fitness(b);
    if (fa != fb) return fa < fb;
    const auto da = delta_n_from_leads(a.leads), db = delta_n_from_leads(b.leads);
    const int sa = std::accumulate(da.begin(), da.end(), 0), sb = std::accumulate(db.begin(), db.end(), 0);
    if (sa != sb) return sa < sb;
    return a < b;
  }

  void sort_population(std::vector<Genome>& pop) const {
    std::stable_sort(pop.begin(), pop.end(), [&](const Genome& a, const Genome& b) { return better(a, b); });
  }

  const Genome& tournament(const std::vector<Genome>& pop) {
    const Genome* best = &pop[uniform(static_cast<int>(pop.size()))];
    for (int i = 1; i < params_.tournament; ++i) {
      const Genome* c = &pop[uniform(static_cast<int>(pop.size()))];
      if (better(*c, *best)) best = c;
    }
    return *best;
  }

  Genome crossover(const Genome& a, const Genome& b) {
    Genome c = a;
    if (coin(0.5)) c.mbs_index = b.mbs_index;
    if (coin(0.5)) c.seq_index = b.seq_index;
    for (std::size_t i = 0; i < c.leads.size(); ++i)
      if (coin(0.5)) c.leads[i] = b.leads[i];
    return c;
  }

  void mutate(Genome& g) {
    if (coin(params_.mutation_rate)) g.mbs_index = uniform(static_cast<int>(space_.micro_batch_sizes.size()));
    if (coin(params_.mutation_rate)) g.seq_index = uniform(static_cast<int>(space_.seq_lens.size()));
    for (auto& l : g.leads) {
      if (!coin(params_.mutation_rate)) continue;
      if (coin(0.5))
        l = std::clamp(l + (coin(0.5) ? 1 : -1), 0, max_lead_);
      else
        l = uniform(max_lead_ + 1);
    }
  }

  ClusterSpec cluster_;
  ComputeProfile profile_;
  HbmSpec hbm_;
  SearchSpace space_;
  GaParams params_;
  int p_;
  std::mt19937_64 rng_;
  std::map<std::pair<int, int>, Genome> niche_best_;
  int max_lead_ = 0;
  std::vector<std::vector<char>> ok_;
  std::vector<std::pair<int, int>> feasible_;
  std::map<std::pair<int, int>, StageTimings> timings_;
  std::map<Key, Duration> memo_;
};

}  // namespace detail

// Seeded genetic search minimizing simulated makespan for a fixed token
// budget. The 1F1B genome at `reference` (or the first feasible pair) is in
// generation 0 and elitism keeps the best, so the result never loses to it.
inline OptResult optimize_ga(const ClusterSpec& cluster, const ComputeProfile& profile, const HbmSpec& hbm,
                             const SearchSpace& space, const GaParams& params,
                             std::optional<std::pair<int, int>> reference = std::nullopt) {
  return detail::GeneticSearch(cluster, profile, hbm, space, params).run(reference);
}

enum class GeoPipeMethod { kGreedy, kGa };

struct SweepPoint {
  double bandwidth_bps = 0;
  Duration makespan_1f1b{0};
  Duration makespan_geopipe{0};
  double br_1f1b = 0;
  double br_geopipe = 0;
  double reduction = 0;
  std::vector<int> delta_n;
};

struct SweepResult {
  std::vector<SweepPoint> points;
};

inline ClusterSpec with_cross_dc_bandwidth(ClusterSpec cluster, double bandwidth_bps) {
  for (int l = 0; l + 1 < cluster.num_stages(); ++l)
    if (cluster.is_cross_dc(l)) cluster.links[l].bandwidth_bps = bandwidth_bps;
  return cluster;
}

// Both schedulers at every bandwidth, applied to cross-DC links only.
inline SweepResult sweep_bandwidth(const ClusterSpec& cluster, const std::vector<double>& grid_bps,
                                   const IterationConfig& cfg, const ComputeProfile& profile, const HbmSpec& hbm,
                                   GeoPipeMethod method = GeoPipeMethod::kGreedy, const GaParams& ga = {}) {
  if (grid_bps.size() < 2) throw ConfigError("bandwidth grid needs at least two points");
  for (std::size_t i = 0; i < grid_bps.size(); ++i) {
    if (!(grid_bps[i] > 0)) throw ConfigError("bandwidth grid values must be positive");
    if (i > 0 && grid_bps[i] <= grid_bps[i - 1]) throw ConfigError("bandwidth grid must be strictly ascending");
  }
  const int p = cluster.num_stages(), m = cfg.num_micro_batches();
  SweepResult out;
  for (double bw : grid_bps) {
    const ClusterSpec c = with_cross_dc_bandwidth(cluster, bw);
    c.check();
    SweepPoint pt;
    pt.bandwidth_bps = bw;
    const StageTimings timings = stage_timings(c, profile, cfg);
    const SimReport base = simulate(build_1f1b(p, m), timings);
    if (method == GeoPipeMethod::kGreedy) {
      pt.delta_n = refine_dependency_chain(c, cfg, profile, hbm).delta_n;
    } else {
      pt.delta_n = optimize_ga(c, profile, hbm, SearchSpace::around(cfg), ga).best_delta_n;
    }
    const SimReport geo = simulate(build_geopipe(p, m, pt.delta_n), timings);
    pt.makespan_1f1b = base.makespan;
    pt.br_1f1b = base.bubble_ratio;
    pt.makespan_geopipe = geo.makespan;
    pt.br_geopipe = geo.bubble_ratio;
    pt.reduction = reduction(base.bubble_ratio, geo.bubble_ratio);
    out.points.push_back(std::move(pt));
  }
  return out;
}

struct OptimizationPoint {
  int index = 0;
  double bandwidth_bps = 0;
  int peak_reduction_index = 0;
  double peak_reduction_bandwidth_bps = 0;
  double epsilon = 0;
};

// Smallest grid bandwidth whose GeoPipe makespan is within (1 + epsilon) of
// the makespan at the largest grid bandwidth. The argmax of the reduction
// curve is reported alongside for comparison.
inline OptimizationPoint find_optimization_point(const SweepResult& sweep, double epsilon = 0.01) {
  if (sweep.points.empty()) throw ConfigError("empty sweep");
  if (!(epsilon >= 0 && epsilon < 1)) throw ConfigError("epsilon must lie in [0, 1)");
  OptimizationPoint op;
  op.epsilon = epsilon;
  const long double target =
      static_cast<long double>(sweep.points.back().makespan_geopipe.count()) * (1.0L + static_cast<long double>(epsilon));
  for (std::size_t i = 0; i < sweep.points.size(); ++i)
    if (static_cast<long double>(sweep.points[i].makespan_geopipe.count()) <= target) {
      op.index = static_cast<int>(i);
      break;
    }
  op.bandwidth_bps = sweep.points[op.index].bandwidth_bps;
  for (std::size_t i = 1; i < sweep.points.size(); ++i)
    if (sweep.points[i].reduction > sweep.points[op.peak_reduction_index].reduction)
      op.peak_reduction_index = static_cast<int>(i);
  op.peak_reduction_bandwidth_bps = sweep.points[op.peak_reduction_index].bandwidth_bps;
  return op;
}

inline std::string format_gbps(double bps) {
  std::ostringstream os;
  os << std::setprecision(12) << bps / 1e9;
  return os.str();
}

inline void write_sweep_csv(const SweepResult& sweep, std::ostream& out) {
  out << "bandwidth_gbps,makespan_1f1b_us,makespan_geopipe_us,br_1f1b,br_geopipe,reduction\n";
  for (const auto& pt : sweep.points) {
    std::ostringstream row;
    row << std::fixed << std::setprecision(6) << format_gbps(pt.bandwidth_bps) << ','
        << format_us(pt.makespan_1f1b) << ',' << format_us(pt.makespan_geopipe) << ',' << pt.br_1f1b << ','
        << pt.br_geopipe << ',' << pt.reduction;
    out << row.str() << '\n';
  }
}

}  // namespace geopipe

#endif  // GEOPIPE_OPTIMIZER_HPP_
