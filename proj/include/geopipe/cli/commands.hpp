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

// Subcommands of the geopipe tool. Exit codes: 0 ok, 1 configuration error,
// 2 validation failure, 3 I/O error.

#ifndef GEOPIPE_CLI_COMMANDS_HPP_
#define GEOPIPE_CLI_COMMANDS_HPP_

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geopipe/calibration.hpp"
#include "geopipe/cli/scenario.hpp"
#include "geopipe/error.hpp"
#include "geopipe/optimizer.hpp"
#include "geopipe/schedule.hpp"
#include "geopipe/simulator.hpp"
#include "geopipe/trace.hpp"

namespace geopipe::cli {

enum ExitCode : int { kOk = 0, kConfig = 1, kValidation = 2, kIo = 3 };

struct Overrides {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::optional<double> epsilon;
  std::string trace_out;
  std::string metrics_out;
  std::string grid;
};

namespace detail {

inline std::string join_ints(const std::vector<int>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "]";
}

inline std::string ratio(double r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << r;
  return os.str();
}

inline std::string percent(double r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << r * 100.0 << '%';
  return os.str();
}

inline std::string in_units(Duration d, double unit_us) {
  std::ostringstream os;
  os << std::setprecision(12) << static_cast<double>(d.count()) / (unit_us * 1000.0);
  return os.str();
}

// "10,25,50" in Gbps -> bits per second.
inline std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("empty entry in --grid '" + text + "'");
    const std::string tok = item.substr(b, e - b + 1);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !(v > 0) || !std::isfinite(v))
      throw ConfigError("bad bandwidth '" + tok + "' in --grid");
    out.push_back(v * 1e9);
  }
  if (out.empty()) throw ConfigError("--grid is empty");
  return out;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  return f;
}

template <typename F>
void write_file(const std::string& path, F body) {
  auto f = open_out(path);
  body(f);
  f.flush();
  if (!f) throw IoError("write failed: " + path);
}

// out.json -> out.<tag>.json
inline std::string tagged(const std::string& path, const std::string& tag) {
  std::filesystem::path p(path);
  const auto ext = p.extension().string();
  p.replace_extension();
  return p.string() + "." + tag + (ext.empty() ? ".json" : ext);
}

inline Scenario load(const Overrides& o) {
  Scenario sc = load_scenario(o.scenario);
  if (o.seed) sc.ga.seed = *o.seed;
  if (o.jobs < 1) throw ConfigError("--jobs must be >= 1");
  sc.ga.jobs = o.jobs;
  if (o.epsilon) sc.epsilon = *o.epsilon;
  if (!o.trace_out.empty()) sc.trace_out = o.trace_out;
  if (!o.metrics_out.empty()) sc.metrics_out = o.metrics_out;
  return sc;
}

inline std::vector<int> geopipe_delta_n(const Scenario& sc) {
  switch (sc.delta_n.kind) {
    case DeltaNSource::Kind::kExplicit:
      return sc.delta_n.values;
    case DeltaNSource::Kind::kGreedy:
      return refine_dependency_chain(sc.cluster, sc.iteration, sc.compute_profile(), sc.hbm).delta_n;
    case DeltaNSource::Kind::kGa: {
      SearchSpace space = SearchSpace::around(sc.iteration);
      space.max_lead = sc.max_lead;
      return optimize_ga(sc.cluster, sc.compute_profile(), sc.hbm, space, sc.ga).best_delta_n;
    }
  }
  return {};
}

inline SimReport run_schedule(const Scenario& sc, const std::vector<int>& delta_n) {
  const ScheduleSpec spec = build_geopipe(sc.num_stages(), sc.iteration.num_micro_batches(), delta_n);
  return simulate(sc.cluster, spec, sc.compute_profile(), sc.iteration, sc.hbm);
}

inline void print_report(std::ostream& out, const Scenario& sc, const char* label, const std::vector<int>& delta_n,
                         const SimReport& rep) {
  const BubbleMetrics bm = bubble_metrics(rep);
  out << "schedule: " << label << '\n';
  out << "delta_n: " << join_ints(delta_n) << '\n';
  out << "makespan_us: " << format_us(rep.makespan) << '\n';
  if (sc.time_unit_us > 0)
    out << "makespan_units: " << in_units(rep.makespan, sc.time_unit_us) << " (1 unit = " << sc.time_unit_us
        << " us)\n";
  out << "bubble_ratio: " << ratio(rep.bubble_ratio) << '\n';
  out << "steady_bubble_ratio: " << ratio(bm.steady_bubble_ratio) << '\n';
  for (std::size_t l = 0; l < rep.links.size(); ++l)
    if (sc.cluster.is_cross_dc(static_cast<int>(l)))
      out << "link " << l << " cross-dc bubble per occurrence: " << format_us(bm.link_bubble_per_occurrence[l])
          << " us over " << bm.link_occurrences[l] << " occurrences\n";
}

inline void emit(const Scenario& sc, const SimReport& rep, const std::string& trace_path,
                 const std::string& metrics_path) {
  if (!trace_path.empty()) write_json(export_trace(rep, sc.cluster), trace_path);
  if (!metrics_path.empty()) write_file(metrics_path, [&](std::ostream& f) { write_metrics_csv(rep, f); });
}

}  // namespace detail

inline int run_simulate(const Overrides& o, std::ostream& out) {
  const Scenario sc = detail::load(o);
  const bool geo = sc.schedule == ScheduleKind::kGeoPipe;
  const auto dn = geo ? detail::geopipe_delta_n(sc) : std::vector<int>(sc.num_stages(), 0);
  const SimReport rep = detail::run_schedule(sc, dn);
  out << "scenario: " << sc.name << '\n';
  detail::print_report(out, sc, geo ? "geopipe" : "1f1b", dn, rep);
  detail::emit(sc, rep, sc.trace_out, sc.metrics_out);
  return kOk;
}

inline int run_compare(const Overrides& o, std::ostream& out) {
  const Scenario sc = detail::load(o);
  const std::vector<int> zeros(sc.num_stages(), 0);
  const auto dn = detail::geopipe_delta_n(sc);
  const SimReport base = detail::run_schedule(sc, zeros);
  const SimReport geo = detail::run_schedule(sc, dn);
  out << "scenario: " << sc.name << '\n';
  detail::print_report(out, sc, "1f1b", zeros, base);
  detail::print_report(out, sc, "geopipe", dn, geo);
  const double ms_red = base.makespan.count() > 0
                            ? static_cast<double>((base.makespan - geo.makespan).count()) / base.makespan.count()
                            : 0.0;
  out << "makespan_reduction: " << detail::percent(ms_red) << '\n';
  out << "bubble_ratio_reduction: " << detail::percent(reduction(base.bubble_ratio, geo.bubble_ratio)) << '\n';
  if (!sc.trace_out.empty()) {
    detail::emit(sc, base, detail::tagged(sc.trace_out, "1f1b"), "");
    detail::emit(sc, geo, detail::tagged(sc.trace_out, "geopipe"), "");
  }
  if (!sc.metrics_out.empty()) {
    detail::emit(sc, base, "", detail::tagged(sc.metrics_out, "1f1b"));
    detail::emit(sc, geo, "", detail::tagged(sc.metrics_out, "geopipe"));
  }
  return kOk;
}

inline int run_optimize(const Overrides& o, std::ostream& out) {
  const Scenario sc = detail::load(o);
  const SearchSpace space = sc.search_space();
  std::optional<std::pair<int, int>> ref;
  for (std::size_t a = 0; a < space.micro_batch_sizes.size(); ++a)
    for (std::size_t b = 0; b < space.seq_lens.size(); ++b)
      if (space.micro_batch_sizes[a] == sc.iteration.micro_batch_size() &&
          space.seq_lens[b] == sc.iteration.seq_len() && !ref)
        ref = std::pair<int, int>(static_cast<int>(a), static_cast<int>(b));
  const OptResult r = optimize_ga(sc.cluster, sc.compute_profile(), sc.hbm, space, sc.ga, ref);
  out << "scenario: " << sc.name << '\n';
  out << "seed: " << sc.ga.seed << '\n';
  out << "evaluations: " << r.evaluations << '\n';
  out << "baseline_1f1b_makespan_us: " << format_us(r.baseline_makespan) << '\n';
  out << "baseline_1f1b_bubble_ratio: " << detail::ratio(r.baseline_bubble_ratio) << '\n';
  out << "best_micro_batch_size: " << r.best_micro_batch_size << '\n';
  out << "best_seq_len: " << r.best_seq_len << '\n';
  out << "best_num_micro_batches: " << r.best_num_micro_batches << '\n';
  out << "best_delta_n: " << detail::join_ints(r.best_delta_n) << '\n';
  out << "best_makespan_us: " << format_us(r.best_makespan) << '\n';
  out << "best_bubble_ratio: " << detail::ratio(r.best_bubble_ratio) << '\n';
  if (!sc.trace_out.empty() || !sc.metrics_out.empty()) {
    const IterationConfig cfg(r.best_micro_batch_size, r.best_seq_len, r.best_num_micro_batches,
                              sc.iteration.hidden_dim(), sc.iteration.bytes_per_element(),
                              sc.iteration.gradient_scale());
    const SimReport rep = simulate(sc.cluster, build_geopipe(sc.num_stages(), cfg.num_micro_batches(), r.best_delta_n),
                                   sc.compute_profile(), cfg, sc.hbm);
    detail::emit(sc, rep, sc.trace_out, sc.metrics_out);
  }
  return kOk;
}

inline int run_sweep(const Overrides& o, std::ostream& out) {
  Scenario sc = detail::load(o);
  const std::vector<double> grid = !o.grid.empty() ? detail::parse_grid(o.grid) : [&] {
    std::vector<double> g;
    for (double v : sc.sweep_grid_gbps) g.push_back(v * 1e9);
    return g;
  }();
  if (grid.empty()) throw ConfigError("no bandwidth grid: pass --grid or set sweep.grid_gbps");
  const SweepResult sweep =
      sweep_bandwidth(sc.cluster, grid, sc.iteration, sc.compute_profile(), sc.hbm, sc.sweep_method, sc.ga);
  const OptimizationPoint op = find_optimization_point(sweep, sc.epsilon);
  const std::string csv_path = !sc.metrics_out.empty() ? sc.metrics_out : sc.sweep_out;
  if (!csv_path.empty()) {
    detail::write_file(csv_path, [&](std::ostream& f) { write_sweep_csv(sweep, f); });
  } else {
    write_sweep_csv(sweep, out);
  }
  out << "optimization_point_gbps: " << format_gbps(op.bandwidth_bps) << " (epsilon " << op.epsilon << ")\n";
  out << "peak_reduction_gbps: " << format_gbps(op.peak_reduction_bandwidth_bps)
      << " (reduction " << detail::percent(sweep.points[op.peak_reduction_index].reduction) << ")\n";
  out << "note: the optimization point is the smallest bandwidth within (1 + epsilon) of the highest-bandwidth "
         "GeoPipe iteration time; it stands in for an unspecified bandwidth cost model\n";
  return kOk;
}

// Parses argv, dispatches, and maps exceptions onto exit codes.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-datacenter pipeline-parallel schedule simulator and optimizer", "geopipe"};
  app.require_subcommand(1);
  Overrides o;
  std::uint64_t seed = 0;
  double epsilon = 0.01;
  int (*handler)(const Overrides&, std::ostream&) = nullptr;

  auto add = [&](const char* name, const char* help, int (*fn)(const Overrides&, std::ostream&), bool grid) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--scenario", o.scenario, "Scenario TOML file")->required();
    sub->add_option("--seed", seed, "RNG seed for the genetic search (default 0)");
    sub->add_option("--jobs", o.jobs, "Parallel fitness evaluations (default 1)");
    sub->add_option("--epsilon", epsilon,
                    "Optimization-point tolerance: smallest bandwidth within (1+epsilon) of the "
                    "highest-bandwidth iteration time (default 0.01)");
    sub->add_option("--trace-out", o.trace_out, "Chrome trace JSON output path");
    sub->add_option("--metrics-out", o.metrics_out,
                    grid ? "Sweep CSV output path (default: stdout)" : "Per-stage metrics CSV output path");
    sub->add_option("--grid", o.grid, "Comma-separated cross-DC bandwidths in Gbps, ascending (e.g. 10,100,400)");
    sub->callback([&handler, fn] { handler = fn; });
  };
  add("simulate", "Simulate the scenario's schedule and print a summary", run_simulate, false);
  add("compare", "Run 1F1B and GeoPipe on identical inputs", run_compare, false);
  add("optimize", "Genetic search over micro-batch size, sequence length and warm-up extension", run_optimize, false);
  add("sweep-bandwidth", "Sweep cross-DC bandwidth and report the optimization point", run_sweep, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }
  const CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--seed")) o.seed = seed;
  if (chosen->count("--epsilon")) o.epsilon = epsilon;
  try {
    return handler(o, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const DeadlockError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfig;
  }
}

}  // namespace geopipe::cli

#endif  // GEOPIPE_CLI_COMMANDS_HPP_
