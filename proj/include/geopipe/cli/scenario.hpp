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

// TOML scenario documents (schema_version = 1). See scenarios/README.md for
// the full key reference.

#ifndef GEOPIPE_CLI_SCENARIO_HPP_
#define GEOPIPE_CLI_SCENARIO_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <toml.hpp>

#include "geopipe/calibration.hpp"
#include "geopipe/core_model.hpp"
#include "geopipe/error.hpp"
#include "geopipe/optimizer.hpp"

namespace geopipe::cli {

inline constexpr std::int64_t kSchemaVersion = 1;

enum class ScheduleKind { k1F1B, kGeoPipe };

// Where the warm-up extension comes from.
struct DeltaNSource {
  enum class Kind { kExplicit, kGreedy, kGa } kind = Kind::kGreedy;
  std::vector<int> values;  // kExplicit only
};

struct Scenario {
  std::string name;
  std::filesystem::path source;
  double time_unit_us = 0;  // 0: no unit line in reports

  ClusterSpec cluster;
  IterationConfig iteration{1, 1, 1};
  HbmSpec hbm;
  std::optional<ComputeProfile> profile;
  std::filesystem::path profile_table;  // empty for synthetic profiles

  ScheduleKind schedule = ScheduleKind::k1F1B;
  DeltaNSource delta_n;

  GaParams ga;
  std::vector<int> allowed_micro_batch_sizes;
  std::vector<int> allowed_seq_lens;
  int max_lead = -1;

  std::vector<double> sweep_grid_gbps;
  double epsilon = 0.01;
  GeoPipeMethod sweep_method = GeoPipeMethod::kGreedy;

  std::string trace_out;
  std::string metrics_out;
  std::string sweep_out;

  const ComputeProfile& compute_profile() const { return *profile; }
  int num_stages() const { return cluster.num_stages(); }

  SearchSpace search_space() const {
    SearchSpace s = SearchSpace::around(iteration);
    if (!allowed_micro_batch_sizes.empty()) s.micro_batch_sizes = allowed_micro_batch_sizes;
    if (!allowed_seq_lens.empty()) s.seq_lens = allowed_seq_lens;
    s.max_lead = max_lead;
    return s;
  }
};

namespace detail {

inline void reject_unknown(const toml::table& t, std::string_view where, std::initializer_list<std::string_view> keys) {
  const std::set<std::string_view> known(keys);
  for (const auto& [k, v] : t)
    if (!known.count(k.str())) throw ConfigError("unknown key '" + std::string(k.str()) + "' in " + std::string(where));
}

inline std::optional<double> number(const toml::node* n, std::string_view what) {
  if (!n) return std::nullopt;
  if (auto i = n->as_integer()) return static_cast<double>(i->get());
  if (auto f = n->as_floating_point()) {
    if (!std::isfinite(f->get())) throw ConfigError(std::string(what) + " must be finite");
    return f->get();
  }
  throw ConfigError(std::string(what) + " must be a number");
}

inline std::optional<std::int64_t> integer(const toml::node* n, std::string_view what) {
  if (!n) return std::nullopt;
  if (auto i = n->as_integer()) return i->get();
  if (auto f = n->as_floating_point(); f && std::isfinite(f->get()) && f->get() == std::floor(f->get()) &&
                                       std::abs(f->get()) < 9.0e18)
    return static_cast<std::int64_t>(f->get());
  throw ConfigError(std::string(what) + " must be an integer");
}

inline int small_int(const toml::node* n, std::string_view what, int fallback) {
  auto v = integer(n, what);
  if (!v) return fallback;
  if (*v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max())
    throw ConfigError(std::string(what) + " out of range");
  return static_cast<int>(*v);
}

inline std::optional<std::string> string(const toml::node* n, std::string_view what) {
  if (!n) return std::nullopt;
  if (auto s = n->as_string()) return s->get();
  throw ConfigError(std::string(what) + " must be a string");
}

template <typename T, typename F>
std::vector<T> list(const toml::node* n, std::string_view what, F each) {
  std::vector<T> out;
  if (!n) return out;
  const auto* arr = n->as_array();
  if (!arr) throw ConfigError(std::string(what) + " must be an array");
  for (const auto& el : *arr) out.push_back(each(&el));
  return out;
}

inline std::vector<int> int_list(const toml::node* n, std::string_view what) {
  return list<int>(n, what, [&](const toml::node* e) { return small_int(e, what, 0); });
}

inline std::vector<double> number_list(const toml::node* n, std::string_view what) {
  return list<double>(n, what, [&](const toml::node* e) { return *number(e, what); });
}

// A scalar applies to every stage; an array gives one value per stage.
inline std::vector<Bytes> per_stage_bytes(const toml::node* n, std::string_view what, int stages, Bytes fallback) {
  if (!n) return std::vector<Bytes>(stages, fallback);
  if (n->is_array()) {
    auto v = list<Bytes>(n, what, [&](const toml::node* e) { return *integer(e, what); });
    if (static_cast<int>(v.size()) != stages)
      throw ConfigError(std::string(what) + " needs " + std::to_string(stages) + " entries");
    return v;
  }
  return std::vector<Bytes>(stages, *integer(n, what));
}

inline Duration us(double v) { return Duration{std::llround(v * 1000.0)}; }

inline LinkSpec link_from(const toml::table* t, std::string_view where, LinkSpec base) {
  if (!t) return base;
  reject_unknown(*t, where, {"distance_km", "bandwidth_gbps", "overhead_us"});
  if (auto v = number(t->get("distance_km"), "distance_km")) base.distance_km = *v;
  if (auto v = number(t->get("bandwidth_gbps"), "bandwidth_gbps")) base.bandwidth_bps = *v * 1e9;
  if (auto v = number(t->get("overhead_us"), "overhead_us")) base.fixed_overhead = us(*v);
  return base;
}

inline const toml::table* table(const toml::table& root, std::string_view key) {
  const auto* n = root.get(key);
  if (!n) return nullptr;
  if (!n->is_table()) throw ConfigError("'" + std::string(key) + "' must be a table");
  return n->as_table();
}

}  // namespace detail

inline Scenario parse_scenario(const toml::table& root, const std::filesystem::path& base_dir) {
  using namespace detail;
  reject_unknown(root, "scenario",
                 {"schema_version", "name", "time_unit_us", "cluster", "iteration", "hbm", "profile", "schedule",
                  "optimizer", "sweep", "output"});
  const auto version = integer(root.get("schema_version"), "schema_version");
  if (!version) throw ConfigError("missing schema_version");
  if (*version != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(*version) + " (expected " +
                      std::to_string(kSchemaVersion) + ")");
  Scenario sc;
  sc.name = string(root.get("name"), "name").value_or("scenario");
  sc.time_unit_us = number(root.get("time_unit_us"), "time_unit_us").value_or(0.0);
  if (sc.time_unit_us < 0) throw ConfigError("time_unit_us must be >= 0");

  // [cluster]
  const auto* cl = table(root, "cluster");
  if (!cl) throw ConfigError("missing [cluster]");
  reject_unknown(*cl, "[cluster]", {"placement", "prop_delay_us_per_km", "intra_dc", "cross_dc", "links"});
  sc.cluster.placement = int_list(cl->get("placement"), "cluster.placement");
  if (sc.cluster.placement.empty()) throw ConfigError("cluster.placement must list at least one stage");
  if (auto v = number(cl->get("prop_delay_us_per_km"), "prop_delay_us_per_km")) sc.cluster.prop_delay_per_km = us(*v);
  const LinkSpec intra = link_from(table(*cl, "intra_dc"), "[cluster.intra_dc]", LinkSpec{0.0, 1.6e12, Duration{0}});
  const LinkSpec cross = link_from(table(*cl, "cross_dc"), "[cluster.cross_dc]", LinkSpec{0.0, 4e11, Duration{0}});
  const int p = sc.num_stages();
  if (const auto* links = cl->get("links")) {
    const auto* arr = links->as_array();
    if (!arr || static_cast<int>(arr->size()) != p - 1)
      throw ConfigError("cluster.links must be an array of " + std::to_string(p - 1) + " link tables");
    for (int i = 0; i < p - 1; ++i) {
      const bool x = sc.cluster.placement[i] != sc.cluster.placement[i + 1];
      sc.cluster.links.push_back(
          link_from((*arr)[i].as_table(), "cluster.links[" + std::to_string(i) + "]", x ? cross : intra));
    }
  } else {
    for (int i = 0; i < p - 1; ++i)
      sc.cluster.links.push_back(sc.cluster.placement[i] != sc.cluster.placement[i + 1] ? cross : intra);
  }
  sc.cluster.check();

  // [iteration]
  const auto* it = table(root, "iteration");
  if (!it) throw ConfigError("missing [iteration]");
  reject_unknown(*it, "[iteration]",
                 {"micro_batch_size", "seq_len", "num_micro_batches", "total_tokens", "hidden_dim",
                  "bytes_per_element", "gradient_scale"});
  const int mbs = small_int(it->get("micro_batch_size"), "micro_batch_size", 1);
  const int seq = small_int(it->get("seq_len"), "seq_len", 1);
  const int hidden = small_int(it->get("hidden_dim"), "hidden_dim", 1);
  const int bpe = small_int(it->get("bytes_per_element"), "bytes_per_element", 2);
  const double gscale = number(it->get("gradient_scale"), "gradient_scale").value_or(1.0);
  const auto m = integer(it->get("num_micro_batches"), "num_micro_batches");
  const auto total = integer(it->get("total_tokens"), "total_tokens");
  if (m.has_value() == total.has_value())
    throw ConfigError("[iteration] needs exactly one of num_micro_batches or total_tokens");
  sc.iteration = m ? IterationConfig(mbs, seq, small_int(it->get("num_micro_batches"), "num_micro_batches", 1), hidden,
                                     bpe, gscale)
                   : IterationConfig::from_total_tokens(mbs, seq, *total, hidden, bpe, gscale);

  // [hbm]; absent means unbounded.
  if (const auto* h = table(root, "hbm")) {
    reject_unknown(*h, "[hbm]", {"static_bytes", "bound_bytes"});
    sc.hbm.static_bytes = per_stage_bytes(h->get("static_bytes"), "hbm.static_bytes", p, 0);
    sc.hbm.bound_bytes =
        per_stage_bytes(h->get("bound_bytes"), "hbm.bound_bytes", p, std::numeric_limits<Bytes>::max());
    for (int i = 0; i < p; ++i)
      if (sc.hbm.static_bytes[i] < 0 || sc.hbm.bound_bytes[i] < 0) throw ConfigError("HBM values must be >= 0");
  } else {
    sc.hbm = HbmSpec::unbounded(p);
  }

  // [profile]
  const auto* pr = table(root, "profile");
  if (!pr) throw ConfigError("missing [profile]");
  reject_unknown(*pr, "[profile]", {"table", "synthetic", "uniform"});
  const int sources = (pr->contains("table") ? 1 : 0) + (pr->contains("synthetic") ? 1 : 0) +
                      (pr->contains("uniform") ? 1 : 0);
  if (sources != 1) throw ConfigError("[profile] needs exactly one of table, synthetic, uniform");
  if (auto path = string(pr->get("table"), "profile.table")) {
    sc.profile_table = std::filesystem::path(*path);
    if (sc.profile_table.is_relative()) sc.profile_table = base_dir / sc.profile_table;
    if (!std::filesystem::exists(sc.profile_table))
      throw ConfigError("profile table not found: " + sc.profile_table.string());
    sc.profile = fit_profile(load_measurements_file(sc.profile_table));
  } else if (const auto* syn = table(*pr, "synthetic")) {
    reject_unknown(*syn, "[profile.synthetic]",
                   {"base_overhead_us", "per_token_f_us", "per_token_b_us", "act_per_token_bytes", "token_grid"});
    std::vector<std::int64_t> grid;
    for (int v : int_list(syn->get("token_grid"), "token_grid")) grid.push_back(v);
    sc.profile = synth_profile(us(number(syn->get("base_overhead_us"), "base_overhead_us").value_or(0.0)),
                               FractionalDuration(number(syn->get("per_token_f_us"), "per_token_f_us").value_or(0) * 1000.0),
                               FractionalDuration(number(syn->get("per_token_b_us"), "per_token_b_us").value_or(0) * 1000.0),
                               number(syn->get("act_per_token_bytes"), "act_per_token_bytes").value_or(0.0), grid);
  } else {
    const auto* u = table(*pr, "uniform");
    if (!u) throw ConfigError("profile.uniform must be a table");
    reject_unknown(*u, "[profile.uniform]", {"t_f_us", "t_b_us", "act_mem_bytes"});
    const auto tf = number(u->get("t_f_us"), "t_f_us"), tb = number(u->get("t_b_us"), "t_b_us");
    if (!tf || !tb) throw ConfigError("profile.uniform needs t_f_us and t_b_us");
    sc.profile = ComputeProfile::uniform(us(*tf), us(*tb), integer(u->get("act_mem_bytes"), "act_mem_bytes").value_or(0));
  }

  // [schedule]
  if (const auto* s = table(root, "schedule")) {
    reject_unknown(*s, "[schedule]", {"kind", "delta_n"});
    const auto kind = string(s->get("kind"), "schedule.kind").value_or("1f1b");
    if (kind == "1f1b") sc.schedule = ScheduleKind::k1F1B;
    else if (kind == "geopipe") sc.schedule = ScheduleKind::kGeoPipe;
    else throw ConfigError("schedule.kind must be \"1f1b\" or \"geopipe\", got \"" + kind + "\"");
    if (const auto* dn = s->get("delta_n")) {
      if (dn->is_array()) {
        sc.delta_n = {DeltaNSource::Kind::kExplicit, int_list(dn, "schedule.delta_n")};
      } else {
        const auto how = string(dn, "schedule.delta_n").value();
        if (how == "greedy") sc.delta_n.kind = DeltaNSource::Kind::kGreedy;
        else if (how == "ga") sc.delta_n.kind = DeltaNSource::Kind::kGa;
        else throw ConfigError("schedule.delta_n must be an array, \"greedy\" or \"ga\"");
      }
    }
  }

  // [optimizer]
  if (const auto* o = table(root, "optimizer")) {
    reject_unknown(*o, "[optimizer]",
                   {"population", "generations", "tournament", "crossover_rate", "mutation_rate", "seed", "max_lead",
                    "micro_batch_sizes", "seq_lens"});
    sc.ga.population = small_int(o->get("population"), "population", sc.ga.population);
    sc.ga.generations = small_int(o->get("generations"), "generations", sc.ga.generations);
    sc.ga.tournament = small_int(o->get("tournament"), "tournament", sc.ga.tournament);
    sc.ga.crossover_rate = number(o->get("crossover_rate"), "crossover_rate").value_or(sc.ga.crossover_rate);
    sc.ga.mutation_rate = number(o->get("mutation_rate"), "mutation_rate").value_or(sc.ga.mutation_rate);
    if (auto seed = integer(o->get("seed"), "seed")) {
      if (*seed < 0) throw ConfigError("seed must be >= 0");
      sc.ga.seed = static_cast<std::uint64_t>(*seed);
    }
    sc.max_lead = small_int(o->get("max_lead"), "max_lead", -1);
    sc.allowed_micro_batch_sizes = int_list(o->get("micro_batch_sizes"), "micro_batch_sizes");
    sc.allowed_seq_lens = int_list(o->get("seq_lens"), "seq_lens");
  }
  sc.ga.check();

  // [sweep]
  if (const auto* s = table(root, "sweep")) {
    reject_unknown(*s, "[sweep]", {"grid_gbps", "epsilon", "method"});
    sc.sweep_grid_gbps = number_list(s->get("grid_gbps"), "sweep.grid_gbps");
    sc.epsilon = number(s->get("epsilon"), "sweep.epsilon").value_or(sc.epsilon);
    const auto method = string(s->get("method"), "sweep.method").value_or("greedy");
    if (method == "greedy") sc.sweep_method = GeoPipeMethod::kGreedy;
    else if (method == "ga") sc.sweep_method = GeoPipeMethod::kGa;
    else throw ConfigError("sweep.method must be \"greedy\" or \"ga\"");
  }

  // [output]
  if (const auto* o = table(root, "output")) {
    reject_unknown(*o, "[output]", {"trace", "metrics", "sweep"});
    sc.trace_out = string(o->get("trace"), "output.trace").value_or("");
    sc.metrics_out = string(o->get("metrics"), "output.metrics").value_or("");
    sc.sweep_out = string(o->get("sweep"), "output.sweep").value_or("");
  }
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("scenario file not found: " + path.string());
  toml::table root;
  try {
    root = toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    throw ParseError(path.string() + ": " + std::string(e.description()),
                     static_cast<int>(e.source().begin.line));
  }
  Scenario sc = parse_scenario(root, path.parent_path());
  sc.source = path;
  return sc;
}

inline Scenario parse_scenario_text(std::string_view text, const std::filesystem::path& base_dir = ".") {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ParseError(std::string(e.description()), static_cast<int>(e.source().begin.line));
  }
  return parse_scenario(root, base_dir);
}

}  // namespace geopipe::cli

#endif  // GEOPIPE_CLI_SCENARIO_HPP_
