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

// Domain quantities of a geo-distributed pipeline: the stage chain and its
// links, the per-iteration batch geometry, measured pass times, and HBM
// budgets. Every function here is pure.
//
// Time is integer nanoseconds throughout (std::chrono::nanoseconds), so
// schedule comparisons are exact and runs are bit-reproducible.

#ifndef GEOPIPE_CORE_MODEL_HPP_
#define GEOPIPE_CORE_MODEL_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "geopipe/error.hpp"

namespace geopipe {

using Duration = std::chrono::nanoseconds;
using Bytes = std::int64_t;

using namespace std::chrono_literals;

// Light in fiber travels at roughly 2e8 m/s.
inline constexpr Duration kDefaultPropDelayPerKm = 5us;

namespace detail {

// round(num / den) with halves away from zero; den > 0.
inline std::int64_t div_round(__int128 num, __int128 den) {
  if (num >= 0) return static_cast<std::int64_t>((2 * num + den) / (2 * den));
  return -static_cast<std::int64_t>((-2 * num + den) / (2 * den));
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b, const char* what) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw ConfigError(std::string("arithmetic overflow computing ") + what);
  return out;
}

}  // namespace detail

struct LinkSpec {
  double distance_km = 0.0;
  double bandwidth_bps = 1e12;
  Duration fixed_overhead{0};
};

// A linear chain of stages; link i joins stage i and stage i + 1.
struct ClusterSpec {
  std::vector<int> placement;  // stage -> datacenter id
  std::vector<LinkSpec> links;
  Duration prop_delay_per_km = kDefaultPropDelayPerKm;

  int num_stages() const noexcept { return static_cast<int>(placement.size()); }
  bool is_cross_dc(int link) const { return placement.at(link) != placement.at(link + 1); }

  void check() const {
    if (placement.empty()) throw ConfigError("cluster needs at least one stage");
    if (links.size() + 1 != placement.size())
      throw ConfigError("cluster with " + std::to_string(placement.size()) + " stages needs " +
                        std::to_string(placement.size() - 1) + " links, got " + std::to_string(links.size()));
    if (prop_delay_per_km < Duration::zero()) throw ConfigError("propagation delay must be non-negative");
    for (std::size_t i = 0; i < links.size(); ++i) {
      const auto& l = links[i];
      const std::string tag = "link " + std::to_string(i) + ": ";
      if (!std::isfinite(l.distance_km) || l.distance_km < 0) throw ConfigError(tag + "distance must be finite and >= 0");
      if (!std::isfinite(l.bandwidth_bps) || l.bandwidth_bps <= 0) throw ConfigError(tag + "bandwidth must be finite and > 0");
      if (l.fixed_overhead < Duration::zero()) throw ConfigError(tag + "overhead must be >= 0");
      if (!is_cross_dc(static_cast<int>(i)) && l.distance_km != 0.0)
        throw ConfigError(tag + "intra-datacenter link must have distance 0");
    }
  }
};

// Batch geometry of one training iteration. Construction validates.
class IterationConfig {
 public:
  IterationConfig(int micro_batch_size, int seq_len, int num_micro_batches, int hidden_dim = 1,
                  int bytes_per_element = 2, double gradient_scale = 1.0)
      : micro_batch_size_(micro_batch_size),
        seq_len_(seq_len),
        num_micro_batches_(num_micro_batches),
        hidden_dim_(hidden_dim),
        bytes_per_element_(bytes_per_element),
        gradient_scale_(gradient_scale) {
    if (micro_batch_size < 1) throw ConfigError("micro_batch_size must be >= 1");
    if (seq_len < 1) throw ConfigError("seq_len must be >= 1");
    if (num_micro_batches < 1) throw ConfigError("num_micro_batches must be >= 1");
    if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
    if (bytes_per_element < 1) throw ConfigError("bytes_per_element must be >= 1");
    if (!std::isfinite(gradient_scale) || gradient_scale < 0) throw ConfigError("gradient_scale must be >= 0");
    detail::checked_mul(tokens_per_micro_batch(), num_micro_batches, "total tokens");
  }

  // Derives m from a fixed token budget; the budget must split evenly.
  static IterationConfig from_total_tokens(int micro_batch_size, int seq_len, std::int64_t total_tokens,
                                           int hidden_dim = 1, int bytes_per_element = 2,
                                           double gradient_scale = 1.0) {
    if (micro_batch_size < 1 || seq_len < 1) throw ConfigError("micro_batch_size and seq_len must be >= 1");
    const std::int64_t per = std::int64_t{micro_batch_size} * seq_len;
    if (total_tokens < per || total_tokens % per != 0)
      throw ConfigError("total_tokens " + std::to_string(total_tokens) + " is not a positive multiple of " +
                        std::to_string(per));
    const std::int64_t m = total_tokens / per;
    if (m > std::numeric_limits<int>::max()) throw ConfigError("too many micro-batches");
    return {micro_batch_size, seq_len, static_cast<int>(m), hidden_dim, bytes_per_element, gradient_scale};
  }

  int micro_batch_size() const noexcept { return micro_batch_size_; }
  int seq_len() const noexcept { return seq_len_; }
  int num_micro_batches() const noexcept { return num_micro_batches_; }
  int hidden_dim() const noexcept { return hidden_dim_; }
  int bytes_per_element() const noexcept { return bytes_per_element_; }
  double gradient_scale() const noexcept { return gradient_scale_; }
  std::int64_t tokens_per_micro_batch() const noexcept { return std::int64_t{micro_batch_size_} * seq_len_; }
  std::int64_t total_tokens() const noexcept { return tokens_per_micro_batch() * num_micro_batches_; }

  IterationConfig with_micro_batches(int m) const {
    return {micro_batch_size_, seq_len_, m, hidden_dim_, bytes_per_element_, gradient_scale_};
  }

 private:
  int micro_batch_size_;
  int seq_len_;
  int num_micro_batches_;
  int hidden_dim_;
  int bytes_per_element_;
  double gradient_scale_;
};

struct PassTimes {
  Duration forward{0};
  Duration backward{0};
  Duration sum() const noexcept { return forward + backward; }
  friend bool operator==(const PassTimes&, const PassTimes&) = default;
};

enum class Extrapolation { kClamp, kLinearTail };

// Piecewise-linear tables of pass time and activation memory keyed by tokens
// per micro-batch. Below the first knot values clamp; above the last knot
// they clamp or continue the last segment (floored at zero).
class ComputeProfile {
 public:
  struct Knot {
    std::int64_t tokens = 0;
    Duration t_f{0};
    Duration t_b{0};
    Bytes act_mem = 0;
    friend bool operator==(const Knot&, const Knot&) = default;
  };

  ComputeProfile(std::vector<Knot> knots, Extrapolation mode = Extrapolation::kClamp)
      : knots_(std::move(knots)), mode_(mode) {
    if (knots_.empty()) throw ConfigError("compute profile needs at least one knot");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      const auto& k = knots_[i];
      if (k.t_f < Duration::zero() || k.t_b < Duration::zero() || k.act_mem < 0)
        throw ConfigError("compute profile knot " + std::to_string(i) + " has a negative value");
      if (i > 0 && k.tokens <= knots_[i - 1].tokens)
        throw ConfigError("compute profile knot tokens must be strictly increasing (knot " + std::to_string(i) + ")");
    }
  }

  // T_F = T_B = unit at every token count, no activation memory.
  static ComputeProfile uniform(Duration t_f, Duration t_b, Bytes act_mem = 0) {
    return ComputeProfile({Knot{1, t_f, t_b, act_mem}});
  }

  const std::vector<Knot>& knots() const noexcept { return knots_; }
  Extrapolation extrapolation() const noexcept { return mode_; }

  PassTimes pass_times(std::int64_t tokens) const {
    return {Duration{interpolate(tokens, &Knot::t_f)}, Duration{interpolate(tokens, &Knot::t_b)}};
  }
  Bytes activation_bytes(std::int64_t tokens) const { return interpolate(tokens, &Knot::act_mem); }

 private:
  static std::int64_t value(const Knot& k, Duration Knot::*field) { return (k.*field).count(); }
  static std::int64_t value(const Knot& k, Bytes Knot::*field) { return k.*field; }

  template <typename Field>
  std::int64_t interpolate(std::int64_t tokens, Field field) const {
    if (tokens < 1) throw ConfigError("token count must be >= 1");
    if (tokens <= knots_.front().tokens) return value(knots_.front(), field);
    if (tokens >= knots_.back().tokens) {
      if (mode_ == Extrapolation::kClamp || knots_.size() == 1 || tokens == knots_.back().tokens)
        return value(knots_.back(), field);
      return std::max<std::int64_t>(0, lerp(knots_[knots_.size() - 2], knots_.back(), tokens, field));
    }
    auto hi = std::upper_bound(knots_.begin(), knots_.end(), tokens,
                               [](std::int64_t t, const Knot& k) { return t < k.tokens; });
    return lerp(*(hi - 1), *hi, tokens, field);
  }

  template <typename Field>
  static std::int64_t lerp(const Knot& a, const Knot& b, std::int64_t x, Field field) {
    const __int128 y0 = value(a, field);
    const __int128 y1 = value(b, field);
    return detail::div_round(y0 * (b.tokens - a.tokens) + (y1 - y0) * (x - a.tokens), b.tokens - a.tokens);
  }

  std::vector<Knot> knots_;
  Extrapolation mode_;
};

struct HbmSpec {
  std::vector<Bytes> static_bytes;
  std::vector<Bytes> bound_bytes;

  static HbmSpec uniform(int stages, Bytes static_bytes, Bytes bound) {
    return {std::vector<Bytes>(stages, static_bytes), std::vector<Bytes>(stages, bound)};
  }
  static HbmSpec unbounded(int stages) { return uniform(stages, 0, std::numeric_limits<Bytes>::max()); }

  void check(int stages) const {
    if (static_cast<int>(static_bytes.size()) != stages || static_cast<int>(bound_bytes.size()) != stages)
      throw ConfigError("HBM spec must list one static and one bound value per stage (" + std::to_string(stages) + ")");
  }
};

// One-way time for a message: propagation + serialization + fixed overhead.
inline Duration link_latency(const LinkSpec& link, Bytes msg_bytes,
                             Duration prop_delay_per_km = kDefaultPropDelayPerKm) {
  const long double prop = static_cast<long double>(link.distance_km) * prop_delay_per_km.count();
  const long double ser = static_cast<long double>(msg_bytes) * 8.0L * 1e9L / link.bandwidth_bps;
  return Duration{std::llround(prop) + std::llround(ser)} + link.fixed_overhead;
}

// Bytes of one forward activation (and, scaled, one backward gradient)
// crossing a stage boundary.
inline Bytes activation_message_bytes(const IterationConfig& cfg) {
  auto n = detail::checked_mul(cfg.micro_batch_size(), cfg.seq_len(), "message size");
  n = detail::checked_mul(n, cfg.hidden_dim(), "message size");
  return detail::checked_mul(n, cfg.bytes_per_element(), "message size");
}

inline Bytes gradient_message_bytes(const IterationConfig& cfg) {
  return std::llround(static_cast<long double>(activation_message_bytes(cfg)) * cfg.gradient_scale());
}

inline PassTimes pass_times(const ComputeProfile& profile, std::int64_t tokens) { return profile.pass_times(tokens); }

// Peak HBM of a stage holding warmup + 1 forward activations in flight.
inline Bytes hbm_usage(int stage, const ComputeProfile& profile, const HbmSpec& hbm, std::int64_t tokens,
                       int warmup) {
  const Bytes act = profile.activation_bytes(tokens);
  const Bytes acts = detail::checked_mul(act, std::int64_t{warmup} + 1, "HBM usage");
  const Bytes base = hbm.static_bytes.at(stage);
  if (acts > std::numeric_limits<Bytes>::max() - base) throw ConfigError("arithmetic overflow computing HBM usage");
  return base + acts;
}

// Latency left after `lead` extra warm-up forwards each hide half a
// forward+backward pair; rounded up to the next nanosecond, floored at 0.
inline Duration effective_latency(Duration t_c, int lead, Duration t_f, Duration t_b) {
  const std::int64_t residual2 = 2 * t_c.count() - std::int64_t{lead} * (t_f + t_b).count();
  if (residual2 <= 0) return Duration::zero();
  return Duration{(residual2 + 1) / 2};
}

}  // namespace geopipe

#endif  // GEOPIPE_CORE_MODEL_HPP_
