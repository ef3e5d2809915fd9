#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "heurevo/error.hpp"
#include "heurevo/pool.hpp"
#include "heurevo/rng.hpp"

namespace heurevo {

/// No-breakthrough counter. -1 until the pool first fills, then the number
/// of consecutive full-pool rounds without a new global best.
struct CollapseState {
  std::int64_t t_c = -1;
  double delta0 = 0.0005;
  std::optional<std::int64_t> cap = 25;  // nullopt: no hard cap

  /// Counter as used in the hazard, never negative.
  std::int64_t stagnation() const { return std::max<std::int64_t>(t_c, 0); }
};

inline void validate(const CollapseState& s) {
  if (!(s.delta0 > 0.0 && s.delta0 < 1.0)) throw ConfigError("delta0 must lie in (0, 1)");
  if (s.cap && *s.cap < 1) throw ConfigError("collapse cap must be positive");
}

inline void observe_round(CollapseState& s, bool new_global_best, bool pool_full) {
  if (!new_global_best && pool_full) {
    s.t_c = std::max<std::int64_t>(s.t_c, 0) + 1;
  } else {
    s.t_c = std::min<std::int64_t>(s.t_c, 0);
  }
}

/// One uniform draw is consumed whenever t_c >= 1, including rounds that hit
/// the cap, so the random stream does not depend on which branch fired.
inline bool should_collapse(const CollapseState& s, Pcg32& rng) {
  if (s.t_c < 1) return false;
  const double u = rng.uniform01();
  const bool capped = s.cap && s.t_c >= *s.cap;
  return u < static_cast<double>(s.t_c) * s.delta0 || capped;
}

/// Keeps the seeds (in order) plus the current best; returns the kept ids.
inline std::vector<std::string> perform_collapse(HeuristicPool& pool, CollapseState& s) {
  const Heuristic* best = pool.best();
  if (best == nullptr) throw InternalError("collapse on an empty pool");
  std::vector<Heuristic> kept = pool.seeds();
  const Heuristic top = *best;
  if (std::none_of(kept.begin(), kept.end(), [&](const Heuristic& h) { return h.id == top.id; })) {
    kept.push_back(top);
  }
  std::vector<std::string> ids;
  for (const auto& h : kept) ids.push_back(h.id);
  pool.reset(std::move(kept));
  s.t_c = -1;
  return ids;
}

/// Closed-form mean stagnation length for an uncapped linear hazard.
inline double expected_stagnation_rounds(double delta0) {
  if (!(delta0 > 0.0)) throw std::invalid_argument("delta0 must be positive");
  return std::sqrt(std::numbers::pi / (2.0 * delta0));
}

/// P(no collapse during the first k stagnant rounds), uncapped.
inline double survival_probability(std::int64_t k, double delta0) {
  double p = 1.0;
  for (std::int64_t i = 1; i <= k; ++i) p *= std::max(0.0, 1.0 - static_cast<double>(i) * delta0);
  return p;
}

/// Exact mean of the uncapped discrete process, sum over k >= 0 of S(k).
inline double exact_stagnation_mean(double delta0) {
  double total = 0.0;
  for (std::int64_t k = 0;; ++k) {
    const double s = survival_probability(k, delta0);
    if (s == 0.0) break;
    total += s;
  }
  return total;
}

struct StagnationStats {
  double mean = 0.0;
  std::int64_t max_length = 0;
  std::size_t trials = 0;
};

/// Monte Carlo of the stagnation length, driving the same observe/should
/// functions the engine uses with a permanently full, never-improving pool.
inline StagnationStats simulate_stagnation(double delta0, std::optional<std::int64_t> cap, std::size_t trials,
                                           Pcg32& rng) {
  StagnationStats st;
  st.trials = trials;
  double sum = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    CollapseState s{0, delta0, cap};
    for (;;) {
      observe_round(s, false, true);
      if (should_collapse(s, rng)) break;
    }
    sum += static_cast<double>(s.t_c);
    st.max_length = std::max(st.max_length, s.t_c);
  }
  st.mean = trials ? sum / static_cast<double>(trials) : 0.0;
  return st;
}

}  // namespace heurevo
