#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heurevo/error.hpp"
#include "heurevo/heuristic.hpp"
#include "heurevo/pool.hpp"
#include "heurevo/rng.hpp"

namespace heurevo {

/// Relative operator weights. Initialization only ever runs on an empty
/// pool, where it is the sole candidate, so it carries no weight.
struct OperatorWeights {
  double simplification = 1.0;
  double injection = 1.0;
  double replacement = 2.0;
  double crossover = 4.0;

  double of(OperatorKind op) const {
    switch (op) {
      case OperatorKind::Simplification: return simplification;
      case OperatorKind::Injection: return injection;
      case OperatorKind::Replacement: return replacement;
      case OperatorKind::Crossover: return crossover;
      case OperatorKind::Initialization: return 1.0;
    }
    return 0.0;
  }

  double max_weight() const { return std::max({simplification, injection, replacement, crossover}); }
};

inline void validate(const OperatorWeights& w) {
  for (double v : {w.simplification, w.injection, w.replacement, w.crossover}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("operator weights must be finite and non-negative");
  }
  // With one pool entry only injection, replacement and simplification apply.
  if (w.injection + w.replacement + w.simplification <= 0.0) {
    throw ConfigError("at least one operator weight must be positive");
  }
}

/// Operators usable at a given pool size, in a fixed order.
inline std::vector<OperatorKind> feasible_operators(std::size_t pool_size) {
  if (pool_size == 0) return {OperatorKind::Initialization};
  std::vector<OperatorKind> ops = {OperatorKind::Injection, OperatorKind::Replacement,
                                   OperatorKind::Simplification};
  if (pool_size >= 2) ops.push_back(OperatorKind::Crossover);
  return ops;
}

/// Weight of each feasible operator after the injection boost.
inline std::vector<double> effective_weights(const OperatorWeights& w, std::size_t pool_size,
                                             std::size_t population_size) {
  std::vector<double> out;
  for (OperatorKind op : feasible_operators(pool_size)) {
    double v = w.of(op);
    if (op == OperatorKind::Injection && pool_size > 0 && pool_size < population_size) v = w.max_weight();
    out.push_back(v);
  }
  return out;
}

struct OperatorProbability {
  OperatorKind op;
  double probability;
};

inline std::vector<OperatorProbability> operator_probabilities(const OperatorWeights& w, std::size_t pool_size,
                                                               std::size_t population_size) {
  const auto ops = feasible_operators(pool_size);
  const auto ws = effective_weights(w, pool_size, population_size);
  double total = 0.0;
  for (double v : ws) total += v;
  if (!(total > 0.0)) throw ConfigError("no feasible operator has positive weight");
  std::vector<OperatorProbability> out;
  for (std::size_t i = 0; i < ops.size(); ++i) out.push_back({ops[i], ws[i] / total});
  return out;
}

inline OperatorKind draw_operator(const OperatorWeights& w, std::size_t pool_size, std::size_t population_size,
                                  Pcg32& rng) {
  const auto ops = feasible_operators(pool_size);
  if (ops.size() == 1) return ops.front();
  const auto ws = effective_weights(w, pool_size, population_size);
  double total = 0.0;
  for (double v : ws) total += v;
  if (!(total > 0.0)) throw ConfigError("no feasible operator has positive weight");
  return ops[sample_index(ws, rng)];
}

/// Base heuristics for a prompt. Crossover's second parent comes from the
/// performance ranking (redrawn until distinct, at most pool-size times,
/// then the best-ranked other entry) or from the diversity ranking against
/// the first parent, on a fair coin.
inline std::vector<Heuristic> select_bases(OperatorKind op, const HeuristicPool& pool, Pcg32& rng) {
  switch (op) {
    case OperatorKind::Initialization:
      return {};
    case OperatorKind::Injection:
    case OperatorKind::Replacement:
    case OperatorKind::Simplification:
      return {pool.rank_sample(rng)};
    case OperatorKind::Crossover: {
      if (pool.size() < 2) throw InternalError("crossover needs two pool entries");
      const Heuristic first = pool.rank_sample(rng);
      if (rng.uniform01() <= 0.5) {
        for (std::size_t attempt = 0; attempt < pool.size(); ++attempt) {
          const Heuristic& second = pool.rank_sample(rng);
          if (second.id != first.id) return {first, second};
        }
        for (std::size_t idx : pool.performance_order()) {
          if (pool.entries()[idx].id != first.id) return {first, pool.entries()[idx]};
        }
        throw InternalError("crossover found no distinct second parent");
      }
      return {first, pool.diversity_rank_sample(first, rng)};
    }
  }
  throw InternalError("unhandled operator");
}

/// Expected number of bases for an operator.
inline std::size_t base_count(OperatorKind op) {
  switch (op) {
    case OperatorKind::Initialization: return 0;
    case OperatorKind::Crossover: return 2;
    default: return 1;
  }
}

/// Append-only list of component names introduced by injection responses.
class ComponentLog {
 public:
  static constexpr std::size_t kRecent = 10;

  void append(std::string c) { items_.push_back(std::move(c)); }
  const std::vector<std::string>& all() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  /// The last min(n, 10) components, oldest first.
  std::vector<std::string> recent(std::size_t n = kRecent) const {
    n = std::min({n, kRecent, items_.size()});
    return {items_.end() - static_cast<std::ptrdiff_t>(n), items_.end()};
  }

 private:
  std::vector<std::string> items_;
};

/// Text between "The new component" and "has been introduced" (leftmost
/// match, case-insensitive, not spanning a blank line), trimmed of spaces
/// and wrapping quotes.
inline std::optional<std::string> parse_component(std::string_view text) {
  std::string lower(text);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  constexpr std::string_view kOpen = "the new component";
  constexpr std::string_view kClose = "has been introduced";
  std::size_t pos = 0;
  while ((pos = lower.find(kOpen, pos)) != std::string::npos) {
    const std::size_t start = pos + kOpen.size();
    const std::size_t end = lower.find(kClose, start);
    if (end == std::string::npos) return std::nullopt;
    std::string_view span = text.substr(start, end - start);
    if (span.find("\n\n") == std::string_view::npos) {
      auto strip = [](char c) {
        return std::isspace(static_cast<unsigned char>(c)) || c == '"' || c == '\'' || c == '`' || c == '*';
      };
      while (!span.empty() && strip(span.front())) span.remove_prefix(1);
      while (!span.empty() && strip(span.back())) span.remove_suffix(1);
      if (!span.empty()) return std::string(span);
    }
    pos = start;
  }
  return std::nullopt;
}

/// Appends the response's component, if any. Returns whether it did.
inline bool record_component(std::string_view response, ComponentLog& log) {
  if (auto c = parse_component(response)) {
    log.append(std::move(*c));
    return true;
  }
  return false;
}

}  // namespace heurevo
