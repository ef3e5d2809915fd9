#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "heurevo/evaluation.hpp"
#include "heurevo/problems.hpp"
#include "heurevo/response_parser.hpp"

namespace heurevo {

/// A baseline heuristic shipped with the engine, as worker-executable Python.
struct BundledHeuristic {
  std::string name;
  ProblemKind problem;
  std::string code;
};

inline const std::vector<BundledHeuristic>& bundled_heuristics() {
  static const std::vector<BundledHeuristic> list = {
      {"best_fit", ProblemKind::Obp,
       "def step(item_size, remaining_capacity):\n"
       "    \"\"\"Best fit: put the item where it leaves the least room unused.\"\"\"\n"
       "    return -(remaining_capacity - item_size)\n"},
      {"first_fit", ProblemKind::Obp,
       "\"\"\"First fit: put the item into the oldest bin that still has room for it.\"\"\"\n"
       "import numpy as np\n"
       "\n"
       "\n"
       "def step(item_size, remaining_capacity):\n"
       "    return -np.arange(len(remaining_capacity), dtype=float)\n"},
      {"nearest_neighbor", ProblemKind::Tsp,
       "def select_next_node(current_node, destination_node, unvisited_nodes, distance_matrix):\n"
       "    \"\"\"Nearest neighbor: always move to the closest unvisited location.\"\"\"\n"
       "    return min(sorted(unvisited_nodes), key=lambda n: distance_matrix[current_node][n])\n"},
      {"inverse_distance", ProblemKind::Cvrp,
       "import numpy as np\n"
       "\n"
       "\n"
       "def heuristics(distance_matrix, coordinates, demands, capacity):\n"
       "    \"\"\"Inverse distance: short edges are more attractive.\"\"\"\n"
       "    d = np.array(distance_matrix, dtype=float)\n"
       "    np.fill_diagonal(d, np.inf)\n"
       "    return 1.0 / d\n"},
      {"prize_per_distance", ProblemKind::Op,
       "import numpy as np\n"
       "\n"
       "\n"
       "def heuristics(prize, distance, maxlen):\n"
       "    \"\"\"Prize per distance: favor edges leading to a large reward for little travel.\"\"\"\n"
       "    d = np.array(distance, dtype=float)\n"
       "    np.fill_diagonal(d, np.inf)\n"
       "    return np.array(prize, dtype=float)[None, :] / d\n"},
  };
  return list;
}

inline const BundledHeuristic& find_bundled(std::string_view name) {
  for (const auto& b : bundled_heuristics()) {
    if (b.name == name) return b;
  }
  throw ConfigError("no bundled heuristic named " + std::string(name));
}

/// Score per open bin given the item and the bins' remaining capacities.
using ObpScoreFn = std::function<std::vector<double>(double item, const std::vector<double>& remaining)>;

/// Places each item into the feasible bin with the highest score (ties to
/// the lowest index) or opens a new bin when none fits. Returns bins used.
inline std::size_t simulate_obp(const ObpInstance& inst, const ObpScoreFn& score) {
  std::vector<double> remaining;
  for (double item : inst.items) {
    std::optional<std::size_t> chosen;
    if (!remaining.empty()) {
      const auto s = score(item, remaining);
      if (s.size() != remaining.size()) throw std::runtime_error("score vector has the wrong length");
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < remaining.size(); ++b) {
        if (remaining[b] < item) continue;
        if (!std::isfinite(s[b])) throw std::runtime_error("non-finite score for a feasible bin");
        if (!chosen || s[b] > best) {
          chosen = b;
          best = s[b];
        }
      }
    }
    if (chosen) {
      remaining[*chosen] -= item;
    } else {
      remaining.push_back(inst.capacity - item);
    }
  }
  return remaining.size();
}

inline std::vector<double> best_fit_scores(double item, const std::vector<double>& remaining) {
  std::vector<double> s(remaining.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = -(remaining[i] - item);
  return s;
}

inline std::vector<double> first_fit_scores(double, const std::vector<double>& remaining) {
  std::vector<double> s(remaining.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = -static_cast<double>(i);
  return s;
}

/// Closed tour from node 0 that always moves to the nearest unvisited node
/// (ties to the lowest index).
inline double nearest_neighbor_tour(const RoutingInstance& inst) {
  const std::size_t n = inst.size();
  if (n < 2) return 0.0;
  std::vector<bool> seen(n, false);
  std::size_t cur = 0;
  seen[0] = true;
  double len = 0.0;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t next = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (!seen[j] && (next == n || inst.distance[cur][j] < inst.distance[cur][next])) next = j;
    }
    len += inst.distance[cur][next];
    seen[next] = true;
    cur = next;
  }
  return len + inst.distance[cur][0];
}

/// Evaluates the bundled heuristics in-process, recognizing them by their
/// exact code text. Anything else goes to the fallback evaluator if one is
/// set, and fails otherwise.
class NativeEvaluator : public Evaluator {
 public:
  using Fn = std::function<std::vector<double>(const InstanceSet&)>;

  explicit NativeEvaluator(Evaluator* fallback = nullptr) : fallback_(fallback) {
    auto obp = [](ObpScoreFn fn) {
      return [fn](const InstanceSet& set) {
        std::vector<double> out;
        for (const auto& inst : set.obp) out.push_back(static_cast<double>(simulate_obp(inst, fn)));
        return out;
      };
    };
    add(find_bundled("best_fit").code, obp(best_fit_scores));
    add(find_bundled("first_fit").code, obp(first_fit_scores));
    add(find_bundled("nearest_neighbor").code, [](const InstanceSet& set) {
      std::vector<double> out;
      for (const auto& inst : set.routing) out.push_back(nearest_neighbor_tour(inst));
      return out;
    });
  }

  void add(const std::string& code, Fn fn) { twins_[detail::trim(code)] = std::move(fn); }

  bool knows(const std::string& code) const { return twins_.contains(detail::trim(code)); }

  EvalResult evaluate(const EvalTask& task) override {
    if (task.instances == nullptr) throw InternalError("evaluation task without instances");
    const auto it = twins_.find(detail::trim(task.code));
    if (it == twins_.end()) {
      if (fallback_ != nullptr) return fallback_->evaluate(task);
      EvalResult r;
      r.status = EvalStatus::RuntimeError;
      r.error_class = "NoNativeTwin";
      r.message = "code is not a bundled heuristic and no worker is configured";
      return r;
    }
    const auto start = std::chrono::steady_clock::now();
    EvalResult r;
    try {
      r.objectives = it->second(*task.instances);
      r.status = EvalStatus::Ok;
    } catch (const std::exception& e) {
      r.status = EvalStatus::RuntimeError;
      r.error_class = "RuntimeError";
      r.message = e.what();
    }
    r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return finalize(std::move(r), task.problem, task.instances->size());
  }

 private:
  std::map<std::string, Fn> twins_;
  Evaluator* fallback_;
};

}  // namespace heurevo
