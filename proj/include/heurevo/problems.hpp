#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "heurevo/error.hpp"
#include "heurevo/rng.hpp"

namespace heurevo {

enum class ProblemKind { Obp, Tsp, Cvrp, Op };
enum class Direction { Minimize, Maximize };

inline std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::Obp: return "obp";
    case ProblemKind::Tsp: return "tsp";
    case ProblemKind::Cvrp: return "cvrp";
    case ProblemKind::Op: return "op";
  }
  return "?";
}

inline ProblemKind parse_problem(std::string_view name) {
  for (auto k : {ProblemKind::Obp, ProblemKind::Tsp, ProblemKind::Cvrp, ProblemKind::Op}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown problem kind: " + std::string(name));
}

inline Direction direction_of(ProblemKind k) {
  return k == ProblemKind::Op ? Direction::Maximize : Direction::Minimize;
}

/// What the prompts say about a problem and what a generated function must
/// look like.
struct ProblemMeta {
  ProblemKind kind;
  std::string name;
  std::string unit;
  std::string description;
  std::string function_name;
  std::size_t arity;
  std::string signature;
};

inline ProblemMeta problem_meta(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Obp:
      return {kind, "Online Bin Packing", "negated average number of bins used",
              "Items of different sizes arrive one at a time. Each item must be placed, before the next "
              "one is seen, into an open bin that still has room for it or into a newly opened bin. "
              "Using fewer bins is better. The heuristic receives the size of the current item and the "
              "remaining capacities of the open bins and returns one priority score per bin; the item "
              "goes to the feasible bin with the highest score.",
              "step", 2,
              "def step(item_size: float, remaining_capacity: np.ndarray) -> np.ndarray:"};
    case ProblemKind::Tsp:
      return {kind, "Traveling Salesman", "negated tour length",
              "A closed tour must pass through every location exactly once and come back to where it "
              "started. It is built one step at a time by picking the next unvisited location. Shorter "
              "tours are better. The heuristic receives the current location, the start location, the "
              "set of unvisited locations and the distance matrix, and returns the next location.",
              "select_next_node", 4,
              "def select_next_node(current_node: int, destination_node: int, unvisited_nodes: set, "
              "distance_matrix: np.ndarray) -> int:"};
    case ProblemKind::Cvrp:
      return {kind, "Capacitated Vehicle Routing", "negated total travel distance",
              "Vehicles with the same load limit start at a depot, serve customers with known demands "
              "and return to the depot. No vehicle may carry more than its limit and the total distance "
              "driven should be as small as possible. The heuristic returns a matrix of edge "
              "desirability values that steers an ant colony optimization solver.",
              "heuristics", 4,
              "def heuristics(distance_matrix: np.ndarray, coordinates: np.ndarray, demands: np.ndarray, "
              "capacity: int) -> np.ndarray:"};
    case ProblemKind::Op:
      return {kind, "Orienteering", "collected reward",
              "An agent leaves a fixed start location, visits some of the other locations, each worth a "
              "reward, and returns to the start. The total travel length may not exceed a budget and "
              "the collected reward should be as large as possible. The heuristic returns a matrix of "
              "edge desirability values that steers an ant colony optimization solver.",
              "heuristics", 3,
              "def heuristics(prize: np.ndarray, distance: np.ndarray, maxlen: float) -> np.ndarray:"};
  }
  throw InternalError("unhandled problem kind");
}

struct ObpInstance {
  std::vector<double> items;  // arrival order
  double capacity = 100.0;
};

struct RoutingInstance {
  ProblemKind kind = ProblemKind::Tsp;
  std::vector<std::array<double, 2>> coordinates;
  std::vector<std::vector<double>> distance;
  std::vector<double> demands;  // CVRP only, depot demand 0
  double capacity = 0.0;        // CVRP only
  std::vector<double> prizes;   // OP only, start prize 0
  double maxlen = 0.0;          // OP only
  std::size_t depot = 0;

  std::size_t size() const { return coordinates.size(); }
};

inline std::vector<std::vector<double>> euclidean_matrix(std::span<const std::array<double, 2>> pts) {
  std::vector<std::vector<double>> d(pts.size(), std::vector<double>(pts.size(), 0.0));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      d[i][j] = d[j][i] = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
    }
  }
  return d;
}

struct ObpGenerator {
  double shape = 3.0;
  double scale = 45.0;
};

/// Weibull item sizes rounded up to integers and clipped to [1, capacity].
inline ObpInstance generate_obp(std::size_t n_items, double capacity, std::uint64_t seed,
                                ObpGenerator gen = {}) {
  if (!(gen.shape > 0.0) || !(gen.scale > 0.0)) throw ConfigError("Weibull shape and scale must be positive");
  if (!(capacity >= 1.0)) throw ConfigError("bin capacity must be at least 1");
  Pcg32 rng(seed);
  ObpInstance inst;
  inst.capacity = capacity;
  inst.items.reserve(n_items);
  for (std::size_t i = 0; i < n_items; ++i) {
    const double s = std::ceil(rng.weibull(gen.shape, gen.scale));
    inst.items.push_back(std::clamp(s, 1.0, capacity));
  }
  return inst;
}

struct RoutingGenerator {
  int cvrp_min_demand = 1;
  int cvrp_max_demand = 9;
  double cvrp_capacity = 50.0;
  std::optional<double> op_maxlen;  // default depends on n
};

inline double default_op_maxlen(std::size_t n) {
  if (n <= 50) return 3.0;
  if (n <= 100) return 4.0;
  return 5.0;
}

/// Uniform points in the unit square; node 0 is the depot/start.
inline RoutingInstance generate_routing(ProblemKind kind, std::size_t n, std::uint64_t seed,
                                        RoutingGenerator gen = {}) {
  if (kind == ProblemKind::Obp) throw ConfigError("generate_routing called for a packing problem");
  if (n < 2) throw ConfigError("routing instances need at least 2 nodes");
  Pcg32 rng(seed);
  RoutingInstance inst;
  inst.kind = kind;
  inst.coordinates.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform01();
    const double y = rng.uniform01();
    inst.coordinates.push_back({x, y});
  }
  inst.distance = euclidean_matrix(inst.coordinates);
  if (kind == ProblemKind::Cvrp) {
    inst.capacity = gen.cvrp_capacity;
    inst.demands.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
      inst.demands[i] = static_cast<double>(rng.uniform_int(gen.cvrp_min_demand, gen.cvrp_max_demand));
    }
  } else if (kind == ProblemKind::Op) {
    inst.maxlen = gen.op_maxlen.value_or(default_op_maxlen(n));
    inst.prizes.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) inst.prizes[i] = 1.0 - rng.uniform01();  // (0, 1]
  }
  return inst;
}

/// Continuous bound ceil(sum / c).
inline std::int64_t l1_lower_bound(const ObpInstance& inst) {
  double total = 0.0;
  for (double s : inst.items) total += s;
  return static_cast<std::int64_t>(std::ceil(total / inst.capacity - 1e-9));
}

/// Martello-Toth L2 bound on the number of bins.
inline std::int64_t l2_lower_bound(const ObpInstance& inst) {
  const double c = inst.capacity;
  const double half = c / 2.0;
  std::vector<double> alphas{0.0};
  for (double s : inst.items) {
    if (s <= half) alphas.push_back(s);
  }
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

  std::int64_t best = l1_lower_bound(inst);
  for (double alpha : alphas) {
    std::int64_t n1 = 0, n2 = 0;
    double sum2 = 0.0, sum3 = 0.0;
    for (double s : inst.items) {
      if (s > c - alpha) {
        ++n1;
      } else if (s > half) {
        ++n2;
        sum2 += s;
      } else if (s >= alpha) {
        sum3 += s;
      }
    }
    const double overflow = (sum3 - (static_cast<double>(n2) * c - sum2)) / c;
    const auto extra = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(overflow - 1e-9)));
    best = std::max(best, n1 + n2 + extra);
  }
  return best;
}

/// g(h) from per-instance raw objectives (bins, lengths or prizes).
inline double aggregate_performance(std::span<const double> objectives, Direction dir) {
  if (objectives.empty()) throw std::invalid_argument("aggregate_performance: no instances");
  double total = 0.0;
  for (double f : objectives) total += (dir == Direction::Minimize) ? -f : f;
  return total / static_cast<double>(objectives.size());
}

/// Gap in percent relative to a reference value (lower bound or best known).
inline double optimality_gap(double value, double reference, Direction dir) {
  if (!(reference > 0.0)) throw std::invalid_argument("optimality_gap: reference must be positive");
  const double diff = (dir == Direction::Minimize) ? value - reference : reference - value;
  return 100.0 * diff / reference;
}

// ---- instance files -------------------------------------------------------

inline constexpr int kInstanceFileVersion = 1;

struct InstanceSet {
  ProblemKind kind = ProblemKind::Obp;
  std::vector<ObpInstance> obp;
  std::vector<RoutingInstance> routing;

  std::size_t size() const { return kind == ProblemKind::Obp ? obp.size() : routing.size(); }
};

inline nlohmann::ordered_json instance_to_json(const ObpInstance& inst) {
  nlohmann::ordered_json j;
  j["capacity"] = inst.capacity;
  j["items"] = inst.items;
  return j;
}

inline nlohmann::ordered_json instance_to_json(const RoutingInstance& inst, bool with_matrix = false) {
  nlohmann::ordered_json j;
  j["coordinates"] = inst.coordinates;
  if (with_matrix) j["distance_matrix"] = inst.distance;
  j["depot"] = inst.depot;
  if (inst.kind == ProblemKind::Cvrp) {
    j["demands"] = inst.demands;
    j["capacity"] = inst.capacity;
  } else if (inst.kind == ProblemKind::Op) {
    j["prizes"] = inst.prizes;
    j["maxlen"] = inst.maxlen;
  }
  return j;
}

inline nlohmann::ordered_json to_json(const InstanceSet& set) {
  nlohmann::ordered_json j;
  j["version"] = kInstanceFileVersion;
  j["problem"] = std::string(to_string(set.kind));
  auto arr = nlohmann::ordered_json::array();
  if (set.kind == ProblemKind::Obp) {
    for (const auto& i : set.obp) arr.push_back(instance_to_json(i));
  } else {
    for (const auto& i : set.routing) arr.push_back(instance_to_json(i));
  }
  j["instances"] = std::move(arr);
  return j;
}

inline InstanceSet instance_set_from_json(const nlohmann::ordered_json& j) {
  if (!j.contains("version") || j.at("version").get<int>() != kInstanceFileVersion) {
    throw ConfigError("instance file: unsupported or missing version");
  }
  InstanceSet set;
  set.kind = parse_problem(j.at("problem").get<std::string>());
  for (const auto& e : j.at("instances")) {
    if (set.kind == ProblemKind::Obp) {
      ObpInstance inst;
      inst.capacity = e.at("capacity").get<double>();
      inst.items = e.at("items").get<std::vector<double>>();
      for (double s : inst.items) {
        if (!(s > 0.0) || s > inst.capacity) throw ConfigError("instance file: item does not fit an empty bin");
      }
      set.obp.push_back(std::move(inst));
    } else {
      RoutingInstance inst;
      inst.kind = set.kind;
      inst.coordinates = e.at("coordinates").get<std::vector<std::array<double, 2>>>();
      inst.distance = euclidean_matrix(inst.coordinates);
      inst.depot = e.value("depot", std::size_t{0});
      if (set.kind == ProblemKind::Cvrp) {
        inst.demands = e.at("demands").get<std::vector<double>>();
        inst.capacity = e.at("capacity").get<double>();
      } else if (set.kind == ProblemKind::Op) {
        inst.prizes = e.at("prizes").get<std::vector<double>>();
        inst.maxlen = e.at("maxlen").get<double>();
      }
      set.routing.push_back(std::move(inst));
    }
  }
  return set;
}

inline InstanceSet load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open instance file: " + path);
  try {
    return instance_set_from_json(nlohmann::ordered_json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed instance file " + path + ": " + e.what());
  }
}

inline void save_instance_file(const InstanceSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write instance file: " + path);
  out << to_json(set).dump(1) << '\n';
}

struct GenerationParams {
  ProblemKind kind = ProblemKind::Obp;
  std::size_t count = 5;
  std::size_t size = 1000;  // items for OBP, nodes for routing
  double capacity = 100.0;
  std::uint64_t seed = 1;
  ObpGenerator obp;
  RoutingGenerator routing;
};

/// Instance i uses seed + i.
inline InstanceSet generate_instances(const GenerationParams& p) {
  InstanceSet set;
  set.kind = p.kind;
  for (std::size_t i = 0; i < p.count; ++i) {
    if (p.kind == ProblemKind::Obp) {
      set.obp.push_back(generate_obp(p.size, p.capacity, p.seed + i, p.obp));
    } else {
      set.routing.push_back(generate_routing(p.kind, p.size, p.seed + i, p.routing));
    }
  }
  return set;
}

}  // namespace heurevo
