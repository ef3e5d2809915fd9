#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "heurevo/error.hpp"

namespace heurevo {

using ordered_json = nlohmann::ordered_json;

enum class OperatorKind { Initialization, Injection, Replacement, Crossover, Simplification };

inline constexpr std::array<OperatorKind, 5> kAllOperators = {
    OperatorKind::Initialization, OperatorKind::Injection, OperatorKind::Replacement,
    OperatorKind::Crossover, OperatorKind::Simplification};

inline std::string_view to_string(OperatorKind op) {
  switch (op) {
    case OperatorKind::Initialization: return "initialization";
    case OperatorKind::Injection: return "injection";
    case OperatorKind::Replacement: return "replacement";
    case OperatorKind::Crossover: return "crossover";
    case OperatorKind::Simplification: return "simplification";
  }
  return "?";
}

inline OperatorKind parse_operator(std::string_view name) {
  for (OperatorKind op : kAllOperators) {
    if (to_string(op) == name) return op;
  }
  throw ConfigError("unknown operator: " + std::string(name));
}

/// How a heuristic came to exist. Seeds have no operator.
struct Origin {
  std::optional<OperatorKind> op;
  std::vector<std::string> parents;

  friend bool operator==(const Origin&, const Origin&) = default;
};

/// One unit of evolution: an idea, its source code and the score g(h) measured
/// on the training set (higher is better).
struct Heuristic {
  std::string id;
  std::string idea;
  std::string code;
  double performance = -INFINITY;
  Origin origin;
  int created_round = 0;

  friend bool operator==(const Heuristic&, const Heuristic&) = default;
};

// Pool records are one JSON object per line with a fixed field order:
// id, idea, code, performance, origin, round.
inline ordered_json to_json(const Heuristic& h) {
  ordered_json origin;
  origin["operator"] = h.origin.op ? std::string(to_string(*h.origin.op)) : std::string("seed");
  origin["parents"] = h.origin.parents;
  ordered_json j;
  j["id"] = h.id;
  j["idea"] = h.idea;
  j["code"] = h.code;
  j["performance"] = h.performance;
  j["origin"] = std::move(origin);
  j["round"] = h.created_round;
  return j;
}

inline Heuristic heuristic_from_json(const ordered_json& j) {
  Heuristic h;
  h.id = j.at("id").get<std::string>();
  h.idea = j.at("idea").get<std::string>();
  h.code = j.at("code").get<std::string>();
  h.performance = j.at("performance").get<double>();
  const auto& origin = j.at("origin");
  const auto op = origin.at("operator").get<std::string>();
  if (op != "seed") h.origin.op = parse_operator(op);
  h.origin.parents = origin.at("parents").get<std::vector<std::string>>();
  h.created_round = j.at("round").get<int>();
  return h;
}

}  // namespace heurevo
