#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heurevo/problems.hpp"
#include "heurevo/response_parser.hpp"

namespace heurevo {

struct SolverParams {
  std::size_t ants = 0;
  std::size_t iterations = 0;
};

/// Default ACO settings per problem (CVRP 30 x 100, OP 20 x 50).
inline SolverParams default_solver_params(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Cvrp: return {30, 100};
    case ProblemKind::Op: return {20, 50};
    default: return {0, 0};
  }
}

struct EvalTask {
  std::string code;
  ProblemKind problem = ProblemKind::Obp;
  SignatureSpec signature;
  const InstanceSet* instances = nullptr;
  SolverParams solver;
  std::uint64_t seed = 0;
  double budget_seconds = 60.0;
};

enum class EvalStatus { Ok, RuntimeError, Timeout, ProtocolError };

inline std::string_view to_string(EvalStatus s) {
  switch (s) {
    case EvalStatus::Ok: return "ok";
    case EvalStatus::RuntimeError: return "runtime_error";
    case EvalStatus::Timeout: return "timeout";
    case EvalStatus::ProtocolError: return "protocol_error";
  }
  return "?";
}

inline std::optional<EvalStatus> parse_eval_status(std::string_view s) {
  for (auto st : {EvalStatus::Ok, EvalStatus::RuntimeError, EvalStatus::Timeout, EvalStatus::ProtocolError}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

struct EvalResult {
  EvalStatus status = EvalStatus::RuntimeError;
  std::vector<double> objectives;  // raw per-instance values: bins, lengths or prizes
  std::optional<double> performance;  // g(h), present iff status is ok
  std::string error_class;
  std::string message;
  double elapsed_seconds = 0.0;

  bool ok() const { return status == EvalStatus::Ok; }
};

/// Fills in g(h) for a successful result; demotes results that lack an
/// objective for some instance.
inline EvalResult finalize(EvalResult r, ProblemKind kind, std::size_t n_instances) {
  if (r.status == EvalStatus::Ok) {
    if (r.objectives.size() != n_instances || n_instances == 0) {
      r.status = EvalStatus::ProtocolError;
      r.error_class = "ObjectiveCountMismatch";
      r.performance.reset();
      return r;
    }
    for (double f : r.objectives) {
      if (!std::isfinite(f)) {
        r.status = EvalStatus::RuntimeError;
        r.error_class = "NonFiniteObjective";
        r.performance.reset();
        return r;
      }
    }
    r.performance = aggregate_performance(r.objectives, direction_of(kind));
  } else {
    r.performance.reset();
  }
  return r;
}

/// Scores one heuristic on a training set.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual EvalResult evaluate(const EvalTask& task) = 0;
};

}  // namespace heurevo
