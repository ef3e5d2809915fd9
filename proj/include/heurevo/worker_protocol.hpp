#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "heurevo/error.hpp"
#include "heurevo/evaluation.hpp"
#include "heurevo/heuristic.hpp"

namespace heurevo {

// One JSON object per line in each direction over the worker's stdin/stdout.

inline constexpr int kWorkerProtocolVersion = 1;

inline ordered_json make_worker_request(const EvalTask& task, std::uint64_t id) {
  if (task.instances == nullptr) throw InternalError("evaluation task without instances");
  ordered_json j;
  j["protocol"] = kWorkerProtocolVersion;
  j["id"] = id;
  j["code"] = task.code;
  j["problem"] = std::string(to_string(task.problem));
  j["function"] = task.signature.function_name;
  j["arity"] = task.signature.arity;
  auto inst = ordered_json::array();
  if (task.problem == ProblemKind::Obp) {
    for (const auto& i : task.instances->obp) inst.push_back(instance_to_json(i));
  } else {
    for (const auto& i : task.instances->routing) inst.push_back(instance_to_json(i, true));
  }
  j["instances"] = std::move(inst);
  j["solver"] = {{"ants", task.solver.ants}, {"iterations", task.solver.iterations}};
  j["seed"] = task.seed;
  j["budget_s"] = task.budget_seconds;
  return j;
}

/// Decodes a response line. Anything malformed or answering another request
/// becomes a protocol error rather than an exception.
inline EvalResult parse_worker_response(const std::string& line, std::uint64_t expected_id) {
  EvalResult r;
  r.status = EvalStatus::ProtocolError;
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    r.error_class = "MalformedResponse";
    r.message = e.what();
    return r;
  }
  try {
    if (j.at("protocol").get<int>() != kWorkerProtocolVersion) {
      r.error_class = "ProtocolVersion";
      return r;
    }
    if (j.at("id").get<std::uint64_t>() != expected_id) {
      r.error_class = "ResponseIdMismatch";
      return r;
    }
    const auto status = parse_eval_status(j.at("status").get<std::string>());
    if (!status) {
      r.error_class = "UnknownStatus";
      return r;
    }
    r.status = *status;
    if (j.contains("objectives") && j["objectives"].is_array()) {
      for (const auto& v : j["objectives"]) r.objectives.push_back(v.is_number() ? v.get<double>() : NAN);
    }
    if (j.contains("error_class") && j["error_class"].is_string()) r.error_class = j["error_class"].get<std::string>();
    if (j.contains("traceback") && j["traceback"].is_string()) r.message = j["traceback"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    r.status = EvalStatus::ProtocolError;
    r.error_class = "MalformedResponse";
    r.message = e.what();
  }
  return r;
}

}  // namespace heurevo
