#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "heurevo/collapse.hpp"
#include "heurevo/error.hpp"
#include "heurevo/evaluation.hpp"
#include "heurevo/grpo.hpp"
#include "heurevo/heuristic.hpp"
#include "heurevo/journal.hpp"
#include "heurevo/llm_backend.hpp"
#include "heurevo/operators.hpp"
#include "heurevo/problems.hpp"
#include "heurevo/reward.hpp"

namespace heurevo {

enum class EvaluatorKind { Native, Subprocess, Stub };

inline std::string_view to_string(EvaluatorKind k) {
  switch (k) {
    case EvaluatorKind::Native: return "native";
    case EvaluatorKind::Subprocess: return "subprocess";
    case EvaluatorKind::Stub: return "stub";
  }
  return "?";
}

inline EvaluatorKind parse_evaluator(std::string_view s) {
  if (s == "native") return EvaluatorKind::Native;
  if (s == "subprocess") return EvaluatorKind::Subprocess;
  if (s == "stub") return EvaluatorKind::Stub;
  throw ConfigError("unknown evaluator: " + std::string(s));
}

struct RunConfig {
  std::string run_id = "run";
  ProblemKind problem = ProblemKind::Obp;
  int rounds = 500;
  std::size_t group_size = 4;
  std::size_t population_size = 10;
  OperatorWeights weights;
  double delta0 = 0.0005;
  std::optional<std::int64_t> collapse_cap = 25;
  double budget_seconds = 60.0;
  BackendConfig backend;
  std::uint64_t seed = 0;
  std::vector<std::string> seed_heuristics;  // "bundled:<name>" or a file path
  std::string instances_file;                // empty: generate from `train`
  GenerationParams train;
  std::optional<SolverParams> solver;  // default depends on the problem
  std::string output_dir = "out";
  std::string templates_dir;  // empty: built-in templates
  std::vector<std::string> randomness_denylist = default_randomness_denylist();
  StdKind advantage_std = StdKind::Population;
  EvaluatorKind evaluator = EvaluatorKind::Native;
  std::string worker_cmd;
  std::string stub_rules;  // JSON file for the stub evaluator

  SolverParams solver_params() const { return solver.value_or(default_solver_params(problem)); }
};

inline void validate(const RunConfig& c) {
  if (c.rounds < 1) throw ConfigError("rounds must be at least 1");
  if (c.group_size < 1) throw ConfigError("group_size must be at least 1");
  if (c.population_size < 1) throw ConfigError("population_size must be at least 1");
  if (!(c.budget_seconds > 0.0)) throw ConfigError("budget_seconds must be positive");
  if (c.run_id.empty()) throw ConfigError("run_id must not be empty");
  validate(c.weights);
  validate(CollapseState{-1, c.delta0, c.collapse_cap});
  if (c.train.kind != c.problem) throw ConfigError("training set problem differs from the run problem");
  if (c.backend.kind == BackendKind::Replay && c.backend.corpus.empty()) {
    throw ConfigError("replay backend needs a corpus file");
  }
  if (c.evaluator == EvaluatorKind::Subprocess && c.worker_cmd.empty()) {
    throw ConfigError("subprocess evaluator needs worker_cmd");
  }
  if (c.evaluator == EvaluatorKind::Stub && c.stub_rules.empty()) {
    throw ConfigError("stub evaluator needs stub_rules");
  }
  if (c.backend.retries < 0) throw ConfigError("retries must be non-negative");
  if (!(c.backend.timeout_seconds > 0.0)) throw ConfigError("request timeout must be positive");
}

inline ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["run_id"] = c.run_id;
  j["problem"] = std::string(to_string(c.problem));
  j["rounds"] = c.rounds;
  j["group_size"] = c.group_size;
  j["population_size"] = c.population_size;
  j["weights"] = {{"simplification", c.weights.simplification},
                  {"injection", c.weights.injection},
                  {"replacement", c.weights.replacement},
                  {"crossover", c.weights.crossover}};
  j["delta0"] = c.delta0;
  j["collapse_cap"] = c.collapse_cap ? ordered_json(*c.collapse_cap) : ordered_json(nullptr);
  j["budget_seconds"] = c.budget_seconds;
  j["backend"] = {{"kind", std::string(to_string(c.backend.kind))},
                  {"endpoint", c.backend.endpoint},
                  {"model", c.backend.model},
                  {"corpus", c.backend.corpus},
                  {"temperature", c.backend.temperature},
                  {"max_tokens", c.backend.max_tokens},
                  {"timeout_seconds", c.backend.timeout_seconds},
                  {"retries", c.backend.retries},
                  {"parallel", c.backend.parallel}};
  j["seed"] = c.seed;
  j["seed_heuristics"] = c.seed_heuristics;
  j["instances_file"] = c.instances_file;
  j["train"] = {{"count", c.train.count},
                {"size", c.train.size},
                {"capacity", c.train.capacity},
                {"seed", c.train.seed},
                {"weibull_shape", c.train.obp.shape},
                {"weibull_scale", c.train.obp.scale}};
  const auto sp = c.solver_params();
  j["solver"] = {{"ants", sp.ants}, {"iterations", sp.iterations}};
  j["output_dir"] = c.output_dir;
  j["templates_dir"] = c.templates_dir;
  j["randomness_denylist"] = c.randomness_denylist;
  j["advantage_std"] = c.advantage_std == StdKind::Population ? "population" : "sample";
  j["evaluator"] = std::string(to_string(c.evaluator));
  j["worker_cmd"] = c.worker_cmd;
  j["stub_rules"] = c.stub_rules;
  return j;
}

/// Reads a config tree; absent keys keep their defaults, unknown keys are
/// rejected.
inline RunConfig config_from_json(const ordered_json& j) {
  static const std::vector<std::string> known = {
      "run_id", "problem", "rounds", "group_size", "population_size", "weights", "delta0", "collapse_cap",
      "budget_seconds", "backend", "seed", "seed_heuristics", "instances_file", "train", "solver", "output_dir",
      "templates_dir", "randomness_denylist", "advantage_std", "evaluator", "worker_cmd", "stub_rules"};
  if (!j.is_object()) throw ConfigError("config must be an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown config key: " + k);
  }
  RunConfig c;
  try {
    c.run_id = j.value("run_id", c.run_id);
    if (j.contains("problem")) c.problem = parse_problem(j["problem"].get<std::string>());
    c.train.kind = c.problem;
    c.rounds = j.value("rounds", c.rounds);
    c.group_size = j.value("group_size", c.group_size);
    c.population_size = j.value("population_size", c.population_size);
    if (j.contains("weights")) {
      const auto& w = j["weights"];
      c.weights.simplification = w.value("simplification", c.weights.simplification);
      c.weights.injection = w.value("injection", c.weights.injection);
      c.weights.replacement = w.value("replacement", c.weights.replacement);
      c.weights.crossover = w.value("crossover", c.weights.crossover);
    }
    c.delta0 = j.value("delta0", c.delta0);
    if (j.contains("collapse_cap")) {
      c.collapse_cap = j["collapse_cap"].is_null() ? std::nullopt
                                                   : std::optional<std::int64_t>(j["collapse_cap"].get<std::int64_t>());
    }
    c.budget_seconds = j.value("budget_seconds", c.budget_seconds);
    if (j.contains("backend")) {
      const auto& b = j["backend"];
      if (b.contains("kind")) c.backend.kind = parse_backend(b["kind"].get<std::string>());
      c.backend.endpoint = b.value("endpoint", c.backend.endpoint);
      c.backend.model = b.value("model", c.backend.model);
      c.backend.corpus = b.value("corpus", c.backend.corpus);
      c.backend.temperature = b.value("temperature", c.backend.temperature);
      c.backend.max_tokens = b.value("max_tokens", c.backend.max_tokens);
      c.backend.timeout_seconds = b.value("timeout_seconds", c.backend.timeout_seconds);
      c.backend.retries = b.value("retries", c.backend.retries);
      c.backend.parallel = b.value("parallel", c.backend.parallel);
    }
    c.seed = j.value("seed", c.seed);
    c.seed_heuristics = j.value("seed_heuristics", c.seed_heuristics);
    c.instances_file = j.value("instances_file", c.instances_file);
    if (j.contains("train")) {
      const auto& t = j["train"];
      c.train.count = t.value("count", c.train.count);
      c.train.size = t.value("size", c.train.size);
      c.train.capacity = t.value("capacity", c.train.capacity);
      c.train.seed = t.value("seed", c.train.seed);
      c.train.obp.shape = t.value("weibull_shape", c.train.obp.shape);
      c.train.obp.scale = t.value("weibull_scale", c.train.obp.scale);
    }
    if (j.contains("solver")) {
      const auto d = default_solver_params(c.problem);
      c.solver = SolverParams{j["solver"].value("ants", d.ants), j["solver"].value("iterations", d.iterations)};
    }
    c.output_dir = j.value("output_dir", c.output_dir);
    c.templates_dir = j.value("templates_dir", c.templates_dir);
    c.randomness_denylist = j.value("randomness_denylist", c.randomness_denylist);
    if (j.contains("advantage_std")) {
      const auto s = j["advantage_std"].get<std::string>();
      if (s == "population") c.advantage_std = StdKind::Population;
      else if (s == "sample") c.advantage_std = StdKind::Sample;
      else throw ConfigError("advantage_std must be population or sample");
    }
    if (j.contains("evaluator")) c.evaluator = parse_evaluator(j["evaluator"].get<std::string>());
    c.worker_cmd = j.value("worker_cmd", c.worker_cmd);
    c.stub_rules = j.value("stub_rules", c.stub_rules);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

/// Input files named with relative paths are looked up next to the config
/// file; output_dir stays relative to the working directory.
inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  RunConfig c;
  try {
    c = config_from_json(ordered_json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  const auto base = path.parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  resolve(c.backend.corpus);
  resolve(c.instances_file);
  resolve(c.templates_dir);
  resolve(c.stub_rules);
  for (auto& s : c.seed_heuristics) {
    if (!s.starts_with("bundled:")) resolve(s);
  }
  return c;
}

/// The part of the config that determines search behavior. The round limit
/// and every file location are left out, so a run can be extended or moved
/// and still resume.
inline ordered_json semantic_config(const RunConfig& c) {
  auto j = to_json(c);
  j.erase("rounds");
  j.erase("output_dir");
  j.erase("instances_file");
  j.erase("templates_dir");
  j.erase("worker_cmd");
  j.erase("stub_rules");
  j["backend"].erase("corpus");
  return j;
}

inline std::string config_hash(const RunConfig& c) { return sha256_hex(semantic_config(c).dump()); }

}  // namespace heurevo
