// Command-line front end: run, eval, gen-instances, simulate-collapse,
// grpo-check, report.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <memory>

#include "heurevo/heurevo.hpp"

using namespace heurevo;

namespace {

constexpr int kUsage = 1;
constexpr int kRuntime = 2;

std::unique_ptr<Evaluator> make_evaluator(EvaluatorKind kind, const std::string& worker_cmd,
                                          const std::string& stub_rules, std::unique_ptr<Evaluator>& fallback) {
  switch (kind) {
    case EvaluatorKind::Stub: {
      std::ifstream in(stub_rules);
      if (!in) throw ConfigError("cannot open stub rules: " + stub_rules);
      return std::make_unique<StubEvaluator>(StubEvaluator::from_json(ordered_json::parse(in)));
    }
    case EvaluatorKind::Subprocess:
      return std::make_unique<SubprocessEvaluator>(worker_cmd);
    case EvaluatorKind::Native:
      if (!worker_cmd.empty()) fallback = std::make_unique<SubprocessEvaluator>(worker_cmd);
      return std::make_unique<NativeEvaluator>(fallback.get());
  }
  throw InternalError("unhandled evaluator");
}

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg) {
  switch (cfg.kind) {
    case BackendKind::Replay:
      return std::make_unique<ReplayBackend>(ReplayBackend::from_file(cfg.corpus));
    case BackendKind::Http: {
      auto key = api_key_from_env();
      if (!key) throw ConfigError("http backend needs HEUREVO_API_KEY or OPENAI_API_KEY");
      return std::make_unique<HttpBackend>(cfg, *key);
    }
    case BackendKind::Scripted:
      throw ConfigError("the scripted backend is only available to tests");
  }
  throw InternalError("unhandled backend");
}

std::string code_of(const std::string& ref, ProblemKind problem) {
  if (ref.starts_with("bundled:")) {
    const auto& b = find_bundled(ref.substr(8));
    if (b.problem != problem) throw ConfigError(ref + " is for another problem");
    return b.code;
  }
  std::ifstream in(ref, std::ios::binary);
  if (!in) throw ConfigError("cannot open heuristic file: " + ref);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_row(const std::string& label, const std::vector<double>& v) {
  std::printf("%-24s", label.c_str());
  for (double x : v) std::printf(" %10.4f", x);
  std::printf("\n");
}

// ---- grpo-check -----------------------------------------------------------

int grpo_check() {
  int failures = 0;
  auto check = [&](const char* what, double got, double want, double tol) {
    const bool ok = std::abs(got - want) <= tol;
    std::printf("%-44s %s  got %.6f want %.6f\n", what, ok ? "ok  " : "FAIL", got, want);
    if (!ok) ++failures;
  };
  const std::vector<double> r = {1, 2, 3, 4};
  const auto a = group_advantages(r);
  check("advantage [1,2,3,4] first", a[0], -1.3416407865, 1e-9);
  check("advantage [1,2,3,4] last", a[3], 1.3416407865, 1e-9);
  const auto z = group_advantages(std::vector<double>{0.5, 0.5, 0.5});
  check("advantage of equal rewards", z[0], 0.0, 0.0);
  check("kl at equal log-probs", kl_estimate(-1.0, -1.0), 0.0, 0.0);
  check("kl at difference 0.5", kl_estimate(0.5, 0.0), std::exp(0.5) - 1.5, 1e-12);
  check("kl at difference ln 2", kl_estimate(std::log(2.0), 0.0), 1.0 - std::log(2.0), 1e-12);
  check("clip ratio 1.5, A=1", clipped_token_objective(1.5, 1.0, 0.2), 1.2, 1e-12);
  check("clip ratio 0.5, A=-1", clipped_token_objective(0.5, -1.0, 0.2), -0.8, 1e-12);
  GrpoBatch b;
  b.eps = 0.2;
  b.beta = 0.0;
  b.responses.push_back({{{std::log(1.5), std::log(0.9)}, {0.0, 0.0}, {0.0, 0.0}}, 1.0, 1.0});
  check("objective, two tokens", grpo_objective(b), 1.05, 1e-12);
  std::printf("%s\n", failures == 0 ? "grpo-check passed" : "grpo-check FAILED");
  return failures == 0 ? 0 : kRuntime;
}

// ---- report ---------------------------------------------------------------

int report(const std::string& journal, const std::string& instances) {
  const auto records = read_journal(journal);
  std::map<std::string, int> diagnoses;
  std::map<std::string, std::vector<double>> objectives;  // heuristic id -> per-instance values
  std::vector<std::pair<int, double>> trajectory;
  int rounds = 0, collapses = 0;
  std::string best_id;
  for (const auto& r : records) {
    const auto type = r.value("type", "");
    if (type == "seed") {
      objectives[r["heuristic"]["id"].get<std::string>()] = r["objectives"].get<std::vector<double>>();
    } else if (type == "response") {
      ++diagnoses[r["diagnosis"].get<std::string>()];
      if (!r["heuristic_id"].is_null()) {
        objectives[r["heuristic_id"].get<std::string>()] = r["objectives"].get<std::vector<double>>();
      }
    } else if (type == "collapse") {
      ++collapses;
    } else if (type == "round_end") {
      rounds = r["round"].get<int>();
      if (!r["best_id"].is_null()) {
        best_id = r["best_id"].get<std::string>();
        trajectory.emplace_back(rounds, r["best_performance"].get<double>());
      }
    }
  }
  std::printf("rounds %d, collapses %d\n", rounds, collapses);
  for (const auto& [d, n] : diagnoses) std::printf("  %-22s %d\n", d.c_str(), n);
  double last = -INFINITY;
  std::printf("best-so-far trajectory:\n");
  for (const auto& [round, g] : trajectory) {
    if (g != last) std::printf("  round %4d  g = %.6g\n", round, g);
    last = g;
  }
  if (best_id.empty()) return 0;
  std::printf("best heuristic: %s\n", best_id.c_str());
  if (instances.empty()) return 0;
  const auto set = load_instance_file(instances);
  const auto& obj = objectives[best_id];
  if (set.kind != ProblemKind::Obp) {
    print_row("objective", obj);
    return 0;
  }
  if (obj.size() != set.obp.size()) throw ConfigError("instance file does not match the journal's training set");
  std::printf("%-10s %10s %10s %10s\n", "instance", "bins", "L2", "gap %");
  double total = 0.0;
  for (std::size_t i = 0; i < obj.size(); ++i) {
    const auto lb = static_cast<double>(l2_lower_bound(set.obp[i]));
    const double gap = optimality_gap(obj[i], lb, Direction::Minimize);
    total += gap;
    std::printf("%-10zu %10.0f %10.0f %10.3f\n", i, obj[i], lb, gap);
  }
  std::printf("%-10s %32.3f\n", "mean", total / static_cast<double>(obj.size()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LLM-guided evolutionary heuristic search"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run or resume a search");
  std::string config_file, problem_s, backend_s, evaluator_s, advantage_s;
  std::vector<std::string> seed_refs;
  bool resume = false, overwrite = false;
  int rounds = 0;
  std::size_t group = 0, population = 0;
  double delta0 = 0, budget = 0;
  std::int64_t cap = -2;
  std::uint64_t seed = 0;
  std::string corpus, endpoint, model, instances_file, out_dir, templates_dir, worker_cmd, stub_rules, run_id;
  run->add_option("-c,--config", config_file, "JSON config file");
  run->add_option("--problem", problem_s, "obp, tsp, cvrp or op");
  run->add_option("--rounds", rounds, "maximum rounds T");
  run->add_option("--group-size", group, "responses per prompt G");
  run->add_option("--population-size", population, "population size L_p");
  run->add_option("--delta0", delta0, "collapse hazard slope");
  run->add_option("--cap", cap, "collapse hard cap (0 disables)");
  run->add_option("--budget", budget, "evaluation budget per heuristic, seconds");
  run->add_option("--backend", backend_s, "http or replay");
  run->add_option("--corpus", corpus, "replay corpus file");
  run->add_option("--endpoint", endpoint, "chat completion base URL");
  run->add_option("--model", model, "model name");
  run->add_option("--seed", seed, "random seed");
  run->add_option("--seed-heuristic", seed_refs, "bundled:<name> or a code file (repeatable)");
  run->add_option("--instances", instances_file, "training instance file");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--templates", templates_dir, "prompt template directory");
  run->add_option("--evaluator", evaluator_s, "native, subprocess or stub");
  run->add_option("--worker-cmd", worker_cmd, "shell command starting an evaluation worker");
  run->add_option("--stub-rules", stub_rules, "stub evaluator rules (JSON)");
  run->add_option("--advantage-std", advantage_s, "population or sample");
  run->add_option("--run-id", run_id, "run identifier written to batch records");
  run->add_flag("--resume", resume, "continue the journal in the output directory");
  run->add_flag("--overwrite", overwrite, "replace an existing journal");

  // eval
  auto* eval = app.add_subcommand("eval", "score heuristics on an instance set");
  std::string eval_problem = "obp", eval_instances, eval_worker;
  std::vector<std::string> eval_refs = {"bundled:best_fit"};
  GenerationParams gen;
  double eval_budget = 60.0;
  eval->add_option("--problem", eval_problem, "obp, tsp, cvrp or op");
  eval->add_option("--heuristic", eval_refs, "bundled:<name> or a code file (repeatable)");
  eval->add_option("--instances", eval_instances, "instance file (default: generate)");
  eval->add_option("--count", gen.count, "instances to generate");
  eval->add_option("--size", gen.size, "items or nodes per instance");
  eval->add_option("--capacity", gen.capacity, "bin capacity");
  eval->add_option("--seed", gen.seed, "generation seed");
  eval->add_option("--worker-cmd", eval_worker, "worker for non-bundled code");
  eval->add_option("--budget", eval_budget, "evaluation budget, seconds");

  // gen-instances
  auto* gi = app.add_subcommand("gen-instances", "write a generated instance file");
  std::string gi_problem = "obp", gi_out;
  GenerationParams gi_params;
  std::optional<double> gi_maxlen;
  gi->add_option("--problem", gi_problem, "obp, tsp, cvrp or op");
  gi->add_option("--count", gi_params.count, "number of instances");
  gi->add_option("--size", gi_params.size, "items or nodes per instance");
  gi->add_option("--capacity", gi_params.capacity, "bin capacity (obp)");
  gi->add_option("--seed", gi_params.seed, "seed of the first instance");
  gi->add_option("--weibull-shape", gi_params.obp.shape, "item size shape (obp)");
  gi->add_option("--weibull-scale", gi_params.obp.scale, "item size scale (obp)");
  gi->add_option("--maxlen", gi_maxlen, "travel budget (op)");
  gi->add_option("-o,--out", gi_out, "output file")->required();

  // simulate-collapse
  auto* sc = app.add_subcommand("simulate-collapse", "Monte Carlo of the stagnation length");
  double sc_delta0 = 0.0005;
  std::size_t sc_trials = 100000;
  std::int64_t sc_cap = 0;
  std::uint64_t sc_seed = 1;
  sc->add_option("--delta0", sc_delta0, "hazard slope");
  sc->add_option("--trials", sc_trials, "number of trajectories");
  sc->add_option("--cap", sc_cap, "hard cap (0: none)");
  sc->add_option("--seed", sc_seed, "random seed");

  // grpo-check
  auto* gc = app.add_subcommand("grpo-check", "self-test of the GRPO numerics");

  // report
  auto* rep = app.add_subcommand("report", "summarize a run journal");
  std::string rep_journal, rep_instances;
  rep->add_option("--journal", rep_journal, "journal file")->required();
  rep->add_option("--instances", rep_instances, "training instances, for gap tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (run->parsed()) {
      RunConfig cfg = config_file.empty() ? RunConfig{} : load_config(config_file);
      if (!problem_s.empty()) {
        cfg.problem = parse_problem(problem_s);
        cfg.train.kind = cfg.problem;
      }
      if (rounds) cfg.rounds = rounds;
      if (group) cfg.group_size = group;
      if (population) cfg.population_size = population;
      if (delta0 > 0) cfg.delta0 = delta0;
      if (cap == 0) cfg.collapse_cap.reset();
      else if (cap > 0) cfg.collapse_cap = cap;
      if (budget > 0) cfg.budget_seconds = budget;
      if (!backend_s.empty()) cfg.backend.kind = parse_backend(backend_s);
      if (!corpus.empty()) cfg.backend.corpus = corpus;
      if (!endpoint.empty()) cfg.backend.endpoint = endpoint;
      if (!model.empty()) cfg.backend.model = model;
      if (run->count("--seed")) cfg.seed = seed;
      if (!seed_refs.empty()) cfg.seed_heuristics = seed_refs;
      if (!instances_file.empty()) cfg.instances_file = instances_file;
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (!templates_dir.empty()) cfg.templates_dir = templates_dir;
      if (!evaluator_s.empty()) cfg.evaluator = parse_evaluator(evaluator_s);
      if (!worker_cmd.empty()) cfg.worker_cmd = worker_cmd;
      if (!stub_rules.empty()) cfg.stub_rules = stub_rules;
      if (!run_id.empty()) cfg.run_id = run_id;
      if (advantage_s == "sample") cfg.advantage_std = StdKind::Sample;
      else if (advantage_s == "population") cfg.advantage_std = StdKind::Population;
      else if (!advantage_s.empty()) throw ConfigError("--advantage-std must be population or sample");
      validate(cfg);

      std::unique_ptr<Evaluator> fallback;
      auto evaluator = make_evaluator(cfg.evaluator, cfg.worker_cmd, cfg.stub_rules, fallback);
      auto backend = make_backend(cfg.backend);
      auto templates = cfg.templates_dir.empty() ? default_templates() : load_templates(cfg.templates_dir);
      Engine engine(cfg, *backend, *evaluator, training_set(cfg), templates);
      const auto result = resume ? engine.resume() : engine.run(overwrite);
      std::printf("best %s  g = %.10g  (rounds %d, collapses %zu)\n", result.best.id.c_str(),
                  result.best.performance, result.last_round, result.collapses);
      std::printf("outputs in %s\n", cfg.output_dir.c_str());
      return 0;
    }

    if (eval->parsed()) {
      gen.kind = parse_problem(eval_problem);
      const auto set = eval_instances.empty() ? generate_instances(gen) : load_instance_file(eval_instances);
      if (set.kind != gen.kind) throw ConfigError("instance file is for another problem");
      std::unique_ptr<Evaluator> fallback;
      auto ev = make_evaluator(EvaluatorKind::Native, eval_worker, "", fallback);
      const auto meta = problem_meta(set.kind);
      for (const auto& ref : eval_refs) {
        EvalTask task;
        task.code = code_of(ref, set.kind);
        task.problem = set.kind;
        task.signature = {meta.function_name, meta.arity};
        task.instances = &set;
        task.solver = default_solver_params(set.kind);
        task.budget_seconds = eval_budget;
        const auto r = ev->evaluate(task);
        if (!r.ok()) {
          std::printf("%s: %s %s %s\n", ref.c_str(), std::string(to_string(r.status)).c_str(), r.error_class.c_str(),
                      r.message.c_str());
          continue;
        }
        std::printf("%s: g = %.6f\n", ref.c_str(), *r.performance);
        print_row("  objective", r.objectives);
        if (set.kind == ProblemKind::Obp) {
          std::vector<double> gaps;
          for (std::size_t i = 0; i < set.obp.size(); ++i) {
            gaps.push_back(optimality_gap(r.objectives[i], static_cast<double>(l2_lower_bound(set.obp[i])),
                                          Direction::Minimize));
          }
          print_row("  gap vs L2 (%)", gaps);
        }
      }
      return 0;
    }

    if (gi->parsed()) {
      gi_params.kind = parse_problem(gi_problem);
      gi_params.routing.op_maxlen = gi_maxlen;
      const auto set = generate_instances(gi_params);
      save_instance_file(set, gi_out);
      std::printf("wrote %zu %s instances to %s\n", set.size(), gi_problem.c_str(), gi_out.c_str());
      return 0;
    }

    if (sc->parsed()) {
      Pcg32 rng(sc_seed);
      const auto cap_opt = sc_cap > 0 ? std::optional<std::int64_t>(sc_cap) : std::nullopt;
      validate(CollapseState{-1, sc_delta0, cap_opt});
      const auto st = simulate_stagnation(sc_delta0, cap_opt, sc_trials, rng);
      std::printf("delta0 %.6g, trials %zu, cap %s\n", sc_delta0, sc_trials,
                  cap_opt ? std::to_string(*cap_opt).c_str() : "none");
      std::printf("empirical mean   %.4f\n", st.mean);
      std::printf("closed form      %.4f\n", expected_stagnation_rounds(sc_delta0));
      if (!cap_opt) std::printf("exact mean       %.4f\n", exact_stagnation_mean(sc_delta0));
      std::printf("longest          %lld\n", static_cast<long long>(st.max_length));
      return 0;
    }

    if (gc->parsed()) return grpo_check();
    if (rep->parsed()) return report(rep_journal, rep_instances);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
  return kUsage;
}
