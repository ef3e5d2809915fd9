#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "heurevo/bundled.hpp"
#include "heurevo/collapse.hpp"
#include "heurevo/config.hpp"
#include "heurevo/evaluation.hpp"
#include "heurevo/grpo.hpp"
#include "heurevo/journal.hpp"
#include "heurevo/llm_backend.hpp"
#include "heurevo/operators.hpp"
#include "heurevo/pool.hpp"
#include "heurevo/prompts.hpp"
#include "heurevo/response_parser.hpp"
#include "heurevo/reward.hpp"

namespace heurevo {

inline constexpr int kJournalVersion = 1;

/// Seed code from "bundled:<name>" or a file. The idea is the code's leading
/// docstring.
inline std::vector<Heuristic> load_seed_heuristics(const RunConfig& cfg) {
  std::vector<Heuristic> seeds;
  for (std::size_t i = 0; i < cfg.seed_heuristics.size(); ++i) {
    const auto& ref = cfg.seed_heuristics[i];
    std::string code;
    if (ref.starts_with("bundled:")) {
      const auto& b = find_bundled(ref.substr(8));
      if (b.problem != cfg.problem) throw ConfigError("bundled heuristic " + b.name + " is for another problem");
      code = b.code;
    } else {
      std::ifstream in(ref, std::ios::binary);
      if (!in) throw ConfigError("cannot open seed heuristic: " + ref);
      std::ostringstream ss;
      ss << in.rdbuf();
      code = ss.str();
    }
    auto idea = detail::leading_docstring(code);
    if (!idea) throw ConfigError("seed heuristic " + ref + " has no leading docstring describing its idea");
    Heuristic h;
    h.id = "seed-" + std::to_string(i);
    h.idea = *idea;
    h.code = code;
    h.created_round = 0;
    seeds.push_back(std::move(h));
  }
  return seeds;
}

inline InstanceSet training_set(const RunConfig& cfg) {
  if (!cfg.instances_file.empty()) {
    auto set = load_instance_file(cfg.instances_file);
    if (set.kind != cfg.problem) throw ConfigError("instance file is for another problem");
    return set;
  }
  auto p = cfg.train;
  p.kind = cfg.problem;
  return generate_instances(p);
}

struct RunResult {
  Heuristic best;
  int last_round = 0;
  std::size_t collapses = 0;
};

/// Outcome of one response within a round.
struct SlotOutcome {
  std::string text;
  ParseResult parsed;
  std::optional<EvalResult> eval;
  Diagnosis diagnosis = Diagnosis::MissingIdea;
  RewardOutcome reward;
  double advantage = 0.0;
  std::optional<Heuristic> heuristic;
  std::optional<std::string> component;
};

/// The search loop. The pool, collapse state, component log and random
/// stream are owned here and only touched from the calling thread.
class Engine {
 public:
  Engine(RunConfig cfg, Backend& backend, Evaluator& evaluator, InstanceSet train,
         PromptTemplates templates = default_templates())
      : cfg_(std::move(cfg)),
        backend_(backend),
        evaluator_(evaluator),
        train_(std::move(train)),
        templates_(std::move(templates)),
        meta_(problem_meta(cfg_.problem)),
        pool_(cfg_.population_size),
        collapse_{-1, cfg_.delta0, cfg_.collapse_cap},
        rng_(cfg_.seed) {
    validate(cfg_);
    validate(templates_);
    if (train_.kind != cfg_.problem || train_.size() == 0) throw ConfigError("training set is empty or mismatched");
    out_ = cfg_.output_dir;
  }

  std::filesystem::path journal_path() const { return out_ / "journal.jsonl"; }
  std::filesystem::path batch_path() const { return out_ / "batch.jsonl"; }
  std::filesystem::path pool_path() const { return out_ / "pool.jsonl"; }
  std::filesystem::path best_path() const { return out_ / "best.py"; }

  /// Fresh run. Refuses to clobber an existing journal unless overwrite.
  RunResult run(bool overwrite = false) {
    std::filesystem::create_directories(out_);
    if (std::filesystem::exists(journal_path()) && std::filesystem::file_size(journal_path()) > 0 && !overwrite) {
      throw ConfigError("journal already exists in " + out_.string() + "; resume it or choose another output_dir");
    }
    std::filesystem::remove(journal_path());
    std::filesystem::remove(batch_path());
    journal_ = JournalWriter(journal_path(), "");

    ordered_json header;
    header["type"] = "header";
    header["version"] = kJournalVersion;
    header["run_id"] = cfg_.run_id;
    header["config_hash"] = config_hash(cfg_);
    header["config"] = semantic_config(cfg_);
    journal_.append(header);

    for (auto& seed : load_seed_heuristics(cfg_)) {
      const auto r = evaluate(seed.code, cfg_.seed);
      if (!r.ok()) {
        throw std::runtime_error("seed heuristic " + seed.id + " failed to evaluate: " + r.error_class + " " + r.message);
      }
      seed.performance = *r.performance;
      pool_.insert_seed(seed);
      ordered_json rec;
      rec["type"] = "seed";
      rec["heuristic"] = to_json(seed);
      rec["objectives"] = r.objectives;
      journal_.append(rec);
    }
    return loop(1);
  }

  /// Continues the run recorded in output_dir.
  RunResult resume() {
    auto records = read_journal(journal_path());
    if (records.empty() || records.front().value("type", "") != "header") {
      throw JournalError("journal has no header");
    }
    if (records.front().value("config_hash", "") != config_hash(cfg_)) {
      throw JournalError("journal was written with a different configuration");
    }
    std::size_t keep = 1;
    for (std::size_t i = 1; i < records.size(); ++i) {
      const auto type = records[i].value("type", "");
      if (type == "round_end" || (type == "seed" && keep == i)) keep = i + 1;
    }
    const bool truncated = keep < records.size();
    records.resize(keep);

    int last_round = 0;
    for (std::size_t i = 1; i < records.size(); ++i) {
      const auto& r = records[i];
      const auto type = r.value("type", "");
      if (type == "seed") {
        pool_.insert_seed(heuristic_from_json(r.at("heuristic")));
      } else if (type == "insert") {
        pool_.insert(heuristic_from_json(r.at("heuristic")));
      } else if (type == "component") {
        components_.append(r.at("text").get<std::string>());
      } else if (type == "collapse") {
        std::vector<Heuristic> kept;
        for (const auto& id : r.at("kept")) {
          const Heuristic* h = pool_.find(id.get<std::string>());
          if (h == nullptr) throw JournalError("collapse keeps unknown heuristic " + id.get<std::string>());
          kept.push_back(*h);
        }
        pool_.reset(std::move(kept));
        ++collapses_;
      } else if (type == "round_end") {
        last_round = r.at("round").get<int>();
        collapse_.t_c = r.at("t_c").get<std::int64_t>();
        rng_ = Pcg32::from_raw(std::stoull(r.at("rng_state").get<std::string>(), nullptr, 16),
                               std::stoull(r.at("rng_inc").get<std::string>(), nullptr, 16));
      }
    }
    if (truncated) rewrite_journal(journal_path(), records);
    truncate_batch(last_round);
    journal_ = JournalWriter(journal_path(), records.back().at("hash").get<std::string>());
    return loop(last_round + 1);
  }

  const HeuristicPool& pool() const { return pool_; }
  const CollapseState& collapse_state() const { return collapse_; }
  const ComponentLog& components() const { return components_; }
  const std::vector<SlotOutcome>& last_round_outcomes() const { return last_outcomes_; }

 private:
  EvalResult evaluate(const std::string& code, std::uint64_t seed) {
    EvalTask task;
    task.code = code;
    task.problem = cfg_.problem;
    task.signature = {meta_.function_name, meta_.arity};
    task.instances = &train_;
    task.solver = cfg_.solver_params();
    task.seed = seed;
    task.budget_seconds = cfg_.budget_seconds;
    try {
      return evaluator_.evaluate(task);
    } catch (const InternalError&) {
      throw;
    } catch (const std::exception& e) {
      EvalResult r;
      r.status = EvalStatus::RuntimeError;
      r.error_class = "EvaluatorError";
      r.message = e.what();
      return r;
    }
  }

  void truncate_batch(int last_round) {
    if (!std::filesystem::exists(batch_path())) return;
    std::vector<std::string> kept;
    {
      std::ifstream in(batch_path(), std::ios::binary);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded()) break;
        if (j.value("round", 0) <= last_round) kept.push_back(line);
      }
    }
    std::ofstream out(batch_path(), std::ios::trunc | std::ios::binary);
    for (const auto& l : kept) out << l << '\n';
  }

  RunResult loop(int first_round) {
    for (int round = first_round; round <= cfg_.rounds; ++round) step(round);
    write_outputs();
    if (pool_.best() == nullptr) throw std::runtime_error("search finished without any feasible heuristic");
    return {*pool_.best(), std::max(cfg_.rounds, first_round - 1), collapses_};
  }

  void step(int round) {
    const OperatorKind op = draw_operator(cfg_.weights, pool_.size(), cfg_.population_size, rng_);
    auto bases = select_bases(op, pool_, rng_);
    const PromptBundle prompt = build_prompt(op, bases, components_, meta_, templates_, rng_, round);

    ordered_json start;
    start["type"] = "round_start";
    start["round"] = round;
    start["operator"] = std::string(to_string(op));
    start["bases"] = ordered_json::array();
    for (const auto& b : prompt.bases) start["bases"].push_back(b.id);
    start["instruction"] = prompt.replacement_instruction ? ordered_json(*prompt.replacement_instruction)
                                                          : ordered_json(nullptr);
    start["prompt_hash"] = sha256_hex(prompt.system_text + "\n" + prompt.user_text);
    start["pool_size"] = pool_.size();
    journal_.append(start);

    auto texts = backend_.sample(prompt, cfg_.group_size);
    if (texts.size() != cfg_.group_size) throw std::runtime_error("backend returned the wrong number of responses");

    std::vector<double> base_scores;
    std::vector<std::string> parent_ids;
    for (const auto& b : prompt.bases) {
      base_scores.push_back(b.performance);
      parent_ids.push_back(b.id);
    }
    const SignatureSpec sig{meta_.function_name, meta_.arity};

    std::vector<SlotOutcome> outcomes(texts.size());
    std::vector<double> rewards;
    for (std::size_t slot = 0; slot < texts.size(); ++slot) {
      auto& o = outcomes[slot];
      o.text = std::move(texts[slot]);
      o.parsed = parse_heuristic(o.text, sig);
      if (!static_diagnosis(o.parsed, cfg_.randomness_denylist)) o.eval = evaluate(*o.parsed.code, cfg_.seed);
      o.diagnosis = diagnose_response(o.parsed, o.eval ? &*o.eval : nullptr, cfg_.randomness_denylist);
      const std::optional<double> g = (o.diagnosis == Diagnosis::Feasible) ? o.eval->performance : std::nullopt;
      o.reward = score_response(o.diagnosis, op, g, base_scores);
      rewards.push_back(o.reward.reward);
      if (o.diagnosis == Diagnosis::Feasible) {
        Heuristic h;
        h.id = "r" + std::to_string(round) + "-s" + std::to_string(slot);
        h.idea = *o.parsed.idea;
        h.code = *o.parsed.code;
        h.performance = *g;
        h.origin = {op, parent_ids};
        h.created_round = round;
        o.heuristic = std::move(h);
        if (op == OperatorKind::Injection) o.component = parse_component(o.text);
      }
    }
    const auto adv = group_advantages(rewards, cfg_.advantage_std);
    std::vector<BatchRecord> batch;
    for (std::size_t slot = 0; slot < outcomes.size(); ++slot) {
      outcomes[slot].advantage = adv[slot];
      batch.push_back({prompt.messages(), outcomes[slot].text, rewards[slot], adv[slot], round, op, cfg_.run_id});
    }
    export_training_batch(batch, batch_path());

    for (std::size_t slot = 0; slot < outcomes.size(); ++slot) {
      const auto& o = outcomes[slot];
      ordered_json rec;
      rec["type"] = "response";
      rec["round"] = round;
      rec["slot"] = slot;
      rec["diagnosis"] = std::string(to_string(o.diagnosis));
      rec["branch"] = std::string(to_string(o.reward.branch));
      rec["reward"] = o.reward.reward;
      rec["advantage"] = o.advantage;
      rec["heuristic_id"] = o.heuristic ? ordered_json(o.heuristic->id) : ordered_json(nullptr);
      rec["performance"] = o.heuristic ? ordered_json(o.heuristic->performance) : ordered_json(nullptr);
      rec["eval_status"] = o.eval ? ordered_json(std::string(to_string(o.eval->status))) : ordered_json(nullptr);
      rec["error_class"] = (o.eval && !o.eval->ok()) ? ordered_json(o.eval->error_class) : ordered_json(nullptr);
      rec["objectives"] = o.eval ? ordered_json(o.eval->objectives) : ordered_json(nullptr);
      journal_.append(rec);
    }

    bool new_best = false;
    for (std::size_t slot = 0; slot < outcomes.size(); ++slot) {
      auto& o = outcomes[slot];
      if (!o.heuristic) continue;
      const bool improved = pool_.insert(*o.heuristic);
      new_best = new_best || improved;
      ordered_json rec;
      rec["type"] = "insert";
      rec["round"] = round;
      rec["heuristic"] = to_json(*o.heuristic);
      rec["new_global_best"] = improved;
      journal_.append(rec);
      if (o.component) {
        components_.append(*o.component);
        ordered_json c;
        c["type"] = "component";
        c["round"] = round;
        c["slot"] = slot;
        c["text"] = *o.component;
        journal_.append(c);
      }
    }

    observe_round(collapse_, new_best, pool_.full());
    if (should_collapse(collapse_, rng_)) {
      const std::int64_t stagnation = collapse_.t_c;
      const auto kept = perform_collapse(pool_, collapse_);
      ++collapses_;
      ordered_json rec;
      rec["type"] = "collapse";
      rec["round"] = round;
      rec["stagnation"] = stagnation;
      rec["kept"] = kept;
      journal_.append(rec);
    }

    ordered_json end;
    end["type"] = "round_end";
    end["round"] = round;
    end["t_c"] = collapse_.t_c;
    end["new_global_best"] = new_best;
    end["pool_size"] = pool_.size();
    end["best_id"] = pool_.best() ? ordered_json(pool_.best()->id) : ordered_json(nullptr);
    end["best_performance"] = pool_.best() ? ordered_json(pool_.best()->performance) : ordered_json(nullptr);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng_.state()));
    end["rng_state"] = std::string(buf);
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng_.increment()));
    end["rng_inc"] = std::string(buf);
    journal_.append(end);

    last_outcomes_ = std::move(outcomes);
  }

  void write_outputs() {
    {
      std::ofstream out(pool_path(), std::ios::trunc | std::ios::binary);
      pool_.write_snapshot(out);
    }
    if (const Heuristic* b = pool_.best()) {
      std::ofstream out(best_path(), std::ios::trunc | std::ios::binary);
      out << b->code;
    }
  }

  RunConfig cfg_;
  Backend& backend_;
  Evaluator& evaluator_;
  InstanceSet train_;
  PromptTemplates templates_;
  ProblemMeta meta_;
  HeuristicPool pool_;
  CollapseState collapse_;
  ComponentLog components_;
  Pcg32 rng_;
  JournalWriter journal_;
  std::filesystem::path out_;
  std::size_t collapses_ = 0;
  std::vector<SlotOutcome> last_outcomes_;
};

}  // namespace heurevo
