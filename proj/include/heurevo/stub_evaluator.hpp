#pragma once

#include <string>
#include <vector>

#include "heurevo/evaluation.hpp"
#include "heurevo/heuristic.hpp"

namespace heurevo {

/// Scripted results for tests: the first rule whose marker occurs in the
/// code decides the outcome.
class StubEvaluator : public Evaluator {
 public:
  struct Rule {
    std::string marker;
    EvalStatus status = EvalStatus::Ok;
    std::vector<double> objectives;  // one per instance
  };

  StubEvaluator() = default;
  explicit StubEvaluator(std::vector<Rule> rules) : rules_(std::move(rules)) {}

  void add(Rule r) { rules_.push_back(std::move(r)); }

  /// Reads [{"marker": ..., "status": ..., "objectives": [...]}, ...].
  static StubEvaluator from_json(const ordered_json& j) {
    StubEvaluator ev;
    for (const auto& e : j) {
      Rule r;
      r.marker = e.at("marker").get<std::string>();
      const auto st = parse_eval_status(e.value("status", std::string("ok")));
      if (!st) throw ConfigError("stub rule has an unknown status");
      r.status = *st;
      r.objectives = e.value("objectives", std::vector<double>{});
      ev.add(std::move(r));
    }
    return ev;
  }

  EvalResult evaluate(const EvalTask& task) override {
    ++calls_;
    const std::size_t n = task.instances ? task.instances->size() : 0;
    for (const auto& rule : rules_) {
      if (task.code.find(rule.marker) == std::string::npos) continue;
      EvalResult r;
      r.status = rule.status;
      r.objectives = rule.objectives;
      if (r.status != EvalStatus::Ok) r.error_class = "Scripted";
      return finalize(std::move(r), task.problem, n);
    }
    EvalResult r;
    r.status = EvalStatus::RuntimeError;
    r.error_class = "Unscripted";
    r.message = "no stub rule matches this code";
    return r;
  }

  std::size_t calls() const { return calls_; }

 private:
  std::vector<Rule> rules_;
  std::size_t calls_ = 0;
};

}  // namespace heurevo
