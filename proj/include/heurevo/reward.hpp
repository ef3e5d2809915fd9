#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heurevo/error.hpp"
#include "heurevo/evaluation.hpp"
#include "heurevo/heuristic.hpp"
#include "heurevo/response_parser.hpp"

namespace heurevo {

/// Why a response did or did not yield a usable heuristic, in ladder order.
enum class Diagnosis {
  MissingIdea,
  MissingCodeBlock,
  MalformedFunction,
  RuntimeOrTimeout,
  RandomnessDetected,
  Feasible,
};

inline std::string_view to_string(Diagnosis d) {
  switch (d) {
    case Diagnosis::MissingIdea: return "missing_idea";
    case Diagnosis::MissingCodeBlock: return "missing_code_block";
    case Diagnosis::MalformedFunction: return "malformed_function";
    case Diagnosis::RuntimeOrTimeout: return "runtime_or_timeout";
    case Diagnosis::RandomnessDetected: return "randomness_detected";
    case Diagnosis::Feasible: return "feasible";
  }
  return "?";
}

/// Penalty for randomized heuristics; also the ceiling of every other
/// infeasibility penalty and the scale of the duplicate/degradation branches.
inline constexpr double kRandomnessPenalty = -0.75;

/// Fixed reward of an infeasible diagnosis.
inline double ladder_reward(Diagnosis d) {
  switch (d) {
    case Diagnosis::MissingIdea: return -1.0;
    case Diagnosis::MissingCodeBlock: return -0.95;
    case Diagnosis::MalformedFunction: return -0.9;
    case Diagnosis::RuntimeOrTimeout: return -0.85;
    case Diagnosis::RandomnessDetected: return kRandomnessPenalty;
    case Diagnosis::Feasible: break;
  }
  throw InternalError("ladder_reward called for a feasible response");
}

inline const std::vector<std::string>& default_randomness_denylist() {
  static const std::vector<std::string> list = {"random", "np.random", "numpy.random", "secrets",
                                                "os.urandom", "uuid", "time.time"};
  return list;
}

namespace detail {

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

/// Dotted names (a.b.c) in Python source, skipping comments and strings.
inline std::vector<std::vector<std::string>> dotted_names(std::string_view code) {
  std::vector<std::vector<std::string>> names;
  std::size_t i = 0;
  const std::size_t n = code.size();
  while (i < n) {
    const char c = code[i];
    if (c == '#') {
      while (i < n && code[i] != '\n') ++i;
    } else if (c == '"' || c == '\'') {
      const bool triple = i + 2 < n && code[i + 1] == c && code[i + 2] == c;
      if (triple) {
        const std::string q(3, c);
        const auto end = code.find(q, i + 3);
        i = (end == std::string_view::npos) ? n : end + 3;
      } else {
        ++i;
        while (i < n && code[i] != c && code[i] != '\n') {
          if (code[i] == '\\') ++i;
          ++i;
        }
        ++i;
      }
    } else if (ident_start(c)) {
      std::vector<std::string> parts;
      for (;;) {
        std::string part;
        while (i < n && ident_char(code[i])) part.push_back(code[i++]);
        parts.push_back(std::move(part));
        if (i + 1 < n && code[i] == '.' && ident_start(code[i + 1])) {
          ++i;
          continue;
        }
        break;
      }
      names.push_back(std::move(parts));
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < n && (ident_char(code[i]) || code[i] == '.')) ++i;
    } else {
      ++i;
    }
  }
  return names;
}

inline std::vector<std::string> split_dots(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto dot = s.find('.', start);
    out.emplace_back(s.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return out;
}

}  // namespace detail

/// True iff some denylisted dotted name occurs in the code as a leading run
/// of whole name segments (so "np.random.rand" hits "np.random", while
/// "randomish_score" and "self.random_state" hit nothing).
inline bool detect_randomness(std::string_view code,
                              const std::vector<std::string>& denylist = default_randomness_denylist()) {
  std::vector<std::vector<std::string>> banned;
  banned.reserve(denylist.size());
  for (const auto& d : denylist) banned.push_back(detail::split_dots(d));
  for (const auto& name : detail::dotted_names(code)) {
    for (const auto& b : banned) {
      if (b.size() <= name.size() && std::equal(b.begin(), b.end(), name.begin())) return true;
    }
  }
  return false;
}

/// Checks that need no evaluation: idea, code fence, signature, randomness.
inline std::optional<Diagnosis> static_diagnosis(const ParseResult& parsed,
                                                 const std::vector<std::string>& denylist) {
  if (!parsed.idea || parsed.idea->empty()) return Diagnosis::MissingIdea;
  if (!parsed.code) return Diagnosis::MissingCodeBlock;
  if (!parsed.signature_ok) return Diagnosis::MalformedFunction;
  if (detect_randomness(*parsed.code, denylist)) return Diagnosis::RandomnessDetected;
  return std::nullopt;
}

/// Full ladder. The first failing check wins; eval is only consulted when
/// every static check passed.
inline Diagnosis diagnose_response(const ParseResult& parsed, const EvalResult* eval,
                                   const std::vector<std::string>& denylist = default_randomness_denylist()) {
  if (auto d = static_diagnosis(parsed, denylist)) return *d;
  if (eval == nullptr || !eval->ok()) return Diagnosis::RuntimeOrTimeout;
  return Diagnosis::Feasible;
}

/// Relative gap between two scores, clipped to [0, 1]. A zero denominator
/// gives 1 when the scores differ and 0 when they match.
inline double relative_delta(double g_new, double g_base) {
  const double denom = std::min(std::abs(g_new), std::abs(g_base));
  const double diff = std::abs(g_new - g_base);
  if (denom == 0.0) return diff == 0.0 ? 0.0 : 1.0;
  return std::clamp(diff / denom, 0.0, 1.0);
}

enum class RewardBranch { Infeasible, Initialization, Duplicate, Degradation, Improvement };

inline std::string_view to_string(RewardBranch b) {
  switch (b) {
    case RewardBranch::Infeasible: return "infeasible";
    case RewardBranch::Initialization: return "initialization";
    case RewardBranch::Duplicate: return "duplicate";
    case RewardBranch::Degradation: return "degradation";
    case RewardBranch::Improvement: return "improvement";
  }
  return "?";
}

struct RewardOutcome {
  double reward = 0.0;
  RewardBranch branch = RewardBranch::Infeasible;
  double delta = 0.0;
};

/// Scalar reward of one response given the scores of the prompt's bases.
inline RewardOutcome score_response(Diagnosis diagnosis, OperatorKind op, std::optional<double> g_new,
                                    std::span<const double> base_scores) {
  if (diagnosis != Diagnosis::Feasible) return {ladder_reward(diagnosis), RewardBranch::Infeasible, 0.0};
  if (!g_new) throw InternalError("feasible response without a score");
  if (op == OperatorKind::Initialization) return {0.0, RewardBranch::Initialization, 0.0};
  if (base_scores.empty()) throw InternalError("feasible response to a non-initialization prompt without bases");

  for (double g : base_scores) {
    if (g == *g_new) return {kRandomnessPenalty * 4.0 / 5.0, RewardBranch::Duplicate, 0.0};  // 0.8 r, rounded once
  }
  const double top = *std::max_element(base_scores.begin(), base_scores.end());
  const double delta = relative_delta(*g_new, top);
  if (*g_new < top) return {0.5 * kRandomnessPenalty * delta, RewardBranch::Degradation, delta};
  return {1.0 + delta, RewardBranch::Improvement, delta};
}

inline double assign_reward(Diagnosis diagnosis, OperatorKind op, std::optional<double> g_new,
                            std::span<const Heuristic> bases) {
  std::vector<double> scores;
  scores.reserve(bases.size());
  for (const auto& h : bases) scores.push_back(h.performance);
  return score_response(diagnosis, op, g_new, scores).reward;
}

}  // namespace heurevo
