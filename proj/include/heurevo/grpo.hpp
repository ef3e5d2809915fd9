#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "heurevo/error.hpp"
#include "heurevo/heuristic.hpp"

namespace heurevo {

enum class StdKind { Population, Sample };

/// (r_i - mean) / std. A group with zero spread gets all-zero advantages.
inline std::vector<double> group_advantages(std::span<const double> rewards, StdKind kind = StdKind::Population) {
  const std::size_t n = rewards.size();
  std::vector<double> adv(n, 0.0);
  if (n == 0) return adv;
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double r : rewards) ss += (r - mean) * (r - mean);
  const double dof = (kind == StdKind::Sample) ? static_cast<double>(n) - 1.0 : static_cast<double>(n);
  if (dof <= 0.0 || ss == 0.0) return adv;
  const double sd = std::sqrt(ss / dof);
  if (!(sd > 0.0)) return adv;
  for (std::size_t i = 0; i < n; ++i) adv[i] = (rewards[i] - mean) / sd;
  return adv;
}

/// u - log u - 1 with u = pi_ref / pi_theta, written with expm1 so small
/// differences do not cancel.
inline double kl_estimate(double logp_ref, double logp_theta) {
  const double d = logp_ref - logp_theta;
  return std::max(0.0, std::expm1(d) - d);
}

inline double clipped_token_objective(double ratio, double advantage, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * advantage, clipped * advantage);
}

struct TokenLogProbs {
  std::vector<double> theta;
  std::vector<double> old;
  std::vector<double> ref;
};

struct GrpoGroupEntry {
  TokenLogProbs logprobs;
  double reward = 0.0;
  double advantage = 0.0;
};

struct GrpoBatch {
  std::string prompt;
  std::vector<GrpoGroupEntry> responses;
  double eps = 0.2;
  double beta = 0.04;
};

inline double grpo_objective(const GrpoBatch& batch) {
  if (batch.responses.empty()) throw std::invalid_argument("grpo_objective: empty group");
  double total = 0.0;
  for (const auto& r : batch.responses) {
    const auto& lp = r.logprobs;
    const std::size_t len = lp.theta.size();
    if (len == 0 || lp.old.size() != len || lp.ref.size() != len) {
      throw std::invalid_argument("grpo_objective: log-prob sequences differ in length");
    }
    double seq = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      const double ratio = std::exp(lp.theta[t] - lp.old[t]);
      seq += clipped_token_objective(ratio, r.advantage, batch.eps) - batch.beta * kl_estimate(lp.ref[t], lp.theta[t]);
    }
    total += seq / static_cast<double>(len);
  }
  return total / static_cast<double>(batch.responses.size());
}

/// One exported training sample.
struct BatchRecord {
  ordered_json prompt;  // chat messages
  std::string response;
  double reward = 0.0;
  double advantage = 0.0;
  int round = 0;
  OperatorKind op = OperatorKind::Initialization;
  std::string run_id;
};

inline ordered_json to_json(const BatchRecord& r) {
  ordered_json j;
  j["prompt"] = r.prompt;
  j["response"] = r.response;
  j["reward"] = r.reward;
  j["advantage"] = r.advantage;
  j["round"] = r.round;
  j["operator"] = std::string(to_string(r.op));
  j["run_id"] = r.run_id;
  return j;
}

/// Appends one line per record. An empty group touches nothing.
inline std::size_t export_training_batch(std::span<const BatchRecord> records, const std::filesystem::path& dest) {
  if (records.empty()) return 0;
  std::ofstream out(dest, std::ios::app | std::ios::binary);
  if (!out) throw std::runtime_error("cannot open batch file: " + dest.string());
  for (const auto& r : records) out << to_json(r).dump() << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + dest.string());
  return records.size();
}

}  // namespace heurevo
