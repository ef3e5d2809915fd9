#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "heurevo/error.hpp"
#include "heurevo/heuristic.hpp"
#include "heurevo/rng.hpp"

namespace heurevo {

/// Lowercased, deduplicated tokens of an idea, split on every ASCII
/// non-alphanumeric byte. Bytes >= 0x80 are kept inside tokens so UTF-8
/// words stay whole.
inline std::set<std::string> idea_tokens(std::string_view idea) {
  std::set<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.insert(std::move(current));
    current.clear();
  };
  for (char ch : idea) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

/// Share of the candidate's idea tokens that the reference does not contain.
/// A candidate without tokens has no attributable novelty and scores 0.
inline double diversity(const Heuristic& reference, const Heuristic& candidate) {
  const auto cand = idea_tokens(candidate.idea);
  if (cand.empty()) return 0.0;
  const auto ref = idea_tokens(reference.idea);
  std::size_t novel = 0;
  for (const auto& t : cand) {
    if (!ref.contains(t)) ++novel;
  }
  return static_cast<double>(novel) / static_cast<double>(cand.size());
}

/// An entry index together with its sampling probability.
struct Weighted {
  std::size_t index;
  double probability;
};

/// Every feasible heuristic found so far, plus the seed set and the running
/// best. Entries keep insertion order, which doubles as the tie-breaker.
class HeuristicPool {
 public:
  explicit HeuristicPool(std::size_t population_size) : population_size_(population_size) {
    if (population_size_ == 0) throw ConfigError("population size must be positive");
  }

  std::size_t population_size() const { return population_size_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool full() const { return entries_.size() >= population_size_; }
  const std::vector<Heuristic>& entries() const { return entries_; }
  const std::vector<Heuristic>& seeds() const { return seeds_; }

  const Heuristic* best() const { return best_ ? &entries_[*best_] : nullptr; }

  const Heuristic* find(std::string_view id) const {
    for (const auto& h : entries_) {
      if (h.id == id) return &h;
    }
    return nullptr;
  }

  /// Appends h. Returns true iff h strictly beats the previous best.
  bool insert(Heuristic h) {
    if (!std::isfinite(h.performance)) throw InternalError("heuristic " + h.id + " has non-finite performance");
    if (h.idea.empty() || h.code.empty()) throw InternalError("heuristic " + h.id + " lacks idea or code");
    if (ids_.contains(h.id)) throw InternalError("duplicate heuristic id: " + h.id);
    ids_.insert(h.id);
    entries_.push_back(std::move(h));
    const std::size_t idx = entries_.size() - 1;
    if (!best_ || entries_[idx].performance > entries_[*best_].performance) {
      best_ = idx;
      return true;
    }
    return false;
  }

  /// Inserts a seed heuristic and remembers it for collapses.
  bool insert_seed(Heuristic h) {
    seeds_.push_back(h);
    return insert(std::move(h));
  }

  /// Replaces all entries (used by collapse and journal replay). The best is
  /// recomputed with ties going to the earliest entry.
  void reset(std::vector<Heuristic> entries) {
    entries_.clear();
    ids_.clear();
    best_.reset();
    for (auto& h : entries) insert(std::move(h));
  }

  /// Registers the seed set without inserting (journal replay).
  void set_seeds(std::vector<Heuristic> seeds) { seeds_ = std::move(seeds); }

  /// Entry indices by descending performance; ties keep insertion order.
  std::vector<std::size_t> performance_order() const {
    std::vector<std::size_t> order(entries_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return entries_[a].performance > entries_[b].performance;
    });
    return order;
  }

  /// Top-L_p entries with P proportional to 1/rank; everything else has P = 0.
  std::vector<Weighted> rank_distribution() const {
    auto order = performance_order();
    order.resize(std::min(order.size(), population_size_));
    return inverse_rank(order);
  }

  /// Every entry except the reference, ranked by descending diversity against
  /// it (ties: higher performance, then earlier insertion), P proportional to
  /// 1/rank.
  std::vector<Weighted> diversity_distribution(const Heuristic& reference) const {
    std::vector<std::size_t> order;
    std::vector<double> div(entries_.size(), 0.0);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].id == reference.id) continue;
      div[i] = diversity(reference, entries_[i]);
      order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (div[a] != div[b]) return div[a] > div[b];
      return entries_[a].performance > entries_[b].performance;
    });
    return inverse_rank(order);
  }

  const Heuristic& rank_sample(Pcg32& rng) const {
    if (entries_.empty()) throw InternalError("rank_sample on an empty pool");
    return draw(rank_distribution(), rng);
  }

  const Heuristic& diversity_rank_sample(const Heuristic& reference, Pcg32& rng) const {
    auto dist = diversity_distribution(reference);
    if (dist.empty()) throw InternalError("diversity_rank_sample needs another entry");
    return draw(dist, rng);
  }

  /// Line-delimited snapshot, one heuristic per line.
  void write_snapshot(std::ostream& out) const {
    for (const auto& h : entries_) out << to_json(h).dump() << '\n';
  }

  static std::vector<Heuristic> read_snapshot(std::istream& in) {
    std::vector<Heuristic> out;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      out.push_back(heuristic_from_json(ordered_json::parse(line)));
    }
    return out;
  }

 private:
  static std::vector<Weighted> inverse_rank(const std::vector<std::size_t>& order) {
    double total = 0.0;
    for (std::size_t r = 1; r <= order.size(); ++r) total += 1.0 / static_cast<double>(r);
    std::vector<Weighted> dist;
    dist.reserve(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
      dist.push_back({order[r], (1.0 / static_cast<double>(r + 1)) / total});
    }
    return dist;
  }

  const Heuristic& draw(const std::vector<Weighted>& dist, Pcg32& rng) const {
    std::vector<double> weights;
    weights.reserve(dist.size());
    for (const auto& w : dist) weights.push_back(w.probability);
    return entries_[dist[sample_index(weights, rng)].index];
  }

  std::size_t population_size_;
  std::vector<Heuristic> entries_;
  std::vector<Heuristic> seeds_;
  std::unordered_set<std::string> ids_;
  std::optional<std::size_t> best_;
};

}  // namespace heurevo
