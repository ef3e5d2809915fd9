#pragma once

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "heurevo/error.hpp"
#include "heurevo/heuristic.hpp"
#include "heurevo/prompts.hpp"

namespace heurevo {

enum class BackendKind { Http, Replay, Scripted };

inline std::string_view to_string(BackendKind k) {
  switch (k) {
    case BackendKind::Http: return "http";
    case BackendKind::Replay: return "replay";
    case BackendKind::Scripted: return "scripted";
  }
  return "?";
}

inline BackendKind parse_backend(std::string_view s) {
  if (s == "http") return BackendKind::Http;
  if (s == "replay") return BackendKind::Replay;
  if (s == "scripted" || s == "scripted-mock") return BackendKind::Scripted;
  throw ConfigError("unknown backend: " + std::string(s));
}

struct BackendConfig {
  BackendKind kind = BackendKind::Replay;
  std::string endpoint = "http://127.0.0.1:8000/v1";
  std::string model = "default";
  std::string corpus;  // replay
  double temperature = 1.0;
  int max_tokens = 2048;
  double timeout_seconds = 120.0;
  int retries = 2;
  bool parallel = true;
};

/// Produces G candidate responses for a prompt, in slot order.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::vector<std::string> sample(const PromptBundle& prompt, std::size_t group_size) = 0;
};

/// Pre-recorded responses keyed by (round, slot); slots are 0-based.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(std::map<std::pair<int, std::size_t>, std::string> entries)
      : entries_(std::move(entries)) {}

  /// Reads {round, slot, text} records, one per line.
  static ReplayBackend from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open replay corpus: " + path);
    std::map<std::pair<int, std::size_t>, std::string> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        const auto j = ordered_json::parse(line);
        const auto key = std::make_pair(j.at("round").get<int>(), j.at("slot").get<std::size_t>());
        if (!entries.emplace(key, j.at("text").get<std::string>()).second) {
          throw ConfigError("replay corpus " + path + ":" + std::to_string(lineno) + ": duplicate (round, slot)");
        }
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("replay corpus " + path + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    return ReplayBackend(std::move(entries));
  }

  std::vector<std::string> sample(const PromptBundle& prompt, std::size_t group_size) override {
    std::vector<std::string> out;
    out.reserve(group_size);
    for (std::size_t slot = 0; slot < group_size; ++slot) {
      const auto it = entries_.find({prompt.round, slot});
      if (it == entries_.end()) {
        throw CorpusExhausted("replay corpus has no entry for round " + std::to_string(prompt.round) + ", slot " +
                              std::to_string(slot));
      }
      out.push_back(it->second);
    }
    return out;
  }

  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::pair<int, std::size_t>, std::string> entries_;
};

/// Canned responses for tests: either a function of (prompt, slot) or a
/// fixed list handed out in order and cycled.
class ScriptedBackend : public Backend {
 public:
  using Fn = std::function<std::string(const PromptBundle&, std::size_t slot)>;

  explicit ScriptedBackend(Fn fn) : script_(std::move(fn)) {}
  explicit ScriptedBackend(std::vector<std::string> texts) : script_(std::move(texts)) {
    if (std::get<1>(script_).empty()) throw ConfigError("scripted backend needs at least one text");
  }

  std::vector<std::string> sample(const PromptBundle& prompt, std::size_t group_size) override {
    std::vector<std::string> out;
    for (std::size_t slot = 0; slot < group_size; ++slot) {
      if (auto* fn = std::get_if<Fn>(&script_)) {
        out.push_back((*fn)(prompt, slot));
      } else {
        const auto& texts = std::get<1>(script_);
        out.push_back(texts[cursor_++ % texts.size()]);
      }
    }
    return out;
  }

 private:
  std::variant<Fn, std::vector<std::string>> script_;
  std::size_t cursor_ = 0;
};

}  // namespace heurevo
