#pragma once

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "heurevo/error.hpp"
#include "heurevo/heuristic.hpp"
#include "heurevo/operators.hpp"
#include "heurevo/problems.hpp"
#include "heurevo/rng.hpp"

namespace heurevo {

/// Named slots a template may use.
inline const std::set<std::string>& known_placeholders() {
  static const std::set<std::string> s = {"name", "description", "unit", "idea", "code", "performance",
                                          "components", "signature", "algorithms", "instruction"};
  return s;
}

/// Prompt text per role. "algorithm" renders one base heuristic and is
/// spliced into the operator templates through {algorithms}.
struct PromptTemplates {
  std::string system;
  std::string algorithm;
  std::string components;  // header of the prior-components section
  std::map<OperatorKind, std::string> user;
  std::vector<std::string> replacement_instructions;
};

inline PromptTemplates default_templates() {
  PromptTemplates t;
  t.system =
      "You design heuristics for the {name} problem.\n"
      "{description}\n"
      "A heuristic is judged by its {unit} over a set of training instances; higher is better.\n"
      "Every answer must contain a short description of the heuristic's idea followed by a single "
      "Python code block that defines:\n"
      "{signature}\n"
      "Put the idea in a docstring at the top of the code block or in a paragraph right before it. "
      "The function must be deterministic and must not use random numbers.";
  t.algorithm =
      "Idea: {idea}\n"
      "Code:\n"
      "```python\n"
      "{code}\n"
      "```\n"
      "Score: {performance}";
  t.components = "Components that earlier answers already introduced (do not add any of these again):\n";
  t.user[OperatorKind::Initialization] =
      "Write a first heuristic for this problem from scratch. Use this signature:\n"
      "{signature}";
  t.user[OperatorKind::Injection] =
      "Here is an existing heuristic.\n"
      "{algorithms}\n"
      "{components}"
      "Extend it with one new component that it does not have yet. State the component in a line of "
      "the form \"The new component <short name> has been introduced\", then give the idea and code "
      "of the extended heuristic.";
  t.user[OperatorKind::Replacement] =
      "Here is an existing heuristic.\n"
      "{algorithms}\n"
      "{instruction}\n"
      "Give the idea and code of the rewritten heuristic.";
  t.user[OperatorKind::Crossover] =
      "Here are two existing heuristics.\n"
      "{algorithms}\n"
      "Design a new heuristic that takes inspiration from both of them. Give its idea and code.";
  t.user[OperatorKind::Simplification] =
      "Here is an existing heuristic.\n"
      "{algorithms}\n"
      "Remove whatever does not pay for itself and return a shorter heuristic that scores at least as "
      "well. Give its idea and code.";
  t.replacement_instructions = {
      "Change the numeric constants and tuning parameters of this heuristic to better values.",
      "Find a rule in this heuristic that ignores the data it is given and make it adapt to the "
      "instance at hand.",
      "Find a place where several options receive the same score and make the score tell them apart.",
  };
  return t;
}

namespace detail {

/// Placeholder names in a template, in order of appearance.
inline std::vector<std::string> placeholders_in(std::string_view text) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    std::size_t j = i + 1;
    while (j < text.size() && (std::islower(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
    if (j > i + 1 && j < text.size() && text[j] == '}') {
      out.emplace_back(text.substr(i + 1, j - i - 1));
      i = j;
    }
  }
  return out;
}

/// Single-pass substitution; substituted values are not rescanned.
inline std::string render(std::string_view text, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '{') {
      std::size_t j = i + 1;
      while (j < text.size() && (std::islower(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      if (j > i + 1 && j < text.size() && text[j] == '}') {
        const auto it = values.find(std::string(text.substr(i + 1, j - i - 1)));
        if (it == values.end()) throw ConfigError("template placeholder has no value: " + std::string(text.substr(i, j - i + 1)));
        out += it->second;
        i = j;
        continue;
      }
    }
    out.push_back(text[i]);
  }
  return out;
}

inline std::string format_score(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

/// Rejects unknown placeholders and missing mandatory slots.
inline void validate(const PromptTemplates& t) {
  auto check = [](std::string_view label, std::string_view text) {
    for (const auto& p : detail::placeholders_in(text)) {
      if (!known_placeholders().contains(p)) {
        throw ConfigError("template '" + std::string(label) + "' uses unknown placeholder {" + p + "}");
      }
    }
  };
  auto require = [](std::string_view label, std::string_view text, const std::string& slot) {
    const auto ps = detail::placeholders_in(text);
    if (std::find(ps.begin(), ps.end(), slot) == ps.end()) {
      throw ConfigError("template '" + std::string(label) + "' lacks {" + slot + "}");
    }
  };
  check("system", t.system);
  check("algorithm", t.algorithm);
  check("components", t.components);
  for (const auto& [op, text] : t.user) check(to_string(op), text);
  for (OperatorKind op : kAllOperators) {
    if (!t.user.contains(op)) throw ConfigError("missing template for operator " + std::string(to_string(op)));
  }
  require("algorithm", t.algorithm, "idea");
  require("algorithm", t.algorithm, "code");
  require("algorithm", t.algorithm, "performance");
  require("initialization", t.user.at(OperatorKind::Initialization), "signature");
  for (OperatorKind op : {OperatorKind::Injection, OperatorKind::Replacement, OperatorKind::Crossover,
                          OperatorKind::Simplification}) {
    require(to_string(op), t.user.at(op), "algorithms");
  }
  require("injection", t.user.at(OperatorKind::Injection), "components");
  require("replacement", t.user.at(OperatorKind::Replacement), "instruction");
  if (t.replacement_instructions.size() != 3) throw ConfigError("exactly three replacement instructions are required");
}

/// Overrides defaults with whichever files exist in dir: system.txt,
/// algorithm.txt, components.txt, <operator>.txt, and replacement.json
/// (an array of three instruction strings).
inline PromptTemplates load_templates(const std::filesystem::path& dir) {
  PromptTemplates t = default_templates();
  auto slurp = [&](const std::string& file) -> std::optional<std::string> {
    std::ifstream in(dir / file, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string s = ss.str();
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
  };
  if (!std::filesystem::is_directory(dir)) throw ConfigError("template directory not found: " + dir.string());
  if (auto s = slurp("system.txt")) t.system = *s;
  if (auto s = slurp("algorithm.txt")) t.algorithm = *s;
  if (auto s = slurp("components.txt")) t.components = *s + "\n";
  for (OperatorKind op : kAllOperators) {
    if (auto s = slurp(std::string(to_string(op)) + ".txt")) t.user[op] = *s;
  }
  if (auto s = slurp("replacement.json")) {
    try {
      t.replacement_instructions = ordered_json::parse(*s).get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("replacement.json: ") + e.what());
    }
  }
  validate(t);
  return t;
}

struct PromptBundle {
  OperatorKind op = OperatorKind::Initialization;
  std::vector<Heuristic> bases;
  std::string system_text;
  std::string user_text;
  std::optional<int> replacement_instruction;  // 0, 1 or 2
  int round = 0;

  /// Chat messages in the wire format.
  ordered_json messages() const {
    return ordered_json::array({ordered_json{{"role", "system"}, {"content", system_text}},
                                ordered_json{{"role", "user"}, {"content", user_text}}});
  }
};

/// Renders both messages. rng is only drawn from for Replacement.
inline PromptBundle build_prompt(OperatorKind op, std::vector<Heuristic> bases, const ComponentLog& log,
                                 const ProblemMeta& meta, const PromptTemplates& templates, Pcg32& rng,
                                 int round = 0) {
  if (meta.name.empty() || meta.description.empty() || meta.unit.empty() || meta.signature.empty()) {
    throw ConfigError("problem metadata is incomplete");
  }
  if (bases.size() != base_count(op)) {
    throw InternalError("operator " + std::string(to_string(op)) + " got " + std::to_string(bases.size()) + " bases");
  }
  std::map<std::string, std::string> values = {
      {"name", meta.name}, {"description", meta.description}, {"unit", meta.unit}, {"signature", meta.signature}};

  PromptBundle b;
  b.op = op;
  b.round = round;
  b.system_text = detail::render(templates.system, values);

  std::string algorithms;
  for (std::size_t i = 0; i < bases.size(); ++i) {
    auto v = values;
    v["idea"] = bases[i].idea;
    v["code"] = bases[i].code;
    v["performance"] = detail::format_score(bases[i].performance);
    if (bases.size() > 1) algorithms += "Heuristic " + std::to_string(i + 1) + ":\n";
    algorithms += detail::render(templates.algorithm, v);
    if (i + 1 < bases.size()) algorithms += "\n\n";
  }
  values["algorithms"] = algorithms;

  std::string components;
  const auto recent = log.recent();
  if (!recent.empty()) {
    components = templates.components;
    for (const auto& c : recent) components += "- " + c + "\n";
  }
  values["components"] = components;

  values["instruction"] = "";
  if (op == OperatorKind::Replacement) {
    const auto k = rng.bounded(static_cast<std::uint32_t>(templates.replacement_instructions.size()));
    b.replacement_instruction = static_cast<int>(k);
    values["instruction"] = templates.replacement_instructions[k];
  }
  b.user_text = detail::render(templates.user.at(op), values);
  b.bases = std::move(bases);
  return b;
}

}  // namespace heurevo
