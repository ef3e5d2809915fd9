#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace heurevo {

/// Name and positional arity the generated function must have.
struct SignatureSpec {
  std::string function_name;
  std::size_t arity = 0;
};

struct ParseResult {
  std::optional<std::string> idea;
  std::optional<std::string> code;
  std::optional<std::string> function_name;  // first top-level def found
  bool signature_ok = false;                 // expected name with compatible arity
  std::string raw;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

/// Content of the first ``` fence (language tag dropped) and the offset where
/// the fence starts. An unterminated fence counts as no block.
inline std::optional<std::pair<std::string, std::size_t>> first_fence(std::string_view text) {
  const auto open = text.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  auto body = text.find('\n', open + 3);
  if (body == std::string_view::npos) return std::nullopt;
  ++body;
  const auto close = text.find("```", body);
  if (close == std::string_view::npos) return std::nullopt;
  return std::make_pair(std::string(text.substr(body, close - body)), open);
}

/// True if every line is blank, a comment, an import or a decorator.
inline bool only_preamble(std::string_view text) {
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    if (!line.empty() && !line.starts_with("#") && !line.starts_with("import ") && !line.starts_with("from ") &&
        !line.starts_with("@")) {
      return false;
    }
    pos = nl + 1;
  }
  return true;
}

/// The code's idea docstring, trimmed: a triple-quoted string that is either
/// the first statement of the module or the first statement of the first
/// function, with only imports, comments and decorators before it.
inline std::optional<std::string> leading_docstring(std::string_view code) {
  std::size_t q = std::string_view::npos;
  std::string_view quote;
  for (std::string_view cand : {std::string_view("\"\"\""), std::string_view("'''")}) {
    const auto at = code.find(cand);
    if (at < q) {
      q = at;
      quote = cand;
    }
  }
  if (q == std::string_view::npos) return std::nullopt;
  const auto prefix = code.substr(0, q);

  std::size_t def = std::string_view::npos;
  for (std::size_t pos = 0; pos < prefix.size();) {
    std::size_t i = pos;
    while (i < prefix.size() && (prefix[i] == ' ' || prefix[i] == '\t')) ++i;
    if (prefix.substr(i, 4) == "def ") {
      def = pos;
      break;
    }
    const auto nl = prefix.find('\n', pos);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (def == std::string_view::npos) {
    if (!only_preamble(prefix)) return std::nullopt;
  } else {
    if (!only_preamble(prefix.substr(0, def))) return std::nullopt;
    const auto header = trim(prefix.substr(def));
    if (header.empty() || header.back() != ':' || header.find("\n\n") != std::string::npos) return std::nullopt;
    // The docstring has to start on its own line after the header.
    const auto colon = prefix.rfind(':');
    if (prefix.substr(colon + 1).find('\n') == std::string_view::npos) return std::nullopt;
  }
  const auto end = code.find(quote, q + 3);
  if (end == std::string_view::npos) return std::nullopt;
  auto doc = trim(code.substr(q + 3, end - q - 3));
  if (doc.empty()) return std::nullopt;
  return doc;
}

struct DefInfo {
  std::string name;
  std::size_t required = 0;   // positional params without defaults
  std::size_t total = 0;      // positional params
  bool var_positional = false;
};

/// Parses the parameter list of a Python def. Returns nullopt when the
/// parentheses do not balance.
inline std::optional<DefInfo> parse_def(std::string_view code, std::size_t def_pos) {
  std::size_t i = def_pos + 4;
  while (i < code.size() && (code[i] == ' ' || code[i] == '\t')) ++i;
  DefInfo info;
  while (i < code.size() && (std::isalnum(static_cast<unsigned char>(code[i])) || code[i] == '_')) {
    info.name.push_back(code[i++]);
  }
  if (info.name.empty()) return std::nullopt;
  while (i < code.size() && (code[i] == ' ' || code[i] == '\t')) ++i;
  if (i >= code.size() || code[i] != '(') return std::nullopt;
  ++i;
  int depth = 0;
  bool keyword_only = false;
  std::string param;
  auto finish_param = [&](std::string p) {
    p = trim(p);
    if (p.empty() || p == "/") return;
    if (p == "*") {
      keyword_only = true;
      return;
    }
    if (p.starts_with("**")) return;
    if (p.starts_with("*")) {
      info.var_positional = true;
      keyword_only = true;
      return;
    }
    if (keyword_only) return;
    ++info.total;
    // A top-level '=' marks a default value.
    int d = 0;
    bool has_default = false;
    for (char ch : p) {
      if (ch == '[' || ch == '(' || ch == '{') ++d;
      else if (ch == ']' || ch == ')' || ch == '}') --d;
      else if (ch == '=' && d == 0) has_default = true;
    }
    if (!has_default) ++info.required;
  };
  for (; i < code.size(); ++i) {
    const char ch = code[i];
    if (ch == '(' || ch == '[' || ch == '{') {
      ++depth;
    } else if (ch == ')' || ch == ']' || ch == '}') {
      if (depth == 0) {
        if (ch != ')') return std::nullopt;
        finish_param(param);
        return info;
      }
      --depth;
    } else if (ch == ',' && depth == 0) {
      finish_param(param);
      param.clear();
      continue;
    }
    param.push_back(ch);
  }
  return std::nullopt;
}

/// Offsets of every top-level (column 0) "def " in the code.
inline std::vector<std::size_t> top_level_defs(std::string_view code) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos < code.size()) {
    if (code.substr(pos, 4) == "def ") out.push_back(pos);
    const auto nl = code.find('\n', pos);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

}  // namespace detail

/// Splits an LLM response into idea and code and checks the function
/// signature. Never throws; missing parts stay empty and are mapped to
/// feasibility diagnoses by the caller.
///
/// The idea is the leading docstring of the code if there is one, otherwise
/// the prose before the first code fence.
inline ParseResult parse_heuristic(std::string_view response, const SignatureSpec& expected) {
  ParseResult r;
  r.raw = std::string(response);
  const auto fence = detail::first_fence(response);
  if (fence) {
    r.code = fence->first;
    if (auto doc = detail::leading_docstring(fence->first)) {
      r.idea = std::move(doc);
    }
  }
  if (!r.idea) {
    const auto prose = detail::trim(fence ? response.substr(0, fence->second) : response);
    // Without a fence the whole response is prose; it only counts as an idea
    // when it is not itself bare code.
    if (!prose.empty() && (fence || detail::top_level_defs(prose).empty())) r.idea = prose;
  }
  if (!r.code) return r;

  const std::string_view code = *r.code;
  std::optional<detail::DefInfo> first;
  for (std::size_t pos : detail::top_level_defs(code)) {
    auto info = detail::parse_def(code, pos);
    if (!info) continue;
    if (!first) first = info;
    if (info->name == expected.function_name) {
      r.function_name = info->name;
      r.signature_ok = info->required <= expected.arity &&
                       (info->var_positional || expected.arity <= info->total);
      return r;
    }
  }
  if (first) r.function_name = first->name;
  return r;
}

}  // namespace heurevo
