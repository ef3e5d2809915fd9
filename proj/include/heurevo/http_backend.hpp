#pragma once

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "heurevo/error.hpp"
#include "heurevo/llm_backend.hpp"

namespace heurevo {

/// API key from HEUREVO_API_KEY, falling back to OPENAI_API_KEY.
inline std::optional<std::string> api_key_from_env() {
  for (const char* name : {"HEUREVO_API_KEY", "OPENAI_API_KEY"}) {
    if (const char* v = std::getenv(name); v != nullptr && *v != '\0') return std::string(v);
  }
  return std::nullopt;
}

/// OpenAI-compatible chat completions, one request per slot.
class HttpBackend : public Backend {
 public:
  HttpBackend(BackendConfig cfg, std::string api_key) : cfg_(std::move(cfg)), key_(std::move(api_key)) {
    if (key_.empty()) throw ConfigError("http backend needs an API key (HEUREVO_API_KEY or OPENAI_API_KEY)");
    const auto scheme = cfg_.endpoint.find("://");
    if (scheme == std::string::npos) throw ConfigError("endpoint must start with http:// or https://");
    const auto slash = cfg_.endpoint.find('/', scheme + 3);
    origin_ = cfg_.endpoint.substr(0, slash);
    base_path_ = slash == std::string::npos ? "" : cfg_.endpoint.substr(slash);
    while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  }

  static HttpBackend from_env(BackendConfig cfg) {
    auto key = api_key_from_env();
    if (!key) throw ConfigError("http backend needs an API key (HEUREVO_API_KEY or OPENAI_API_KEY)");
    return HttpBackend(std::move(cfg), *key);
  }

  std::vector<std::string> sample(const PromptBundle& prompt, std::size_t group_size) override {
    const std::string body = request_body(prompt);
    std::vector<std::string> out(group_size);
    if (cfg_.parallel && group_size > 1) {
      std::vector<std::future<std::string>> futures;
      for (std::size_t i = 0; i < group_size; ++i) {
        futures.push_back(std::async(std::launch::async, [this, &body] { return complete_slot(body); }));
      }
      for (std::size_t i = 0; i < group_size; ++i) out[i] = futures[i].get();
    } else {
      for (std::size_t i = 0; i < group_size; ++i) out[i] = complete_slot(body);
    }
    return out;
  }

  /// Requests issued so far, including retries.
  std::size_t attempts() const { return attempts_.load(); }

  std::string request_body(const PromptBundle& prompt) const {
    ordered_json j;
    j["model"] = cfg_.model;
    j["messages"] = prompt.messages();
    j["temperature"] = cfg_.temperature;
    j["max_tokens"] = cfg_.max_tokens;
    return j.dump();
  }

 private:
  /// Up to 1 + retries attempts; a slot that never succeeds comes back empty.
  std::string complete_slot(const std::string& body) {
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
      ++attempts_;
      if (auto text = try_once(body)) return *text;
    }
    return {};
  }

  std::optional<std::string> try_once(const std::string& body) {
    httplib::Client cli(origin_);
    const auto secs = static_cast<time_t>(cfg_.timeout_seconds);
    const auto usecs = static_cast<time_t>((cfg_.timeout_seconds - static_cast<double>(secs)) * 1e6);
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    httplib::Headers headers = {{"Authorization", "Bearer " + key_}};
    auto res = cli.Post(base_path_ + "/chat/completions", headers, body, "application/json");
    if (!res || res->status != 200) return std::nullopt;
    try {
      const auto j = nlohmann::json::parse(res->body);
      const auto& content = j.at("choices").at(0).at("message").at("content");
      if (!content.is_string()) return std::nullopt;
      return content.get<std::string>();
    } catch (const nlohmann::json::exception&) {
      return std::nullopt;
    }
  }

  BackendConfig cfg_;
  std::string key_;
  std::string origin_;
  std::string base_path_;
  std::atomic<std::size_t> attempts_{0};
};

}  // namespace heurevo
