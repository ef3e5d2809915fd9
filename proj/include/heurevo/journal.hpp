#pragma once

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "heurevo/error.hpp"
#include "heurevo/heuristic.hpp"

namespace heurevo {

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 15]);
  }
  return out;
}

// Journal lines are JSON objects. Each carries "hash" = sha256(prev_hash +
// body), where body is the record without "ts" and "hash"; the first record
// chains from the empty string.

inline std::string record_hash(const std::string& prev, ordered_json record) {
  record.erase("ts");
  record.erase("hash");
  return sha256_hex(prev + record.dump());
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class JournalWriter {
 public:
  JournalWriter() = default;

  /// Appends to path, chaining from prev_hash (empty for a new journal).
  JournalWriter(const std::filesystem::path& path, std::string prev_hash)
      : out_(path, std::ios::app | std::ios::binary), prev_(std::move(prev_hash)), path_(path) {
    if (!out_) throw JournalError("cannot open journal for writing: " + path.string());
  }

  void append(ordered_json record) {
    const std::string h = record_hash(prev_, record);
    record["ts"] = utc_timestamp();
    record["hash"] = h;
    out_ << record.dump() << '\n';
    out_.flush();
    if (!out_) throw JournalError("journal write failed: " + path_.string());
    prev_ = h;
  }

  const std::string& last_hash() const { return prev_; }

 private:
  std::ofstream out_;
  std::string prev_;
  std::filesystem::path path_;
};

/// Reads and verifies a journal. Throws JournalError on a broken chain.
inline std::vector<ordered_json> read_journal(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw JournalError("cannot open journal: " + path.string());
  std::vector<ordered_json> records;
  std::string prev;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw JournalError("journal line " + std::to_string(lineno) + " is not valid JSON");
    }
    if (!j.is_object() || !j.contains("hash") || !j["hash"].is_string()) {
      throw JournalError("journal line " + std::to_string(lineno) + " has no hash");
    }
    if (record_hash(prev, j) != j["hash"].get<std::string>()) {
      throw JournalError("journal hash chain broken at line " + std::to_string(lineno));
    }
    prev = j["hash"].get<std::string>();
    records.push_back(std::move(j));
  }
  return records;
}

/// Rewrites a journal with only the given records, verbatim.
inline void rewrite_journal(const std::filesystem::path& path, const std::vector<ordered_json>& records) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    if (!out) throw JournalError("cannot rewrite journal: " + path.string());
    for (const auto& r : records) out << r.dump() << '\n';
    if (!out) throw JournalError("journal rewrite failed: " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Journal lines with "ts" removed, for comparisons across runs.
inline std::vector<std::string> strip_timestamps(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw JournalError("cannot open journal: " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = ordered_json::parse(line);
    j.erase("ts");
    out.push_back(j.dump());
  }
  return out;
}

}  // namespace heurevo
