#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>

#include "heurevo/heuristic.hpp"

namespace heurevo::testing {

inline Heuristic make_h(std::string id, double perf, std::string idea = "plain idea") {
  Heuristic h;
  h.id = std::move(id);
  h.idea = std::move(idea);
  h.code = "def step(item_size, remaining_capacity):\n    return remaining_capacity\n";
  h.performance = perf;
  return h;
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("heurevo-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

}  // namespace heurevo::testing
