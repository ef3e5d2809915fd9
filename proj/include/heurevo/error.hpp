#pragma once

#include <stdexcept>
#include <string>

namespace heurevo {

// Invalid user-supplied configuration: bad flags, templates, weights, files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Replay corpus has no entry for a requested (round, slot).
class CorpusExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Journal is unreadable, its hash chain is broken, or it belongs to another config.
class JournalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A broken internal contract (e.g. a feasible reward with no bases).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace heurevo
