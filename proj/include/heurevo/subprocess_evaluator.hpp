#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <string>

#include "heurevo/error.hpp"
#include "heurevo/evaluation.hpp"
#include "heurevo/worker_protocol.hpp"

namespace heurevo {

/// Runs heuristics in a long-lived worker process started with /bin/sh -c.
/// The worker gets a hard deadline of budget + grace seconds per request;
/// past it the whole process group is killed and the next request starts a
/// fresh worker. A worker that dies mid-request is reported as a runtime
/// error and likewise replaced.
class SubprocessEvaluator : public Evaluator {
 public:
  explicit SubprocessEvaluator(std::string command, double grace_seconds = 2.0)
      : command_(std::move(command)), grace_(grace_seconds) {
    if (command_.empty()) throw ConfigError("worker command is empty");
  }
  ~SubprocessEvaluator() override { stop(); }

  SubprocessEvaluator(const SubprocessEvaluator&) = delete;
  SubprocessEvaluator& operator=(const SubprocessEvaluator&) = delete;

  EvalResult evaluate(const EvalTask& task) override {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t id = ++next_id_;
    const std::string line = make_worker_request(task, id).dump() + "\n";
    auto done = [&](EvalResult r) {
      r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return finalize(std::move(r), task.problem, task.instances->size());
    };
    if (pid_ <= 0) spawn();
    if (!send_all(line)) {
      stop();
      spawn();
      if (!send_all(line)) return done(failure(EvalStatus::RuntimeError, "WorkerUnavailable", "cannot write to worker"));
    }
    const auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                           std::chrono::duration<double>(task.budget_seconds + grace_));
    std::string reply;
    switch (read_line(deadline, reply)) {
      case ReadOutcome::Line:
        return done(parse_worker_response(reply, id));
      case ReadOutcome::Timeout:
        stop();
        return done(failure(EvalStatus::Timeout, "Timeout", "worker exceeded the wall-clock budget"));
      case ReadOutcome::Closed:
        break;
    }
    stop();
    return done(failure(EvalStatus::RuntimeError, "WorkerCrashed", "worker exited without answering"));
  }

  pid_t pid() const { return pid_; }
  std::size_t spawns() const { return spawns_; }

 private:
  enum class ReadOutcome { Line, Timeout, Closed };

  static EvalResult failure(EvalStatus s, std::string cls, std::string msg) {
    EvalResult r;
    r.status = s;
    r.error_class = std::move(cls);
    r.message = std::move(msg);
    return r;
  }

  void spawn() {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
      throw std::runtime_error(std::string("socketpair: ") + std::strerror(errno));
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
      ::close(fds[0]);
      ::close(fds[1]);
      throw std::runtime_error(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
      ::setpgid(0, 0);
      ::dup2(fds[1], STDIN_FILENO);
      ::dup2(fds[1], STDOUT_FILENO);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::setpgid(pid, pid);
    ::close(fds[1]);
    fd_ = fds[0];
    pid_ = pid;
    buffer_.clear();
    ++spawns_;
  }

  void stop() {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
    if (pid_ > 0) {
      ::kill(-pid_, SIGKILL);
      ::kill(pid_, SIGKILL);
      int status = 0;
      while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
      }
      pid_ = -1;
    }
    buffer_.clear();
  }

  bool send_all(const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      off += static_cast<std::size_t>(n);
    }
    return true;
  }

  ReadOutcome read_line(std::chrono::steady_clock::time_point deadline, std::string& line) {
    for (;;) {
      if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
        line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return ReadOutcome::Line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return ReadOutcome::Timeout;
      pollfd p{fd_, POLLIN, 0};
      const int rc = ::poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
      if (rc < 0) {
        if (errno == EINTR) continue;
        return ReadOutcome::Closed;
      }
      if (rc == 0) continue;
      char buf[65536];
      const ssize_t n = ::read(fd_, buf, sizeof buf);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return ReadOutcome::Closed;
      buffer_.append(buf, static_cast<std::size_t>(n));
    }
  }

  std::string command_;
  double grace_;
  pid_t pid_ = -1;
  int fd_ = -1;
  std::string buffer_;
  std::uint64_t next_id_ = 0;
  std::size_t spawns_ = 0;
};

}  // namespace heurevo
