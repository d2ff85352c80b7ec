#pragma once

// Child process with line-oriented pipes on stdin/stdout. POSIX only.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mt/error.hpp"

namespace mt {

class Subprocess {
 public:
  using Clock = std::chrono::steady_clock;

  /// Starts argv[0] (searched on PATH). stderr is inherited.
  explicit Subprocess(const std::vector<std::string>& argv) {
    if (argv.empty()) throw Error(ErrorCode::ConfigError, "empty adapter command");
    // Writes to an adapter that already exited must fail with EPIPE rather
    // than kill the harness.
    ::signal(SIGPIPE, SIG_IGN);
    int in[2], out[2];
    if (::pipe2(in, O_CLOEXEC) != 0) throw Error(ErrorCode::Io, "pipe: " + std::string(std::strerror(errno)));
    if (::pipe2(out, O_CLOEXEC) != 0) {
      ::close(in[0]);
      ::close(in[1]);
      throw Error(ErrorCode::Io, "pipe: " + std::string(std::strerror(errno)));
    }
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    pid_ = ::fork();
    if (pid_ < 0) throw Error(ErrorCode::Io, "fork: " + std::string(std::strerror(errno)));
    if (pid_ == 0) {
      ::dup2(in[0], STDIN_FILENO);
      ::dup2(out[1], STDOUT_FILENO);
      ::execvp(args[0], args.data());
      ::_exit(127);
    }
    ::close(in[0]);
    ::close(out[1]);
    stdin_fd_ = in[1];
    stdout_fd_ = out[0];
  }

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  ~Subprocess() {
    close_stdin();
    if (stdout_fd_ >= 0) ::close(stdout_fd_);
    if (pid_ > 0 && !exit_code_) {
      ::kill(pid_, SIGKILL);
      int status = 0;
      ::waitpid(pid_, &status, 0);
    }
  }

  /// False if the child closed its stdin.
  bool write_line(std::string_view line) {
    if (stdin_fd_ < 0) return false;
    std::string buf(line);
    buf += '\n';
    std::size_t done = 0;
    while (done < buf.size()) {
      const ssize_t n = ::write(stdin_fd_, buf.data() + done, buf.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      done += static_cast<std::size_t>(n);
    }
    return true;
  }

  void close_stdin() {
    if (stdin_fd_ >= 0) {
      ::close(stdin_fd_);
      stdin_fd_ = -1;
    }
  }

  enum class ReadStatus { line, eof, timeout };

  /// Reads one line (without the newline) or reports EOF / deadline expiry.
  ReadStatus read_line(std::string& line, Clock::time_point deadline) {
    for (;;) {
      if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
        line = buffer_.substr(0, nl);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        buffer_.erase(0, nl + 1);
        return ReadStatus::line;
      }
      if (eof_) {
        if (buffer_.empty()) return ReadStatus::eof;
        line = std::move(buffer_);
        buffer_.clear();
        return ReadStatus::line;
      }
      const auto now = Clock::now();
      if (now >= deadline) return ReadStatus::timeout;
      const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
      pollfd pfd{stdout_fd_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(ms + 1, 1 << 30)));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::Io, "poll: " + std::string(std::strerror(errno)));
      }
      if (rc == 0) continue;
      char chunk[4096];
      const ssize_t n = ::read(stdout_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw Error(ErrorCode::Io, "read: " + std::string(std::strerror(errno)));
      }
      if (n == 0) eof_ = true;
      else buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  /// Waits for the child to exit; returns its exit code (128+signal if killed).
  int wait() {
    if (exit_code_) return *exit_code_;
    close_stdin();
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
    exit_code_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    return *exit_code_;
  }

  /// wait() with a deadline; kills the child when it expires.
  int wait_for(std::chrono::milliseconds limit) {
    if (exit_code_) return *exit_code_;
    close_stdin();
    const auto deadline = Clock::now() + limit;
    int status = 0;
    for (;;) {
      const pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_) break;
      if (Clock::now() >= deadline) {
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
        break;
      }
      ::usleep(2000);
    }
    exit_code_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    return *exit_code_;
  }

 private:
  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  std::string buffer_;
  bool eof_ = false;
  std::optional<int> exit_code_;
};

}  // namespace mt
