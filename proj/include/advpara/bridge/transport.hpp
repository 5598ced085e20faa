#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "advpara/util/error.hpp"

namespace advpara::bridge {

class TransportError : public Error {
 public:
  using Error::Error;
};

/// A line-oriented duplex channel. send() writes one line (the newline is
/// appended); receive() returns the next line without its newline, or
/// nullopt once the peer has closed. Not thread-safe; BridgeClient
/// serializes access.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(std::string_view line) = 0;
  virtual std::optional<std::string> receive() = 0;
};

/// Reads and writes a pair of file descriptors (a child's stdio pipes, or
/// one socket for both directions).
class FdTransport final : public Transport {
 public:
  FdTransport(int read_fd, int write_fd, bool owns);
  ~FdTransport() override;
  FdTransport(const FdTransport&) = delete;
  FdTransport& operator=(const FdTransport&) = delete;

  void send(std::string_view line) override;
  std::optional<std::string> receive() override;

 private:
  int read_fd_;
  int write_fd_;
  bool owns_;
  std::string buffer_;
  bool eof_ = false;
};

/// Spawns `argv` with its stdin/stdout connected to the transport. The
/// child is reaped on destruction after its stdin is closed.
class ProcessTransport final : public Transport {
 public:
  explicit ProcessTransport(const std::vector<std::string>& argv);
  ~ProcessTransport() override;
  ProcessTransport(const ProcessTransport&) = delete;
  ProcessTransport& operator=(const ProcessTransport&) = delete;

  void send(std::string_view line) override;
  std::optional<std::string> receive() override;

 private:
  int pid_ = -1;
  std::unique_ptr<FdTransport> io_;
};

// Connects to a listening Unix-domain stream socket.
std::unique_ptr<Transport> connect_unix_socket(const std::string& path);

/// In-process peer: every sent line is handed to `handler`, whose non-empty
/// reply is queued for receive().
class LoopbackTransport final : public Transport {
 public:
  using Handler = std::function<std::string(std::string_view)>;
  explicit LoopbackTransport(Handler handler);

  void send(std::string_view line) override;
  std::optional<std::string> receive() override;

  // Every line that crossed the channel, prefixed "> " (sent) or "< " (received).
  const std::vector<std::string>& transcript() const { return transcript_; }

 private:
  Handler handler_;
  std::deque<std::string> pending_;
  std::vector<std::string> transcript_;
};

}  // namespace advpara::bridge
