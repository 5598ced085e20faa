#include "advpara/bridge/transport.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace advpara::bridge {

namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

void write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_text("bridge write failed"));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

FdTransport::FdTransport(int read_fd, int write_fd, bool owns) : read_fd_(read_fd), write_fd_(write_fd), owns_(owns) {
  if (read_fd < 0 || write_fd < 0) throw TransportError("invalid file descriptor");
}

FdTransport::~FdTransport() {
  if (!owns_) return;
  ::close(write_fd_);
  if (read_fd_ != write_fd_) ::close(read_fd_);
}

void FdTransport::send(std::string_view line) {
  if (line.find('\n') != std::string_view::npos) throw TransportError("a message may not contain a newline");
  std::string out(line);
  out.push_back('\n');
  write_all(write_fd_, out);
}

std::optional<std::string> FdTransport::receive() {
  while (true) {
    if (const auto pos = buffer_.find('\n'); pos != std::string::npos) {
      std::string line = buffer_.substr(0, pos);
      buffer_.erase(0, pos + 1);
      return line;
    }
    if (eof_) {
      if (buffer_.empty()) return std::nullopt;
      std::string line = std::move(buffer_);
      buffer_.clear();
      return line;
    }
    char chunk[4096];
    const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_text("bridge read failed"));
    }
    if (n == 0) {
      eof_ = true;
    } else {
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }
}

ProcessTransport::ProcessTransport(const std::vector<std::string>& argv) {
  if (argv.empty()) throw TransportError("bridge command is empty");
  // A dead child must surface as a write error, not SIGPIPE.
  ::signal(SIGPIPE, SIG_IGN);
  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw TransportError(errno_text("pipe"));
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw TransportError(errno_text("pipe"));
  }
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  const pid_t pid = ::fork();
  if (pid < 0) throw TransportError(errno_text("fork"));
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execvp(args[0], args.data());
    _exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  pid_ = pid;
  io_ = std::make_unique<FdTransport>(from_child[0], to_child[1], true);
}

ProcessTransport::~ProcessTransport() {
  io_.reset();
  if (pid_ > 0) {
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
  }
}

void ProcessTransport::send(std::string_view line) { io_->send(line); }

std::optional<std::string> ProcessTransport::receive() { return io_->receive(); }

std::unique_ptr<Transport> connect_unix_socket(const std::string& path) {
  sockaddr_un addr{};
  if (path.size() >= sizeof addr.sun_path) throw TransportError("socket path too long: " + path);
  addr.sun_family = AF_UNIX;
  std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
  const int fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) throw TransportError(errno_text("socket"));
  if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    const std::string msg = errno_text(("connect " + path).c_str());
    ::close(fd);
    throw TransportError(msg);
  }
  return std::make_unique<FdTransport>(fd, fd, true);
}

LoopbackTransport::LoopbackTransport(Handler handler) : handler_(std::move(handler)) {}

void LoopbackTransport::send(std::string_view line) {
  transcript_.push_back("> " + std::string(line));
  std::string reply = handler_(line);
  if (!reply.empty()) pending_.push_back(std::move(reply));
}

std::optional<std::string> LoopbackTransport::receive() {
  if (pending_.empty()) return std::nullopt;
  std::string line = std::move(pending_.front());
  pending_.pop_front();
  transcript_.push_back("< " + line);
  return line;
}

}  // namespace advpara::bridge
