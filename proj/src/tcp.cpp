#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "twinface/error.hpp"
#include "twinface/transport.hpp"

namespace twinface {

namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

// Reads exactly n bytes; false on orderly EOF before the first byte.
bool read_exact(int fd, char* buf, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    ssize_t r = ::recv(fd, buf + got, n - got, 0);
    if (r == 0) {
      if (got == 0) return false;
      throw ConnectionClosed("connection closed mid-frame");
    }
    if (r < 0) {
      if (errno == EINTR) continue;
      throw ConnectionClosed(errno_text("recv"));
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

class TcpConnection final : public Connection {
 public:
  explicit TcpConnection(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }

  ~TcpConnection() override {
    close();
    if (reader_.joinable()) reader_.join();
    ::close(fd_);
  }

  void start() { reader_ = std::thread([this] { read_loop(); }); }

  void close() override {
    bool expected = false;
    if (shut_.compare_exchange_strong(expected, true)) {
      ::shutdown(fd_, SHUT_RDWR);
    }
    fail(std::make_exception_ptr(ConnectionClosed()));
  }

 protected:
  void write_bytes(const std::string& frame) override {
    std::size_t sent = 0;
    while (sent < frame.size()) {
      ssize_t r = ::send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
      if (r < 0) {
        if (errno == EINTR) continue;
        throw ConnectionClosed(errno_text("send"));
      }
      sent += static_cast<std::size_t>(r);
    }
  }

 private:
  void read_loop() {
    try {
      std::string body;
      for (;;) {
        unsigned char prefix[4];
        if (!read_exact(fd_, reinterpret_cast<char*>(prefix), 4)) break;
        std::uint32_t len = read_frame_length(prefix);
        if (len > kMaxFrameBody) {
          throw MalformedFrame("frame length " + std::to_string(len) + " exceeds 64 MiB", 0);
        }
        body.resize(len);
        if (len > 0 && !read_exact(fd_, body.data(), len)) {
          throw ConnectionClosed("connection closed mid-frame");
        }
        deliver(decode_envelope(body), len + 4, body);
      }
      fail(std::make_exception_ptr(ConnectionClosed()));
    } catch (...) {
      fail(std::current_exception());
    }
    ::shutdown(fd_, SHUT_RDWR);
  }

  int fd_;
  std::atomic<bool> shut_{false};
  std::thread reader_;
};

std::shared_ptr<Connection> wrap(int fd) {
  auto conn = std::make_shared<TcpConnection>(fd);
  conn->start();
  return conn;
}

}  // namespace

std::shared_ptr<Connection> tcp_connect(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res);
  if (rc != 0) throw TransportError("resolve " + host + ": " + ::gai_strerror(rc));
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) {
    throw TransportError("cannot connect to " + host + ":" + std::to_string(port));
  }
  return wrap(fd);
}

std::shared_ptr<Connection> tcp_connect_retry(const std::string& host, std::uint16_t port,
                                              std::chrono::milliseconds total_wait) {
  auto deadline = std::chrono::steady_clock::now() + total_wait;
  auto backoff = std::chrono::milliseconds(50);
  for (;;) {
    try {
      return tcp_connect(host, port);
    } catch (const TransportError&) {
      if (std::chrono::steady_clock::now() + backoff > deadline) throw;
      std::this_thread::sleep_for(backoff);
      backoff = std::min(backoff * 2, std::chrono::milliseconds(1000));
    }
  }
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportError(errno_text("socket"));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw TransportError("listen address must be an IPv4 literal: " + host);
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    std::string msg = errno_text("bind");
    ::close(fd_);
    throw TransportError(msg + " (" + host + ":" + std::to_string(port) + ")");
  }
  if (::listen(fd_, 64) != 0) {
    std::string msg = errno_text("listen");
    ::close(fd_);
    throw TransportError(msg);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  shutdown();
  ::close(fd_);
}

std::shared_ptr<Connection> TcpListener::accept() {
  for (;;) {
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) return wrap(fd);
    if (stopped_) return nullptr;
    if (errno == EINTR || errno == ECONNABORTED) continue;
    if (errno == EINVAL) return nullptr;
    throw TransportError(errno_text("accept"));
  }
}

void TcpListener::shutdown() {
  if (!stopped_.exchange(true)) ::shutdown(fd_, SHUT_RDWR);
}

}  // namespace twinface
