#pragma once

// Length-prefixed JSON envelopes, multiplexed by session id over one connection.
//
// Frame: 4-byte big-endian body length, then the UTF-8 body
//   {"v":1,"session":"<id>","step":"<tag>","payload":{...}}
// with the envelope fields in that order and payload keys sorted.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

namespace twinface {

inline constexpr std::size_t kMaxFrameBody = 64U * 1024U * 1024U;
inline constexpr int kProtocolVersion = 1;

struct Envelope {
  std::string session;
  std::string step;
  nlohmann::json payload = nlohmann::json::object();

  bool operator==(const Envelope&) const = default;
};

std::string encode_envelope(const Envelope& env);
// Throws MalformedFrame carrying the byte offset of the first error.
Envelope decode_envelope(std::string_view body);

// Length prefix + body. Throws OversizeFrame for bodies above kMaxFrameBody.
std::string encode_frame(const Envelope& env);
std::uint32_t read_frame_length(const unsigned char* prefix);

struct TransportStats {
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_received = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
};

// Append-only record of every frame body crossing a connection.
class Transcript {
 public:
  Transcript() = default;
  explicit Transcript(const std::string& path);

  void record(std::string_view direction, std::string_view label, std::string_view body);
  std::string text() const;

 private:
  mutable std::mutex mutex_;
  std::string memory_;
  std::ofstream file_;
  bool to_file_ = false;
};

// Demultiplexing endpoint. Sessions opened locally receive their envelopes
// through recv_for; envelopes for any other session are queued for
// recv_inbound, where the responder side picks them up.
class Connection {
 public:
  virtual ~Connection() = default;
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  // Serialized against other sends on this connection.
  void send(const Envelope& env);

  // Blocks until the next envelope of `session` arrives. Throws
  // ConnectionClosed (or the stored read error) once the connection is down
  // and the session queue is empty, and TransportError on timeout.
  Envelope recv_for(const std::string& session,
                    std::optional<std::chrono::milliseconds> timeout = std::nullopt);

  // Next envelope for a session this side did not open; nullopt after close.
  std::optional<Envelope> recv_inbound();

  void open_session(const std::string& id);
  void close_session(const std::string& id);
  // "<prefix>-<connection tag>-<counter>". The random tag keeps ids opened by
  // the two ends of one connection apart.
  std::string new_session_id(std::string_view prefix);

  virtual void close() = 0;
  bool is_closed() const;

  TransportStats stats() const;
  void set_transcript(std::shared_ptr<Transcript> t, std::string label);

 protected:
  Connection();

  virtual void write_bytes(const std::string& frame) = 0;
  void deliver(Envelope env, std::size_t wire_bytes, std::string_view body);
  void fail(std::exception_ptr error);

 private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::map<std::string, std::deque<Envelope>> sessions_;
  std::deque<Envelope> inbound_;
  std::exception_ptr error_;
  std::mutex send_mutex_;
  TransportStats stats_;
  std::atomic<std::uint64_t> next_session_{0};
  std::string tag_;
  std::shared_ptr<Transcript> transcript_;
  std::string transcript_label_;
};

// In-process pair; every frame is fully encoded and decoded.
std::pair<std::shared_ptr<Connection>, std::shared_ptr<Connection>> make_loopback_pair();

// TCP endpoint on a connected socket; a reader thread feeds the demultiplexer.
std::shared_ptr<Connection> tcp_connect(const std::string& host, std::uint16_t port);
std::shared_ptr<Connection> tcp_connect_retry(const std::string& host, std::uint16_t port,
                                              std::chrono::milliseconds total_wait);

class TcpListener {
 public:
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  // Blocks for the next connection; nullptr once the listener is shut down.
  std::shared_ptr<Connection> accept();
  void shutdown();
  std::uint16_t port() const { return port_; }

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopped_{false};
};

// "host:port" -> (host, port)
std::pair<std::string, std::uint16_t> split_host_port(const std::string& address);

}  // namespace twinface
