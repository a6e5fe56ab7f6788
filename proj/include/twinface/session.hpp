#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "twinface/transport.hpp"

namespace twinface {

struct SessionCounters {
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_received = 0;
  std::uint64_t ciphertexts_sent = 0;
  std::uint64_t ciphertexts_received = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;

  SessionCounters& operator+=(const SessionCounters& o);
};

// Initiator side of one protocol run: an id opened on the connection for the
// lifetime of the object, plus frame and ciphertext accounting.
class Session {
 public:
  Session(Connection& conn, std::string_view prefix);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  void send(std::string step, nlohmann::json payload, std::size_t ciphertexts);
  // Receives the next envelope and checks its step tag. A peer "error" step
  // becomes ProtocolError.
  Envelope expect(std::string_view step);
  void count_received_ciphertexts(std::size_t n) { counters_.ciphertexts_received += n; }

  const std::string& id() const { return id_; }
  const SessionCounters& counters() const { return counters_; }
  Connection& connection() { return conn_; }

 private:
  Connection& conn_;
  std::string id_;
  SessionCounters counters_;
};

}  // namespace twinface
