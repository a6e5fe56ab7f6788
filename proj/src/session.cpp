#include "twinface/session.hpp"

#include "twinface/error.hpp"

namespace twinface {

SessionCounters& SessionCounters::operator+=(const SessionCounters& o) {
  frames_sent += o.frames_sent;
  frames_received += o.frames_received;
  ciphertexts_sent += o.ciphertexts_sent;
  ciphertexts_received += o.ciphertexts_received;
  bytes_sent += o.bytes_sent;
  bytes_received += o.bytes_received;
  return *this;
}

Session::Session(Connection& conn, std::string_view prefix)
    : conn_(conn), id_(conn.new_session_id(prefix)) {
  conn_.open_session(id_);
}

Session::~Session() { conn_.close_session(id_); }

void Session::send(std::string step, nlohmann::json payload, std::size_t ciphertexts) {
  Envelope env{id_, std::move(step), std::move(payload)};
  std::size_t bytes = encode_envelope(env).size() + 4;
  conn_.send(env);
  counters_.frames_sent += 1;
  counters_.ciphertexts_sent += ciphertexts;
  counters_.bytes_sent += bytes;
}

Envelope Session::expect(std::string_view step) {
  Envelope env = conn_.recv_for(id_);
  counters_.frames_received += 1;
  counters_.bytes_received += encode_envelope(env).size() + 4;
  if (env.step == "error") {
    throw ProtocolError("peer reported: " + env.payload.value("message", std::string("error")));
  }
  if (env.step != step) {
    throw ProtocolError("session " + id_ + ": expected step '" + std::string(step) + "', got '" +
                        env.step + "'");
  }
  return env;
}

}  // namespace twinface
