#pragma once

// Twin-server daemon.
//
// S1 listens for S2 and for clients; S2 listens for clients and dials S1.
// Every connection opens with "hello" {role}. A client sends "probe" to both
// servers on a session named after its request id and waits for "result" (or
// "error") from S2.
//
// Peer steps besides the protocol requests:
//   S2 -> S1 "localmin" {request_id, d: hex | null}
//   S1 -> S2 "mask"     {request_id, c: hex, c1: hex}
//   either   "abort"    {request_id, message}

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "twinface/paillier.hpp"
#include "twinface/pool.hpp"
#include "twinface/recognition.hpp"

namespace twinface {

struct ServerOptions {
  ServerRole role = ServerRole::s1;
  std::string listen = "127.0.0.1:7101";
  std::string peer;  // S2 only: address of S1
  std::size_t lanes = 1;
  bool pool = true;
  std::size_t pool_recognitions = 32;
  std::string transcript_path;  // every frame body on every connection, for audits
  std::chrono::milliseconds peer_wait{30000};
  std::chrono::milliseconds request_timeout{600000};
};

struct ServerStats {
  std::uint64_t requests_started = 0;
  std::uint64_t requests_completed = 0;
  std::uint64_t requests_failed = 0;
};

class TwinServer {
 public:
  TwinServer(ServerOptions options, ParamSet params, PublicKey pk, KeyShare share,
             EncryptedShard shard, std::optional<Ciphertext> epsilon_ct,
             RandomSource& rng = system_random());
  ~TwinServer();
  TwinServer(const TwinServer&) = delete;
  TwinServer& operator=(const TwinServer&) = delete;

  // Binds the listener and starts serving; S2 also connects to S1 (retrying
  // until peer_wait elapses).
  void start();
  // Closes every connection, waits for in-flight work.
  void stop();
  // Blocks until stop() is called from another thread.
  void wait();

  std::uint16_t port() const;
  bool peer_connected() const;
  ServerStats stats() const;

  // Registration updates; exclusive with running recognitions.
  void replace_shard(EncryptedShard shard);
  void append_rows(std::vector<EncryptedRow> rows);

  struct State;

 private:
  std::shared_ptr<State> state_;
};

}  // namespace twinface
