#pragma once

// Registration and recognition over a horizontally split encrypted database.
//
// S2 holds rows [0, floor(Y/2)), S1 the rest. For a probe p each server
// computes Enc(u_j - v_ij), squares the cells with BatchSquare as initiator,
// sums each row and folds its own distances with n-SMIN. S1 then takes the
// minimum of both local minima and Enc(epsilon), adds the client's Enc(R) and
// the servers jointly decrypt gamma + R for the client.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "twinface/encoding.hpp"
#include "twinface/party.hpp"
#include "twinface/session.hpp"

namespace twinface {

struct PlainDatabase {
  std::vector<std::string> ids;
  std::vector<std::vector<std::int64_t>> rows;

  std::size_t dimension() const { return rows.empty() ? 0 : rows.front().size(); }
};

std::vector<std::int64_t> quantize_vector(std::span<const double> v,
                                          const QuantizationSpec& spec = {});
PlainDatabase quantize_table(const FeatureTable& table, const QuantizationSpec& spec = {});

enum class ServerRole { s1, s2 };
std::string to_string(ServerRole role);
ServerRole parse_role(const std::string& text);

struct EncryptedRow {
  Ciphertext id;
  std::vector<Ciphertext> values;
};

struct EncryptedShard {
  ServerRole owner = ServerRole::s1;
  std::size_t row_offset = 0;
  std::size_t dimension = 0;
  std::vector<EncryptedRow> rows;

  // Row-major copy of every value cell.
  std::vector<Ciphertext> cells() const;
};

struct ShardPair {
  EncryptedShard s1;
  EncryptedShard s2;
};

// Largest squared distance the parameters admit for `dimension` coordinates
// bounded by `coordinate_bound`: dimension * bound^2 must stay below 2^ell.
void check_distance_bound(const ParamSet& params, std::size_t dimension,
                          std::int64_t coordinate_bound);

// Encrypts every cell; IDs are encoded as their row index. Rows [0, split) go
// to S2 (split defaults to floor(Y/2)). Values must lie in [0, coordinate_bound],
// and the bound must satisfy check_distance_bound.
ShardPair encrypt_database(const PublicKey& pk, const ParamSet& params, const PlainDatabase& db,
                           RandomSource& rng, std::optional<std::size_t> split = std::nullopt,
                           std::int64_t coordinate_bound = 10000);

struct ProbeRequest {
  std::string request_id;
  std::vector<Ciphertext> probe;
  Ciphertext mask;  // Enc(R); only S1 receives it
};

struct ClientProbe {
  ProbeRequest request;
  BigInt r;
};

// Encrypts the probe and draws the sigma-bit mask R.
ClientProbe make_probe(const PublicKey& pk, const ParamSet& params,
                       std::span<const std::int64_t> probe, RandomSource& rng,
                       std::string request_id);

// Enc(sum_j (u_j - v_ij)^2) for each shard row. `lanes` concurrent sessions
// share the BatchSquare work; counters of every session are added to `counters`.
std::vector<Ciphertext> squared_distances(Connection& conn, const Party& party,
                                          const EncryptedShard& shard,
                                          std::span<const Ciphertext> probe, std::size_t lanes = 1,
                                          SessionCounters* counters = nullptr);

// n-SMIN over the distances; nullopt for an empty shard.
std::optional<Ciphertext> local_min(Connection& conn, const Party& party,
                                    std::span<const Ciphertext> distances,
                                    SessionCounters* counters = nullptr);

// min(d_S1, d_S2, epsilon) over whichever local minima exist.
Ciphertext final_min(Connection& conn, const Party& party, const std::optional<Ciphertext>& d_s1,
                     const std::optional<Ciphertext>& d_s2, const Ciphertext& epsilon,
                     SessionCounters* counters = nullptr);

struct MaskedResult {
  Ciphertext masked;         // Enc(gamma + R)
  PartialCiphertext partial;  // S1's partial decryption of it
};

MaskedResult mask_result(const Party& s1, const Ciphertext& gamma, const Ciphertext& mask);
// S2 completes the decryption of gamma + R.
BigInt release_masked(const Party& s2, const MaskedResult& m);

struct RecognitionOutcome {
  std::string request_id;
  BigInt masked;
  BigInt gamma;
  bool accepted = false;
  BigInt epsilon;
};

// gamma = masked - R mod N; accepted iff gamma < epsilon. RangeError unless
// gamma lies in [0, 2^ell).
RecognitionOutcome recover(const ParamSet& params, const PublicKey& pk, const BigInt& masked,
                           const BigInt& r, const BigInt& epsilon, std::string request_id = {});

// Plaintext reference: min(min_i sum_j (p_j - v_ij)^2, epsilon).
std::int64_t squared_distance(std::span<const std::int64_t> a, std::span<const std::int64_t> b);
std::int64_t plaintext_gamma(const PlainDatabase& db, std::span<const std::int64_t> probe,
                             std::int64_t epsilon);

// Both servers in one process, connected by a loopback pair. Each side runs a
// responder thread while its own initiator sessions execute on the caller's
// threads, so the role-swapped sessions interleave on one connection as they
// do between daemons.
class LocalTwin {
 public:
  LocalTwin(Party s1, Party s2, ShardPair shards, Ciphertext epsilon_ct, std::size_t lanes = 1);
  ~LocalTwin();
  LocalTwin(const LocalTwin&) = delete;
  LocalTwin& operator=(const LocalTwin&) = delete;

  // Full request flow for an already encrypted probe; returns gamma + R.
  BigInt run(const ProbeRequest& req);

  // Client side included: encrypts the probe, runs the flow, recovers gamma.
  RecognitionOutcome recognize(std::span<const std::int64_t> probe, const BigInt& epsilon,
                               RandomSource& client_rng);

  // Server-to-server session traffic of the last run(), both initiators combined.
  const SessionCounters& last_counters() const { return last_counters_; }

  const std::shared_ptr<Connection>& s1_end() const { return s1_end_; }
  const std::shared_ptr<Connection>& s2_end() const { return s2_end_; }

 private:
  Party s1_;
  Party s2_;
  ShardPair shards_;
  Ciphertext epsilon_ct_;
  std::size_t lanes_;
  std::shared_ptr<Connection> s1_end_;
  std::shared_ptr<Connection> s2_end_;
  std::thread s1_responder_;
  std::thread s2_responder_;
  std::uint64_t next_request_ = 0;
  SessionCounters last_counters_;
};

}  // namespace twinface
