#pragma once

// Batched secure multiplication and squaring.
//
// The initiator blinds each input with delta and a sigma-bit random value,
// packs the blinded values as base-L digits of one plaintext and sends the
// packed ciphertext with its own partial decryption. The responder completes
// the decryption, unpacks the digits, multiplies them in the clear and returns
// fresh encryptions; the initiator strips the blinding terms homomorphically.

#include <span>
#include <utility>
#include <vector>

#include "twinface/party.hpp"
#include "twinface/session.hpp"

namespace twinface {

// --- plaintext packing ---------------------------------------------------

// sum_i L^(i-1) * v_i. Throws CapacityError when s exceeds the square limit or
// a digit lies outside [0, L).
BigInt pack_plain_square(const ParamSet& params, std::span<const BigInt> digits);
// sum_i L^(2i-1) * x_i + L^(2i-2) * y_i.
BigInt pack_plain_mul(const ParamSet& params, std::span<const BigInt> xs,
                      std::span<const BigInt> ys);

// floor(C mod L^i / L^(i-1)) - delta for each slot. RangeError if C carries
// digits above slot s.
std::vector<BigInt> unpack_square(const PackingConstants& k, const BigInt& packed, std::size_t s);
// (floor(c_i / L) - delta, c_i mod L - delta) with c_i = floor(C mod L^2i / L^2(i-1)).
std::vector<std::pair<BigInt, BigInt>> unpack_mul(const PackingConstants& k, const BigInt& packed,
                                                  std::size_t s);

// --- homomorphic packing -------------------------------------------------

Ciphertext pack_square(const Party& party, std::span<const Ciphertext> blinded);
Ciphertext pack_mul(const Party& party, std::span<const Ciphertext> xs,
                    std::span<const Ciphertext> ys);

// --- protocol steps ------------------------------------------------------

struct PackedRequest {
  Ciphertext packed;
  PartialCiphertext partial;
  std::size_t slots = 0;
};

nlohmann::json to_payload(const PackedRequest& req);
PackedRequest parse_packed_request(const Party& receiver, const nlohmann::json& payload);

struct SquareState {
  std::vector<SquareBlind> blinds;
  std::vector<Ciphertext> shifted;  // Enc(x_i + delta)
};

struct MulState {
  std::vector<MulBlind> blinds;
  std::vector<Ciphertext> x_shifted;  // Enc(x_i + delta)
  std::vector<Ciphertext> y_shifted;  // Enc(y_i + delta)
};

std::pair<PackedRequest, SquareState> square_step1(const Party& initiator,
                                                   std::span<const Ciphertext> xs);
std::vector<Ciphertext> square_step2(const Party& responder, const PackedRequest& req);
std::vector<Ciphertext> square_step3(const Party& initiator, const SquareState& state,
                                     std::span<const Ciphertext> reply);

std::pair<PackedRequest, MulState> mul_step1(const Party& initiator, std::span<const Ciphertext> xs,
                                             std::span<const Ciphertext> ys);
std::vector<Ciphertext> mul_step2(const Party& responder, const PackedRequest& req);
std::vector<Ciphertext> mul_step3(const Party& initiator, const MulState& state,
                                  std::span<const Ciphertext> reply);

// --- session drivers -----------------------------------------------------

// Enc(x_i^2) for every input; inputs beyond the slot limit are processed as
// sequential sub-batches within the session.
std::vector<Ciphertext> batch_square(Session& session, const Party& party,
                                     std::span<const Ciphertext> xs);
std::vector<Ciphertext> batch_smul(Session& session, const Party& party,
                                   std::span<const Ciphertext> xs, std::span<const Ciphertext> ys);

// Unbatched baseline: one blinded ciphertext and its partial decryption per
// element, one encrypted square back. Used for benchmarking only.
std::vector<Ciphertext> naive_square(Session& session, const Party& party,
                                     std::span<const Ciphertext> xs);
Ciphertext naive_square_step2(const Party& responder, const nlohmann::json& payload);

}  // namespace twinface
