#pragma once

// Secure minimum of two encrypted values, and its left fold over n values.
//
// The initiator flips a coin pi and sends D = Enc(r1(x - y + 1) + r2) (pi = 0)
// or D = Enc(r1(y - x) + r2) (pi = 1) together with its partial decryption and
// both operands. The responder decrypts D, compares it with floor(N/2) and
// returns a refreshed copy of y (D > N/2) or x. The initiator keeps that copy
// for pi = 0 and returns Enc(x + y) / copy for pi = 1.

#include <optional>
#include <span>
#include <utility>

#include "twinface/party.hpp"
#include "twinface/session.hpp"

namespace twinface {

struct SminRequest {
  Ciphertext d;
  PartialCiphertext d1;
  Ciphertext x;
  Ciphertext y;
};

struct SminState {
  int pi = 0;
  Ciphertext x;
  Ciphertext y;
};

std::pair<SminRequest, SminState> smin_step1(const Party& initiator, const Ciphertext& x,
                                             const Ciphertext& y,
                                             std::optional<int> forced_coin = std::nullopt);
Ciphertext smin_step2(const Party& responder, const SminRequest& req);
Ciphertext smin_step3(const Party& initiator, const SminState& state, const Ciphertext& d0);

nlohmann::json to_payload(const SminRequest& req);
SminRequest parse_smin_request(const Party& receiver, const nlohmann::json& payload);

Ciphertext smin2(Session& session, const Party& party, const Ciphertext& x, const Ciphertext& y,
                 std::optional<int> forced_coin = std::nullopt);

// Left fold of smin2 in input order: exactly n-1 rounds. Throws DomainError on
// empty input.
Ciphertext smin_n(Session& session, const Party& party, std::span<const Ciphertext> xs);

}  // namespace twinface
