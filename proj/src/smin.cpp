#include "twinface/smin.hpp"

#include "twinface/error.hpp"
#include "twinface/wire.hpp"

namespace twinface {

std::pair<SminRequest, SminState> smin_step1(const Party& initiator, const Ciphertext& x,
                                             const Ciphertext& y, std::optional<int> forced_coin) {
  const auto& pk = initiator.pk();
  SminBlind b = initiator.smin_blind(forced_coin);
  Ciphertext diff = b.pi == 0 ? hom_sub(pk, x, y) : hom_sub(pk, y, x);
  Ciphertext d = hom_add(pk, hom_scalar_mul(pk, diff, b.r1), b.enc_offset);
  SminRequest req{d, initiator.partial(d), x, y};
  return {std::move(req), SminState{b.pi, x, y}};
}

Ciphertext smin_step2(const Party& responder, const SminRequest& req) {
  const auto& pk = responder.pk();
  BigInt d = threshold_decrypt(pk, req.d1, responder.partial(req.d));
  const Ciphertext& chosen = d > pk.half_n() ? req.y : req.x;
  return hom_add(pk, chosen, responder.refresh_blind().zero_pow_r);
}

Ciphertext smin_step3(const Party& initiator, const SminState& state, const Ciphertext& d0) {
  if (state.pi == 0) return d0;
  const auto& pk = initiator.pk();
  return hom_sub(pk, hom_add(pk, state.x, state.y), d0);
}

nlohmann::json to_payload(const SminRequest& req) {
  nlohmann::json j;
  j["d"] = ct_json(req.d);
  j["d1"] = to_hex(req.d1.value);
  j["x"] = ct_json(req.x);
  j["y"] = ct_json(req.y);
  return j;
}

SminRequest parse_smin_request(const Party& receiver, const nlohmann::json& payload) {
  const auto& pk = receiver.pk();
  SminRequest req;
  req.d = ct_field(pk, payload, "d");
  req.d1 = PartialCiphertext{ct_field(pk, payload, "d1").value, receiver.peer_share_index()};
  req.x = ct_field(pk, payload, "x");
  req.y = ct_field(pk, payload, "y");
  return req;
}

Ciphertext smin2(Session& session, const Party& party, const Ciphertext& x, const Ciphertext& y,
                 std::optional<int> forced_coin) {
  auto [req, state] = smin_step1(party, x, y, forced_coin);
  session.send("sm1", to_payload(req), 4);
  Envelope reply = session.expect("sm2");
  Ciphertext d0 = ct_field(party.pk(), reply.payload, "d0");
  session.count_received_ciphertexts(1);
  return smin_step3(party, state, d0);
}

Ciphertext smin_n(Session& session, const Party& party, std::span<const Ciphertext> xs) {
  if (xs.empty()) throw DomainError("smin_n: empty input");
  Ciphertext acc = xs.front();
  for (std::size_t t = 1; t < xs.size(); ++t) acc = smin2(session, party, acc, xs[t]);
  return acc;
}

}  // namespace twinface
