#include "twinface/batch.hpp"

#include "twinface/error.hpp"
#include "twinface/wire.hpp"

namespace twinface {

namespace {

void check_slots(const ParamSet& params, BatchKind kind, std::size_t s) {
  std::size_t limit = max_slots(params, kind);
  if (s == 0) throw CapacityError("empty batch");
  if (s > limit) {
    throw CapacityError("batch of " + std::to_string(s) + " exceeds the slot limit " +
                        std::to_string(limit));
  }
}

void check_digit(const BigInt& v, const BigInt& radix) {
  if (sgn(v) < 0 || v >= radix) throw CapacityError("slot value outside [0, L)");
}

BigInt shift_left(const BigInt& v, std::size_t bits) {
  BigInt r;
  mpz_mul_2exp(r.get_mpz_t(), v.get_mpz_t(), bits);
  return r;
}

// Digit i (0-based) of width `bits`.
BigInt digit(const BigInt& packed, std::size_t i, std::size_t bits) {
  BigInt q, r;
  mpz_tdiv_q_2exp(q.get_mpz_t(), packed.get_mpz_t(), i * bits);
  mpz_tdiv_r_2exp(r.get_mpz_t(), q.get_mpz_t(), bits);
  return r;
}

void check_no_overflow(const BigInt& packed, std::size_t digits, std::size_t bits) {
  if (sgn(packed) < 0 || bit_length(packed) > digits * bits) {
    throw RangeError("packed plaintext carries data above the last slot");
  }
}

Ciphertext raise_by_radix(const Party& party, const Ciphertext& c) {
  return Ciphertext{powm(c.value, party.constants().radix, party.pk().n_squared())};
}

}  // namespace

BigInt pack_plain_square(const ParamSet& params, std::span<const BigInt> digits) {
  check_slots(params, BatchKind::square, digits.size());
  auto k = PackingConstants::from(params);
  BigInt acc = 0;
  for (std::size_t i = digits.size(); i-- > 0;) {
    check_digit(digits[i], k.radix);
    acc = shift_left(acc, params.sigma + 2) + digits[i];
  }
  return acc;
}

BigInt pack_plain_mul(const ParamSet& params, std::span<const BigInt> xs,
                      std::span<const BigInt> ys) {
  if (xs.size() != ys.size()) throw DimensionError("pack_plain_mul: operand counts differ");
  check_slots(params, BatchKind::mul, xs.size());
  auto k = PackingConstants::from(params);
  BigInt acc = 0;
  for (std::size_t i = xs.size(); i-- > 0;) {
    check_digit(xs[i], k.radix);
    check_digit(ys[i], k.radix);
    acc = shift_left(acc, params.sigma + 2) + xs[i];
    acc = shift_left(acc, params.sigma + 2) + ys[i];
  }
  return acc;
}

std::vector<BigInt> unpack_square(const PackingConstants& k, const BigInt& packed, std::size_t s) {
  std::size_t bits = k.radix_bits - 1;
  check_no_overflow(packed, s, bits);
  std::vector<BigInt> out;
  out.reserve(s);
  for (std::size_t i = 0; i < s; ++i) out.push_back(digit(packed, i, bits) - k.delta);
  return out;
}

std::vector<std::pair<BigInt, BigInt>> unpack_mul(const PackingConstants& k, const BigInt& packed,
                                                  std::size_t s) {
  std::size_t bits = k.radix_bits - 1;
  check_no_overflow(packed, 2 * s, bits);
  std::vector<std::pair<BigInt, BigInt>> out;
  out.reserve(s);
  for (std::size_t i = 0; i < s; ++i) {
    BigInt c = digit(packed, i, 2 * bits);
    out.emplace_back(digit(c, 1, bits) - k.delta, digit(c, 0, bits) - k.delta);
  }
  return out;
}

Ciphertext pack_square(const Party& party, std::span<const Ciphertext> blinded) {
  check_slots(party.params(), BatchKind::square, blinded.size());
  Ciphertext acc = blinded.back();
  for (std::size_t i = blinded.size() - 1; i-- > 0;) {
    acc = hom_add(party.pk(), raise_by_radix(party, acc), blinded[i]);
  }
  return acc;
}

Ciphertext pack_mul(const Party& party, std::span<const Ciphertext> xs,
                    std::span<const Ciphertext> ys) {
  if (xs.size() != ys.size()) throw DimensionError("pack_mul: operand counts differ");
  check_slots(party.params(), BatchKind::mul, xs.size());
  std::size_t s = xs.size();
  Ciphertext acc = xs[s - 1];
  acc = hom_add(party.pk(), raise_by_radix(party, acc), ys[s - 1]);
  for (std::size_t i = s - 1; i-- > 0;) {
    acc = hom_add(party.pk(), raise_by_radix(party, acc), xs[i]);
    acc = hom_add(party.pk(), raise_by_radix(party, acc), ys[i]);
  }
  return acc;
}

nlohmann::json to_payload(const PackedRequest& req) {
  nlohmann::json j;
  j["c"] = ct_json(req.packed);
  j["c1"] = to_hex(req.partial.value);
  j["s"] = req.slots;
  return j;
}

PackedRequest parse_packed_request(const Party& receiver, const nlohmann::json& payload) {
  PackedRequest req;
  req.packed = ct_field(receiver.pk(), payload, "c");
  req.partial = PartialCiphertext{ct_field(receiver.pk(), payload, "c1").value,
                                  receiver.peer_share_index()};
  auto s = payload.find("s");
  if (s == payload.end() || !s->is_number_unsigned()) throw ProtocolError("payload lacks 's'");
  req.slots = s->get<std::size_t>();
  return req;
}

std::pair<PackedRequest, SquareState> square_step1(const Party& initiator,
                                                   std::span<const Ciphertext> xs) {
  check_slots(initiator.params(), BatchKind::square, xs.size());
  const auto& pk = initiator.pk();
  SquareState state;
  std::vector<Ciphertext> blinded;
  blinded.reserve(xs.size());
  for (const auto& x : xs) {
    state.blinds.push_back(initiator.square_blind());
    state.shifted.push_back(hom_add(pk, x, initiator.delta_ct()));
    blinded.push_back(hom_add(pk, state.shifted.back(), state.blinds.back().enc_r));
  }
  Ciphertext packed = pack_square(initiator, blinded);
  PackedRequest req{packed, initiator.partial(packed), xs.size()};
  return {std::move(req), std::move(state)};
}

std::vector<Ciphertext> square_step2(const Party& responder, const PackedRequest& req) {
  check_slots(responder.params(), BatchKind::square, req.slots);
  const auto& pk = responder.pk();
  BigInt packed = threshold_decrypt(pk, req.partial, responder.partial(req.packed));
  std::vector<Ciphertext> reply;
  reply.reserve(req.slots);
  for (const BigInt& v : unpack_square(responder.constants(), packed, req.slots)) {
    reply.push_back(responder.encrypt(mod(v * v, pk.n())));
  }
  return reply;
}

std::vector<Ciphertext> square_step3(const Party& initiator, const SquareState& state,
                                     std::span<const Ciphertext> reply) {
  if (reply.size() != state.blinds.size()) {
    throw IntegrityError("batch_square: responder returned " + std::to_string(reply.size()) +
                         " ciphertexts for " + std::to_string(state.blinds.size()) + " slots");
  }
  const auto& pk = initiator.pk();
  std::vector<Ciphertext> out;
  out.reserve(reply.size());
  for (std::size_t i = 0; i < reply.size(); ++i) {
    const auto& b = state.blinds[i];
    // (x+r)^2 - 2r(x+delta) - r^2 + 2 delta r = x^2
    Ciphertext acc = hom_add(pk, reply[i], hom_scale(pk, state.shifted[i], -2 * b.r));
    acc = hom_add(pk, acc, b.enc_neg_r_sq);
    out.push_back(hom_add(pk, acc, b.enc_two_delta_r));
  }
  return out;
}

std::pair<PackedRequest, MulState> mul_step1(const Party& initiator, std::span<const Ciphertext> xs,
                                             std::span<const Ciphertext> ys) {
  if (xs.size() != ys.size()) throw DimensionError("batch_smul: operand counts differ");
  check_slots(initiator.params(), BatchKind::mul, xs.size());
  const auto& pk = initiator.pk();
  MulState state;
  std::vector<Ciphertext> bx, by;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    state.blinds.push_back(initiator.mul_blind());
    const auto& b = state.blinds.back();
    state.x_shifted.push_back(hom_add(pk, xs[i], initiator.delta_ct()));
    state.y_shifted.push_back(hom_add(pk, ys[i], initiator.delta_ct()));
    bx.push_back(hom_add(pk, state.x_shifted.back(), b.enc_r1));
    by.push_back(hom_add(pk, state.y_shifted.back(), b.enc_r2));
  }
  Ciphertext packed = pack_mul(initiator, bx, by);
  PackedRequest req{packed, initiator.partial(packed), xs.size()};
  return {std::move(req), std::move(state)};
}

std::vector<Ciphertext> mul_step2(const Party& responder, const PackedRequest& req) {
  check_slots(responder.params(), BatchKind::mul, req.slots);
  const auto& pk = responder.pk();
  BigInt packed = threshold_decrypt(pk, req.partial, responder.partial(req.packed));
  std::vector<Ciphertext> reply;
  reply.reserve(req.slots);
  for (const auto& [a, b] : unpack_mul(responder.constants(), packed, req.slots)) {
    reply.push_back(responder.encrypt(mod(a * b, pk.n())));
  }
  return reply;
}

std::vector<Ciphertext> mul_step3(const Party& initiator, const MulState& state,
                                  std::span<const Ciphertext> reply) {
  if (reply.size() != state.blinds.size()) {
    throw IntegrityError("batch_smul: responder returned " + std::to_string(reply.size()) +
                         " ciphertexts for " + std::to_string(state.blinds.size()) + " slots");
  }
  const auto& pk = initiator.pk();
  std::vector<Ciphertext> out;
  out.reserve(reply.size());
  for (std::size_t i = 0; i < reply.size(); ++i) {
    const auto& b = state.blinds[i];
    // (x+r1)(y+r2) - r2(x+delta) - r1(y+delta) - r1 r2 + delta(r1+r2) = xy
    Ciphertext acc = hom_add(pk, reply[i], hom_scale(pk, state.x_shifted[i], -b.r2));
    acc = hom_add(pk, acc, hom_scale(pk, state.y_shifted[i], -b.r1));
    acc = hom_add(pk, acc, b.enc_neg_r1r2);
    out.push_back(hom_add(pk, acc, b.enc_delta_sum));
  }
  return out;
}

std::vector<Ciphertext> batch_square(Session& session, const Party& party,
                                     std::span<const Ciphertext> xs) {
  std::size_t limit = max_slots(party.params(), BatchKind::square);
  std::vector<Ciphertext> out;
  out.reserve(xs.size());
  for (std::size_t off = 0; off < xs.size(); off += limit) {
    auto chunk = xs.subspan(off, std::min(limit, xs.size() - off));
    auto [req, state] = square_step1(party, chunk);
    session.send("bsq1", to_payload(req), 2);
    Envelope reply = session.expect("bsq2");
    auto squares = ct_list_field(party.pk(), reply.payload, "squares");
    session.count_received_ciphertexts(squares.size());
    for (auto& c : square_step3(party, state, squares)) out.push_back(std::move(c));
  }
  return out;
}

std::vector<Ciphertext> batch_smul(Session& session, const Party& party,
                                   std::span<const Ciphertext> xs, std::span<const Ciphertext> ys) {
  if (xs.size() != ys.size()) throw DimensionError("batch_smul: operand counts differ");
  std::size_t limit = max_slots(party.params(), BatchKind::mul);
  std::vector<Ciphertext> out;
  out.reserve(xs.size());
  for (std::size_t off = 0; off < xs.size(); off += limit) {
    std::size_t n = std::min(limit, xs.size() - off);
    auto [req, state] = mul_step1(party, xs.subspan(off, n), ys.subspan(off, n));
    session.send("bsm1", to_payload(req), 2);
    Envelope reply = session.expect("bsm2");
    auto products = ct_list_field(party.pk(), reply.payload, "products");
    session.count_received_ciphertexts(products.size());
    for (auto& c : mul_step3(party, state, products)) out.push_back(std::move(c));
  }
  return out;
}

std::vector<Ciphertext> naive_square(Session& session, const Party& party,
                                     std::span<const Ciphertext> xs) {
  const auto& pk = party.pk();
  std::vector<Ciphertext> out;
  out.reserve(xs.size());
  for (const auto& x : xs) {
    SquareBlind b = party.square_blind();
    Ciphertext shifted = hom_add(pk, x, party.delta_ct());
    Ciphertext blinded = hom_add(pk, shifted, b.enc_r);
    nlohmann::json payload;
    payload["c"] = ct_json(blinded);
    payload["c1"] = to_hex(party.partial(blinded).value);
    session.send("nsq1", std::move(payload), 2);
    Envelope reply = session.expect("nsq2");
    Ciphertext sq = ct_field(pk, reply.payload, "square");
    session.count_received_ciphertexts(1);
    Ciphertext acc = hom_add(pk, sq, hom_scale(pk, shifted, -2 * b.r));
    acc = hom_add(pk, acc, b.enc_neg_r_sq);
    out.push_back(hom_add(pk, acc, b.enc_two_delta_r));
  }
  return out;
}

Ciphertext naive_square_step2(const Party& responder, const nlohmann::json& payload) {
  const auto& pk = responder.pk();
  Ciphertext c = ct_field(pk, payload, "c");
  PartialCiphertext c1{ct_field(pk, payload, "c1").value, responder.peer_share_index()};
  BigInt v = threshold_decrypt(pk, c1, responder.partial(c)) - responder.constants().delta;
  return responder.encrypt(mod(v * v, pk.n()));
}

}  // namespace twinface
