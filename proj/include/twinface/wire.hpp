#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "twinface/error.hpp"
#include "twinface/paillier.hpp"

namespace twinface {

inline nlohmann::json ct_json(const Ciphertext& c) { return to_hex(c.value); }

inline nlohmann::json ct_list_json(const std::vector<Ciphertext>& cs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : cs) arr.push_back(to_hex(c.value));
  return arr;
}

// Parses and validates a hex ciphertext field; peers are not trusted to send units mod N.
inline Ciphertext ct_from_json(const PublicKey& pk, const nlohmann::json& j) {
  if (!j.is_string()) throw ProtocolError("expected a hex ciphertext");
  Ciphertext c{from_hex(j.get<std::string>())};
  validate(pk, c);
  return c;
}

inline Ciphertext ct_field(const PublicKey& pk, const nlohmann::json& payload, const char* name) {
  auto it = payload.find(name);
  if (it == payload.end()) throw ProtocolError(std::string("payload lacks '") + name + "'");
  return ct_from_json(pk, *it);
}

inline std::vector<Ciphertext> ct_list_field(const PublicKey& pk, const nlohmann::json& payload,
                                             const char* name) {
  auto it = payload.find(name);
  if (it == payload.end() || !it->is_array()) {
    throw ProtocolError(std::string("payload lacks array '") + name + "'");
  }
  std::vector<Ciphertext> out;
  out.reserve(it->size());
  for (const auto& e : *it) out.push_back(ct_from_json(pk, e));
  return out;
}

}  // namespace twinface
