#pragma once

#include <filesystem>
#include <string>

#include "twinface/paillier.hpp"

namespace twinface {

// Key file documents: {"version":1,"kind":...,"kappa":..,"modulus_bits":..,"sigma":..,"ell":..,<fields>}
// with every integer field as minimal lowercase hex.
std::string public_key_json(const ParamSet& params, const PublicKey& pk);
std::string private_key_json(const ParamSet& params, const PrivateKey& sk);
std::string share_json(const ParamSet& params, const KeyShare& share);

struct LoadedPublicKey {
  ParamSet params;
  PublicKey pk;
};

LoadedPublicKey parse_public_key(const std::string& text);
// The private key and shares carry no modulus; they are bound to a public key on load.
PrivateKey parse_private_key(const std::string& text, const LoadedPublicKey& pk);
KeyShare parse_share(const std::string& text, const LoadedPublicKey& pk);

LoadedPublicKey load_public_key(const std::filesystem::path& path);
PrivateKey load_private_key(const std::filesystem::path& path, const LoadedPublicKey& pk);
KeyShare load_share(const std::filesystem::path& path, const LoadedPublicKey& pk);

// Writes pk.json, sk.json, share1.json, share2.json. Refuses to overwrite unless force.
void write_key_files(const std::filesystem::path& dir, const KeyMaterial& keys, bool force);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text, bool force);

}  // namespace twinface
