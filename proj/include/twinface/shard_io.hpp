#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "twinface/recognition.hpp"

namespace twinface {

// {"version":1,"owner":"s1"|"s2","row_offset":int,"n":int,"rows":[{"id_ct":hex,"v_ct":[hex]}]}
std::string shard_json(const EncryptedShard& shard);
// Validates every ciphertext against pk and every row against n.
EncryptedShard parse_shard(const std::string& text, const PublicKey& pk);

// {"version":1,"kind":"epsilon","ct":hex}
std::string epsilon_json(const Ciphertext& c);
Ciphertext parse_epsilon(const std::string& text, const PublicKey& pk);

// {"version":1,"ids":[...]}; position i is the numeric ID i.
std::string ids_json(const std::vector<std::string>& ids);
std::vector<std::string> parse_ids(const std::string& text);

EncryptedShard load_shard(const std::filesystem::path& path, const PublicKey& pk);
Ciphertext load_epsilon(const std::filesystem::path& path, const PublicKey& pk);

}  // namespace twinface
