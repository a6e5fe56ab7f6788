#include "twinface/shard_io.hpp"

#include <json.hpp>

#include "twinface/error.hpp"
#include "twinface/key_io.hpp"

namespace twinface {

namespace {

using ordered = nlohmann::ordered_json;

nlohmann::json parse_document(const std::string& text, const char* what) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
  if (!j.is_object() || j.value("version", 0) != 1) {
    throw FormatError(std::string(what) + ": missing or unsupported version");
  }
  return j;
}

Ciphertext parse_ct(const nlohmann::json& j, const PublicKey& pk, const char* what) {
  if (!j.is_string()) throw FormatError(std::string(what) + ": ciphertext is not a hex string");
  Ciphertext c{from_hex(j.get<std::string>())};
  try {
    validate(pk, c);
  } catch (const DomainError& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
  return c;
}

std::size_t get_size(const nlohmann::json& j, const char* key, const char* what) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_unsigned()) {
    throw FormatError(std::string(what) + ": field '" + key + "' missing or not a count");
  }
  return it->get<std::size_t>();
}

}  // namespace

std::string shard_json(const EncryptedShard& shard) {
  ordered j;
  j["version"] = 1;
  j["owner"] = to_string(shard.owner);
  j["row_offset"] = shard.row_offset;
  j["n"] = shard.dimension;
  ordered rows = ordered::array();
  for (const auto& row : shard.rows) {
    ordered r;
    r["id_ct"] = to_hex(row.id.value);
    ordered v = ordered::array();
    for (const auto& c : row.values) v.push_back(to_hex(c.value));
    r["v_ct"] = std::move(v);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j.dump() + "\n";
}

EncryptedShard parse_shard(const std::string& text, const PublicKey& pk) {
  auto j = parse_document(text, "shard");
  EncryptedShard shard;
  auto owner = j.find("owner");
  if (owner == j.end() || !owner->is_string()) throw FormatError("shard: owner missing");
  try {
    shard.owner = parse_role(owner->get<std::string>());
  } catch (const ParameterError& e) {
    throw FormatError(std::string("shard: ") + e.what());
  }
  shard.row_offset = get_size(j, "row_offset", "shard");
  shard.dimension = get_size(j, "n", "shard");
  auto rows = j.find("rows");
  if (rows == j.end() || !rows->is_array()) throw FormatError("shard: rows missing");
  for (const auto& r : *rows) {
    if (!r.is_object() || !r.contains("id_ct") || !r.contains("v_ct") || !r["v_ct"].is_array()) {
      throw FormatError("shard: malformed row");
    }
    EncryptedRow row;
    row.id = parse_ct(r["id_ct"], pk, "shard");
    for (const auto& c : r["v_ct"]) row.values.push_back(parse_ct(c, pk, "shard"));
    if (row.values.size() != shard.dimension) {
      throw FormatError("shard: row " + std::to_string(shard.rows.size()) + " has " +
                        std::to_string(row.values.size()) + " values, expected " +
                        std::to_string(shard.dimension));
    }
    shard.rows.push_back(std::move(row));
  }
  return shard;
}

std::string epsilon_json(const Ciphertext& c) {
  ordered j;
  j["version"] = 1;
  j["kind"] = "epsilon";
  j["ct"] = to_hex(c.value);
  return j.dump() + "\n";
}

Ciphertext parse_epsilon(const std::string& text, const PublicKey& pk) {
  auto j = parse_document(text, "epsilon");
  if (j.value("kind", std::string()) != "epsilon") throw FormatError("epsilon: wrong kind");
  if (!j.contains("ct")) throw FormatError("epsilon: ct missing");
  return parse_ct(j["ct"], pk, "epsilon");
}

std::string ids_json(const std::vector<std::string>& ids) {
  ordered j;
  j["version"] = 1;
  j["ids"] = ids;
  return j.dump() + "\n";
}

std::vector<std::string> parse_ids(const std::string& text) {
  auto j = parse_document(text, "ids");
  auto ids = j.find("ids");
  if (ids == j.end() || !ids->is_array()) throw FormatError("ids: list missing");
  std::vector<std::string> out;
  for (const auto& id : *ids) {
    if (!id.is_string()) throw FormatError("ids: entry is not a string");
    out.push_back(id.get<std::string>());
  }
  return out;
}

EncryptedShard load_shard(const std::filesystem::path& path, const PublicKey& pk) {
  return parse_shard(read_text_file(path), pk);
}

Ciphertext load_epsilon(const std::filesystem::path& path, const PublicKey& pk) {
  return parse_epsilon(read_text_file(path), pk);
}

}  // namespace twinface
