#include "twinface/key_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "twinface/error.hpp"

namespace twinface {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json header(const char* kind, const ParamSet& p) {
  ordered_json j;
  j["version"] = 1;
  j["kind"] = kind;
  j["kappa"] = p.kappa;
  j["modulus_bits"] = p.modulus_bits;
  j["sigma"] = p.sigma;
  j["ell"] = p.ell;
  return j;
}

nlohmann::json parse_doc(const std::string& text, const char* expected_kind, ParamSet& params) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    if (j.at("version").get<int>() != 1) throw FormatError("key file: unsupported version");
    if (j.at("kind").get<std::string>() != expected_kind) {
      throw FormatError(std::string("key file: expected kind '") + expected_kind + "', got '" +
                        j.at("kind").get<std::string>() + "'");
    }
    params.kappa = j.at("kappa").get<std::size_t>();
    params.modulus_bits = j.at("modulus_bits").get<std::size_t>();
    params.sigma = j.at("sigma").get<std::size_t>();
    params.ell = j.at("ell").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("key file: ") + e.what());
  }
  return j;
}

BigInt hex_field(const nlohmann::json& j, const char* name) {
  try {
    return from_hex(j.at(name).get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("key file field '") + name + "': " + e.what());
  }
}

void require_same_params(const ParamSet& file, const ParamSet& key) {
  if (!(file == key)) {
    throw FormatError("key file parameters (" + describe(file) +
                      ") do not match the public key (" + describe(key) + ")");
  }
}

}  // namespace

std::string public_key_json(const ParamSet& params, const PublicKey& pk) {
  ordered_json j = header("pk", params);
  j["N"] = to_hex(pk.n());
  j["h"] = to_hex(pk.h());
  return j.dump();
}

std::string private_key_json(const ParamSet& params, const PrivateKey& sk) {
  ordered_json j = header("sk", params);
  j["alpha"] = to_hex(sk.alpha());
  return j.dump();
}

std::string share_json(const ParamSet& params, const KeyShare& share) {
  if (share.index == 1) {
    ordered_json j = header("share1", params);
    j["sk1"] = to_hex(share.exponent);
    return j.dump();
  }
  ordered_json j = header("share2", params);
  j["sk2"] = to_hex(share.exponent);
  return j.dump();
}

LoadedPublicKey parse_public_key(const std::string& text) {
  ParamSet params;
  auto j = parse_doc(text, "pk", params);
  params.validate();
  return LoadedPublicKey{params, PublicKey(hex_field(j, "N"), hex_field(j, "h"), params.sk_bits())};
}

PrivateKey parse_private_key(const std::string& text, const LoadedPublicKey& pk) {
  ParamSet params;
  auto j = parse_doc(text, "sk", params);
  require_same_params(params, pk.params);
  return PrivateKey(hex_field(j, "alpha"), pk.pk);
}

KeyShare parse_share(const std::string& text, const LoadedPublicKey& pk) {
  ParamSet params;
  nlohmann::json probe;
  try {
    probe = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("key file: ") + e.what());
  }
  std::string kind = probe.value("kind", "");
  if (kind == "share1") {
    auto j = parse_doc(text, "share1", params);
    require_same_params(params, pk.params);
    return KeyShare{1, hex_field(j, "sk1")};
  }
  auto j = parse_doc(text, "share2", params);
  require_same_params(params, pk.params);
  return KeyShare{2, hex_field(j, "sk2")};
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text, bool force) {
  if (!force && std::filesystem::exists(path)) {
    throw Error("refusing to overwrite " + path.string() + " (use --force)");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

LoadedPublicKey load_public_key(const std::filesystem::path& path) {
  return parse_public_key(read_text_file(path));
}

PrivateKey load_private_key(const std::filesystem::path& path, const LoadedPublicKey& pk) {
  return parse_private_key(read_text_file(path), pk);
}

KeyShare load_share(const std::filesystem::path& path, const LoadedPublicKey& pk) {
  return parse_share(read_text_file(path), pk);
}

void write_key_files(const std::filesystem::path& dir, const KeyMaterial& keys, bool force) {
  std::filesystem::create_directories(dir);
  const char* names[] = {"pk.json", "sk.json", "share1.json", "share2.json"};
  if (!force) {
    for (const char* n : names) {
      if (std::filesystem::exists(dir / n)) {
        throw Error("refusing to overwrite " + (dir / n).string() + " (use --force)");
      }
    }
  }
  write_text_file(dir / "pk.json", public_key_json(keys.params, keys.pk) + "\n", true);
  write_text_file(dir / "sk.json", private_key_json(keys.params, keys.sk) + "\n", true);
  write_text_file(dir / "share1.json", share_json(keys.params, keys.share(1)) + "\n", true);
  write_text_file(dir / "share2.json", share_json(keys.params, keys.share(2)) + "\n", true);
}

}  // namespace twinface
