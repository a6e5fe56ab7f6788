#pragma once

// Leak audit over daemon transcripts and logs.
//
// Frames: payload strings must be ciphertext-sized hex (at least N) except for
// a few named text fields, numbers may only be the version and slot count,
// and nothing may equal a secret value. Logs: no alphanumeric token may equal
// a secret value. Key material may not appear anywhere in either base.

#include <cctype>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinface/bigint.hpp"

namespace fixtures {

struct Secrets {
  std::set<std::string> hex;
  std::set<std::string> dec;
  std::vector<twinface::BigInt> keys;

  void add_value(const twinface::BigInt& v) {
    hex.insert(twinface::to_hex(v));
    dec.insert(v.get_str());
  }
  void add_value(std::int64_t v) { add_value(twinface::BigInt(static_cast<long>(v))); }
};

struct AuditResult {
  std::size_t frames = 0;
  std::size_t log_lines = 0;
  std::vector<std::string> violations;
};

inline AuditResult audit(const std::string& transcripts, const std::string& logs,
                         const Secrets& secrets, const twinface::BigInt& n) {
  static const std::set<std::string> text_fields{"request_id", "message", "role"};
  AuditResult r;
  auto flag = [&r](std::string what) {
    if (r.violations.size() < 50) r.violations.push_back(std::move(what));
  };

  std::istringstream in(transcripts);
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find(' ');
    auto second = line.find(' ', first + 1);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line.substr(second + 1));
    } catch (const std::exception&) {
      flag("unparseable transcript line");
      continue;
    }
    ++r.frames;
    // (key of the enclosing object member, value)
    std::vector<std::pair<std::string, const nlohmann::json*>> stack{{"", &j.at("payload")}};
    while (!stack.empty()) {
      auto [key, cur] = stack.back();
      stack.pop_back();
      if (cur->is_object()) {
        for (auto it = cur->begin(); it != cur->end(); ++it) stack.emplace_back(it.key(), &it.value());
      } else if (cur->is_array()) {
        for (const auto& c : *cur) stack.emplace_back(key, &c);
      } else if (cur->is_string()) {
        const auto& s = cur->get_ref<const std::string&>();
        if (secrets.hex.count(s) || secrets.dec.count(s)) flag("frame value " + key + "=" + s);
        if (text_fields.count(key)) continue;
        twinface::BigInt v;
        // "masked" is gamma + R mod N, below N by construction.
        if (v.set_str(s, 16) != 0) {
          flag("non-hex frame field " + key);
        } else if (key != "masked" && v < n) {
          flag("frame field " + key + " is not ciphertext-sized");
        }
      } else if (cur->is_number()) {
        if (key != "s") flag("frame number in field " + key);
      } else if (!cur->is_null()) {
        flag("unexpected frame value in field " + key);
      }
    }
  }

  std::istringstream lin(logs);
  while (std::getline(lin, line)) {
    ++r.log_lines;
    std::string rest = line.substr(std::min(line.size(), line.find(' ') + 1));
    std::string tok;
    auto flush = [&] {
      if (!tok.empty() && (secrets.dec.count(tok) || secrets.hex.count(tok))) flag("log token " + tok);
      tok.clear();
    };
    for (char ch : rest) {
      if (std::isalnum(static_cast<unsigned char>(ch))) {
        tok.push_back(ch);
      } else {
        flush();
      }
    }
    flush();
  }

  for (const auto& k : secrets.keys) {
    for (const std::string& form : {twinface::to_hex(k), k.get_str()}) {
      if (transcripts.find(form) != std::string::npos) flag("key material in transcript");
      if (logs.find(form) != std::string::npos) flag("key material in log");
    }
  }
  return r;
}

}  // namespace fixtures
