#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "twinface/bigint.hpp"

namespace twinface {

// Signed integers in [-2^bound_bits, 2^bound_bits] map to Z_N as x -> x mod N.
BigInt encode_signed(const BigInt& x, const BigInt& n, std::size_t bound_bits);
BigInt encode_signed(std::int64_t x, const BigInt& n, std::size_t bound_bits);

// Inverse of encode_signed. Residues in the gap (2^bound_bits, N - 2^bound_bits)
// are a protocol fault and raise RangeError.
BigInt decode_signed(const BigInt& m, const BigInt& n, std::size_t bound_bits);
std::int64_t decode_signed_i64(const BigInt& m, const BigInt& n, std::size_t bound_bits);

// Centered lift without a bound check: m <= N/2 -> m, otherwise m - N.
BigInt centered(const BigInt& m, const BigInt& n);

struct QuantizationSpec {
  std::int64_t scale = 10000;
};

// round(f * scale), halves away from zero. f must lie in [0, 1].
std::int64_t quantize(double f, const QuantizationSpec& spec = {});

// Feature-vector CSV: header "id,v1,...,vn", one row per vector, values in [0, 1].
struct FeatureTable {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> values;

  std::size_t dimension() const { return values.empty() ? 0 : values.front().size(); }
};

FeatureTable parse_feature_csv(const std::string& text);
FeatureTable load_feature_csv(const std::filesystem::path& path);
std::string format_feature_csv(const FeatureTable& table);

}  // namespace twinface
