#include "twinface/bigint.hpp"

#include <vector>

#include "twinface/error.hpp"

namespace twinface {

std::string to_hex(const BigInt& v) {
  if (sgn(v) < 0) throw DomainError("to_hex: negative value");
  return v.get_str(16);
}

BigInt from_hex(std::string_view hex) {
  if (hex.empty()) throw FormatError("hex: empty string");
  if (hex.size() > 1 && hex.front() == '0') throw FormatError("hex: leading zero");
  for (char ch : hex) {
    bool ok = (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f');
    if (!ok) throw FormatError("hex: invalid digit '" + std::string(1, ch) + "'");
  }
  return BigInt(std::string(hex), 16);
}

std::size_t bit_length(const BigInt& v) {
  if (v == 0) return 0;
  return mpz_sizeinbase(v.get_mpz_t(), 2);
}

BigInt random_bits(RandomSource& rng, std::size_t bits) {
  if (bits == 0) return 0;
  std::vector<std::byte> buf((bits + 7) / 8);
  rng.fill(buf);
  std::size_t excess = buf.size() * 8 - bits;
  buf[0] &= static_cast<std::byte>(0xFFU >> excess);
  BigInt r;
  mpz_import(r.get_mpz_t(), buf.size(), 1, 1, 1, 0, buf.data());
  return r;
}

BigInt random_nonzero_bits(RandomSource& rng, std::size_t bits) {
  if (bits == 0) throw DomainError("random_nonzero_bits: zero width");
  for (;;) {
    BigInt r = random_bits(rng, bits);
    if (r != 0) return r;
  }
}

BigInt random_below(RandomSource& rng, const BigInt& bound) {
  if (sgn(bound) <= 0) throw DomainError("random_below: non-positive bound");
  std::size_t bits = bit_length(bound);
  for (;;) {
    BigInt r = random_bits(rng, bits);
    if (r < bound) return r;
  }
}

BigInt powm(const BigInt& base, const BigInt& exp, const BigInt& mod) {
  BigInt r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return r;
}

BigInt invert(const BigInt& v, const BigInt& mod) {
  BigInt r;
  if (mpz_invert(r.get_mpz_t(), v.get_mpz_t(), mod.get_mpz_t()) == 0) {
    throw DomainError("invert: value not invertible");
  }
  return r;
}

}  // namespace twinface
