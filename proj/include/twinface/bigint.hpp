#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <string>
#include <string_view>

#include "twinface/random.hpp"

namespace twinface {

using BigInt = mpz_class;

// Lowercase, minimal-length hex without prefix; zero is "0". Negative values are rejected.
std::string to_hex(const BigInt& v);

// Strict inverse of to_hex: lowercase digits only, no prefix, no leading zeros.
BigInt from_hex(std::string_view hex);

std::size_t bit_length(const BigInt& v);

// Uniform in [0, 2^bits).
BigInt random_bits(RandomSource& rng, std::size_t bits);

// Uniform in [1, 2^bits).
BigInt random_nonzero_bits(RandomSource& rng, std::size_t bits);

// Uniform in [0, bound). bound must be positive.
BigInt random_below(RandomSource& rng, const BigInt& bound);

BigInt powm(const BigInt& base, const BigInt& exp, const BigInt& mod);

// Throws DomainError if v has no inverse.
BigInt invert(const BigInt& v, const BigInt& mod);

inline BigInt pow2(std::size_t bits) {
  BigInt r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, bits);
  return r;
}

// Non-negative residue.
inline BigInt mod(const BigInt& v, const BigInt& m) {
  BigInt r;
  mpz_mod(r.get_mpz_t(), v.get_mpz_t(), m.get_mpz_t());
  return r;
}

}  // namespace twinface
