#pragma once

#include <cstddef>
#include <string>

#include "twinface/bigint.hpp"

namespace twinface {

// Security and domain parameters shared by every party.
//
// Plaintexts handled by the protocols lie in [-2^ell, 2^ell]; blinding values
// are sigma bits wide; the private key alpha = p*q is 4*kappa bits.
struct ParamSet {
  std::size_t kappa = 128;
  std::size_t modulus_bits = 1024;
  std::size_t sigma = 128;
  std::size_t ell = 40;

  std::size_t sk_bits() const { return 4 * kappa; }

  // Bit width of p' and q' in P = 2pp'+1, Q = 2qq'+1.
  std::size_t cofactor_bits() const { return (modulus_bits - sk_bits()) / 2 - 1; }

  // Throws ParameterError naming the first violated constraint.
  void validate() const;

  // kappa=128, |N|=1024, sigma=128, ell=40.
  static ParamSet standard();
  // kappa=16, |N|=128, sigma=16, ell=8. Fast, but too narrow for 512-dim features.
  static ParamSet toy();
  // Toy-size keys with a plaintext domain wide enough for full-scale recognition.
  static ParamSet toy_wide();

  // Fills unspecified fields from kappa: |N| = 8*kappa, sigma = kappa, ell = min(40, sigma/2).
  static ParamSet from_kappa(std::size_t kappa, std::size_t modulus_bits = 0, std::size_t sigma = 0,
                             std::size_t ell = 0);

  bool operator==(const ParamSet&) const = default;
};

std::string describe(const ParamSet& p);

// Offset and radix used when several blinded values share one plaintext.
struct PackingConstants {
  BigInt delta;        // 2^ell
  BigInt radix;        // L = 2^(sigma+2)
  std::size_t radix_bits = 0;  // |L| = sigma + 3

  static PackingConstants from(const ParamSet& p);
};

enum class BatchKind { mul, square };

// floor(|N| / 2|L|) for multiplication pairs, floor(|N| / |L|) for squares.
std::size_t max_slots(const ParamSet& p, BatchKind kind);

}  // namespace twinface
