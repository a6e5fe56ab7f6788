#include "twinface/params.hpp"

#include <algorithm>

#include "twinface/error.hpp"

namespace twinface {

void ParamSet::validate() const {
  auto fail = [this](const std::string& why) {
    throw ParameterError("invalid parameters (" + describe(*this) + "): " + why);
  };
  if (kappa == 0 || sigma == 0 || ell == 0) fail("kappa, sigma and ell must be positive");
  if (sk_bits() >= modulus_bits) fail("4*kappa must be below the modulus width");
  if ((modulus_bits - sk_bits()) / 2 < 3) fail("modulus too small to hold the p', q' cofactors");
  if (sigma + ell + 2 >= modulus_bits - 1) fail("sigma + ell + 2 must be below |N| - 1");
  if (2 * (sigma + 2) > modulus_bits || max_slots(*this, BatchKind::mul) == 0) {
    fail("at least one multiplication slot pair must fit");
  }
  if (ell >= sigma) fail("ell must be below sigma so a blinded slot stays under the radix");
}

ParamSet ParamSet::standard() { return ParamSet{128, 1024, 128, 40}; }

ParamSet ParamSet::toy() { return ParamSet{16, 128, 16, 8}; }

ParamSet ParamSet::toy_wide() { return ParamSet{16, 256, 48, 40}; }

ParamSet ParamSet::from_kappa(std::size_t kappa, std::size_t modulus_bits, std::size_t sigma,
                              std::size_t ell) {
  ParamSet p;
  p.kappa = kappa;
  p.modulus_bits = modulus_bits != 0 ? modulus_bits : 8 * kappa;
  p.sigma = sigma != 0 ? sigma : kappa;
  p.ell = ell != 0 ? ell : std::min<std::size_t>(40, p.sigma / 2);
  return p;
}

std::string describe(const ParamSet& p) {
  return "kappa=" + std::to_string(p.kappa) + " modulus_bits=" + std::to_string(p.modulus_bits) +
         " sigma=" + std::to_string(p.sigma) + " ell=" + std::to_string(p.ell);
}

PackingConstants PackingConstants::from(const ParamSet& p) {
  PackingConstants c;
  c.delta = pow2(p.ell);
  c.radix = pow2(p.sigma + 2);
  c.radix_bits = p.sigma + 3;
  return c;
}

std::size_t max_slots(const ParamSet& p, BatchKind kind) {
  std::size_t radix_bits = p.sigma + 3;
  return kind == BatchKind::square ? p.modulus_bits / radix_bits
                                   : p.modulus_bits / (2 * radix_bits);
}

}  // namespace twinface
