#pragma once

// (2,2)-threshold Paillier cryptosystem.
//
// Ciphertexts live in Z*_{N^2}. The public key is (N, h) with h = -y^{2*beta} mod N;
// encryption is (1+N)^m * (h^r mod N)^N mod N^2 with r of 4*kappa bits. The
// private key alpha = p*q decrypts alone; the shares sk1, sk2 satisfy
// sk1 + sk2 = 0 (mod 2*alpha) and sk1 + sk2 = 1 (mod N), so the product of the
// two partial decryptions c^sk1 * c^sk2 = (1+N)^m.

#include <cstddef>
#include <memory>

#include "twinface/bigint.hpp"
#include "twinface/params.hpp"
#include "twinface/random.hpp"

namespace twinface {

struct ModulusComponents {
  BigInt N, P, Q, p, q, p_prime, q_prime;
};

// Probabilistic primality with error <= 2^-128.
bool is_probable_prime(const BigInt& v);

// Generates N = P*Q with P = 2pp'+1, Q = 2qq'+1. Each round draws a fresh
// (p, p') or (q, q') pair; throws ResourceExhausted when the budget runs out.
ModulusComponents ngen(const ParamSet& params, RandomSource& rng,
                       std::size_t attempt_budget = 10000);

class FixedBaseTable;

class PublicKey {
 public:
  PublicKey(BigInt n, BigInt h, std::size_t randomness_bits);

  const BigInt& n() const { return n_; }
  const BigInt& n_squared() const { return n_sq_; }
  const BigInt& h() const { return h_; }
  // Bit width of the encryption randomness r, i.e. 4*kappa.
  std::size_t randomness_bits() const { return r_bits_; }
  BigInt half_n() const { return n_ / 2; }

  // (h^N mod N^2)^r mod N^2, equal to (h^r mod N)^N mod N^2.
  BigInt blinding_factor(const BigInt& r) const;

  bool operator==(const PublicKey& o) const { return n_ == o.n_ && h_ == o.h_; }

 private:
  BigInt n_;
  BigInt n_sq_;
  BigInt h_;
  std::size_t r_bits_;
  std::shared_ptr<const FixedBaseTable> table_;
};

struct Ciphertext {
  BigInt value;
  bool operator==(const Ciphertext&) const = default;
};

struct PartialCiphertext {
  BigInt value;
  int share_index = 0;
};

class PrivateKey {
 public:
  PrivateKey(BigInt alpha, const PublicKey& pk);

  const BigInt& alpha() const { return alpha_; }
  const BigInt& n() const { return n_; }
  const BigInt& n_squared() const { return n_sq_; }
  const BigInt& two_alpha_inverse() const { return inv_; }

 private:
  BigInt alpha_;
  BigInt n_;
  BigInt n_sq_;
  BigInt inv_;  // (2*alpha)^-1 mod N
};

struct ThresholdShares {
  BigInt sk1;
  BigInt sk2;
  BigInt eta;
};

// One side of the threshold split, as held by a server.
struct KeyShare {
  int index = 0;  // 1 or 2
  BigInt exponent;
};

struct KeyMaterial {
  ParamSet params;
  PublicKey pk;
  PrivateKey sk;
  ThresholdShares shares;

  KeyShare share(int index) const;
};

KeyMaterial keygen(const ParamSet& params, RandomSource& rng);

// KeyGen on caller-provided components (after re-validating them).
KeyMaterial keygen_from(const ParamSet& params, const ModulusComponents& mc, RandomSource& rng);

// Throws IntegrityError unless the components meet every structural invariant.
void verify_components(const ParamSet& params, const ModulusComponents& mc);

// Throws DomainError unless 0 < value < N^2 and gcd(value, N) = 1.
void validate(const PublicKey& pk, const Ciphertext& c);

Ciphertext encrypt(const PublicKey& pk, const BigInt& m, RandomSource& rng);
// Encryption with explicit randomness r in [1, 2^(4 kappa)).
Ciphertext encrypt_with(const PublicKey& pk, const BigInt& m, const BigInt& r);

BigInt decrypt(const PrivateKey& sk, const Ciphertext& c);

PartialCiphertext partial_decrypt(const PublicKey& pk, const KeyShare& share, const Ciphertext& c);
BigInt threshold_decrypt(const PublicKey& pk, const PartialCiphertext& m1,
                         const PartialCiphertext& m2);

Ciphertext hom_add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b);
// c^k for k in [0, N).
Ciphertext hom_scalar_mul(const PublicKey& pk, const Ciphertext& c, const BigInt& k);
// c^-1 mod N^2; decrypts to -m like c^(N-1), at the cost of one inversion.
Ciphertext hom_negate(const PublicKey& pk, const Ciphertext& c);
Ciphertext hom_sub(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b);
// Scalar of either sign: c^k for k >= 0, (c^|k|)^-1 otherwise.
Ciphertext hom_scale(const PublicKey& pk, const Ciphertext& c, const BigInt& k);

// c * Enc(0)^r with r > 0.
Ciphertext refresh(const PublicKey& pk, const Ciphertext& c, const BigInt& r, RandomSource& rng);

}  // namespace twinface
