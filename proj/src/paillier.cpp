#include "twinface/paillier.hpp"

#include <vector>

#include "twinface/error.hpp"

namespace twinface {

// Windowed fixed-base exponentiation: rows[i][j] = base^(j * 2^(w*i)) mod m.
class FixedBaseTable {
 public:
  static constexpr std::size_t kWindow = 6;

  FixedBaseTable(const BigInt& base, const BigInt& modulus, std::size_t max_exp_bits)
      : modulus_(modulus), max_bits_(max_exp_bits) {
    std::size_t windows = (max_exp_bits + kWindow - 1) / kWindow;
    rows_.resize(windows);
    BigInt row_base = base;
    for (auto& row : rows_) {
      row.resize(std::size_t{1} << kWindow);
      row[0] = 1;
      for (std::size_t j = 1; j < row.size(); ++j) {
        row[j] = row[j - 1] * row_base;
        mpz_mod(row[j].get_mpz_t(), row[j].get_mpz_t(), modulus_.get_mpz_t());
      }
      row_base = row.back() * row_base;
      mpz_mod(row_base.get_mpz_t(), row_base.get_mpz_t(), modulus_.get_mpz_t());
    }
  }

  BigInt pow(const BigInt& exp) const {
    if (bit_length(exp) > max_bits_) {
      return powm(rows_[0][1], exp, modulus_);
    }
    BigInt acc = 1;
    std::size_t bits = bit_length(exp);
    for (std::size_t i = 0; i * kWindow < bits; ++i) {
      unsigned digit = 0;
      for (std::size_t b = 0; b < kWindow; ++b) {
        if (mpz_tstbit(exp.get_mpz_t(), i * kWindow + b)) digit |= 1U << b;
      }
      if (digit == 0) continue;
      acc *= rows_[i][digit];
      mpz_mod(acc.get_mpz_t(), acc.get_mpz_t(), modulus_.get_mpz_t());
    }
    return acc;
  }

 private:
  BigInt modulus_;
  std::size_t max_bits_;
  std::vector<std::vector<BigInt>> rows_;
};

namespace {

BigInt mulmod(const BigInt& a, const BigInt& b, const BigInt& m) {
  BigInt r = a * b;
  mpz_mod(r.get_mpz_t(), r.get_mpz_t(), m.get_mpz_t());
  return r;
}

bool coprime(const BigInt& a, const BigInt& b) {
  BigInt g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g == 1;
}

// Odd prime of exactly `bits` bits whose top two bits are set, so the product
// of two such primes has exactly 2*bits bits.
BigInt random_prime(RandomSource& rng, std::size_t bits) {
  for (;;) {
    BigInt c = random_bits(rng, bits);
    mpz_setbit(c.get_mpz_t(), bits - 1);
    if (bits >= 2) mpz_setbit(c.get_mpz_t(), bits - 2);
    mpz_setbit(c.get_mpz_t(), 0);
    if (is_probable_prime(c)) return c;
  }
}

BigInt random_odd(RandomSource& rng, std::size_t bits) {
  BigInt c = random_bits(rng, bits);
  mpz_setbit(c.get_mpz_t(), bits - 1);
  mpz_setbit(c.get_mpz_t(), 0);
  return c;
}

struct SafeFactor {
  BigInt prime;     // P or Q
  BigInt small;     // p or q
  BigInt cofactor;  // p' or q'
};

SafeFactor find_factor(const ParamSet& params, RandomSource& rng, std::size_t& budget) {
  while (budget > 0) {
    --budget;
    SafeFactor f;
    f.small = random_prime(rng, params.sk_bits() / 2);
    f.cofactor = random_odd(rng, params.cofactor_bits());
    f.prime = 2 * f.small * f.cofactor + 1;
    if (is_probable_prime(f.prime)) return f;
  }
  throw ResourceExhausted("ngen: attempt budget exhausted before finding a valid (P, Q)");
}

}  // namespace

bool is_probable_prime(const BigInt& v) {
  // 64 witness rounds bound the error by 4^-64 = 2^-128.
  return mpz_probab_prime_p(v.get_mpz_t(), 64) != 0;
}

ModulusComponents ngen(const ParamSet& params, RandomSource& rng, std::size_t attempt_budget) {
  params.validate();
  std::size_t budget = attempt_budget;
  for (;;) {
    SafeFactor a = find_factor(params, rng, budget);
    SafeFactor b = find_factor(params, rng, budget);
    const BigInt* parts[] = {&a.small, &b.small, &a.cofactor, &b.cofactor};
    bool ok = a.prime != b.prime;
    for (int i = 0; i < 4 && ok; ++i) {
      for (int j = i + 1; j < 4 && ok; ++j) ok = coprime(*parts[i], *parts[j]);
    }
    if (ok) {
      ModulusComponents mc;
      mc.P = a.prime;
      mc.Q = b.prime;
      mc.p = a.small;
      mc.q = b.small;
      mc.p_prime = a.cofactor;
      mc.q_prime = b.cofactor;
      mc.N = mc.P * mc.Q;
      return mc;
    }
    if (budget == 0) {
      throw ResourceExhausted("ngen: attempt budget exhausted before finding a valid (P, Q)");
    }
  }
}

void verify_components(const ParamSet& params, const ModulusComponents& mc) {
  auto require = [](bool cond, const char* what) {
    if (!cond) throw IntegrityError(std::string("modulus components: ") + what);
  };
  require(mc.P == 2 * mc.p * mc.p_prime + 1, "P != 2pp'+1");
  require(mc.Q == 2 * mc.q * mc.q_prime + 1, "Q != 2qq'+1");
  require(mc.N == mc.P * mc.Q, "N != PQ");
  require(is_probable_prime(mc.P) && is_probable_prime(mc.Q), "P or Q composite");
  require(is_probable_prime(mc.p) && is_probable_prime(mc.q), "p or q composite");
  require(mpz_odd_p(mc.p.get_mpz_t()) && mpz_odd_p(mc.q.get_mpz_t()), "p or q even");
  require(mpz_odd_p(mc.p_prime.get_mpz_t()) && mpz_odd_p(mc.q_prime.get_mpz_t()),
          "p' or q' even");
  const BigInt* parts[] = {&mc.p, &mc.q, &mc.p_prime, &mc.q_prime};
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) require(coprime(*parts[i], *parts[j]), "not pairwise co-prime");
  }
  require(bit_length(mc.p) == params.sk_bits() / 2 && bit_length(mc.q) == params.sk_bits() / 2,
          "p, q not l/2 bits");
}

PublicKey::PublicKey(BigInt n, BigInt h, std::size_t randomness_bits)
    : n_(std::move(n)), n_sq_(n_ * n_), h_(std::move(h)), r_bits_(randomness_bits) {
  if (h_ <= 1 || h_ >= n_) throw DomainError("public key: h outside (1, N)");
  BigInt g = powm(h_, n_, n_sq_);
  table_ = std::make_shared<const FixedBaseTable>(g, n_sq_, r_bits_);
}

BigInt PublicKey::blinding_factor(const BigInt& r) const { return table_->pow(r); }

PrivateKey::PrivateKey(BigInt alpha, const PublicKey& pk)
    : alpha_(std::move(alpha)), n_(pk.n()), n_sq_(pk.n_squared()) {
  inv_ = invert(2 * alpha_, n_);
}

KeyShare KeyMaterial::share(int index) const {
  if (index == 1) return KeyShare{1, shares.sk1};
  if (index == 2) return KeyShare{2, shares.sk2};
  throw DomainError("share index must be 1 or 2");
}

KeyMaterial keygen_from(const ParamSet& params, const ModulusComponents& mc, RandomSource& rng) {
  verify_components(params, mc);
  BigInt alpha = mc.p * mc.q;
  BigInt numerator = (mc.P - 1) * (mc.Q - 1);
  BigInt denominator = 4 * alpha;
  if (!mpz_divisible_p(numerator.get_mpz_t(), denominator.get_mpz_t())) {
    throw IntegrityError("keygen: beta division is inexact");
  }
  BigInt beta = numerator / denominator;

  BigInt y;
  for (;;) {
    y = random_below(rng, mc.N - 2) + 2;  // [2, N-1]
    if (coprime(y, mc.N)) break;
  }
  BigInt h = mc.N - powm(y, 2 * beta, mc.N);

  PublicKey pk(mc.N, h, params.sk_bits());
  PrivateKey sk(alpha, pk);

  BigInt two_alpha = 2 * alpha;
  BigInt sk1 = random_bits(rng, params.sigma);
  mpz_setbit(sk1.get_mpz_t(), params.sigma - 1);
  BigInt base = sk.two_alpha_inverse() * two_alpha - sk1;
  BigInt step = two_alpha * mc.N;
  BigInt eta = 0;
  if (base <= 0) {
    // Smallest eta with base + eta*step > 0.
    BigInt deficit = -base;
    mpz_fdiv_q(eta.get_mpz_t(), deficit.get_mpz_t(), step.get_mpz_t());
    eta += 1;
  }
  BigInt sk2 = base + eta * step;

  return KeyMaterial{params, std::move(pk), std::move(sk), ThresholdShares{sk1, sk2, eta}};
}

KeyMaterial keygen(const ParamSet& params, RandomSource& rng) {
  return keygen_from(params, ngen(params, rng), rng);
}

void validate(const PublicKey& pk, const Ciphertext& c) {
  if (sgn(c.value) <= 0 || c.value >= pk.n_squared()) {
    throw DomainError("ciphertext outside (0, N^2)");
  }
  if (!coprime(c.value, pk.n())) throw DomainError("ciphertext not a unit mod N");
}

Ciphertext encrypt_with(const PublicKey& pk, const BigInt& m, const BigInt& r) {
  if (sgn(m) < 0 || m >= pk.n()) throw DomainError("encrypt: plaintext outside [0, N)");
  // (1+N)^m = 1 + mN (mod N^2)
  BigInt gm = 1 + m * pk.n();
  return Ciphertext{mulmod(gm, pk.blinding_factor(r), pk.n_squared())};
}

Ciphertext encrypt(const PublicKey& pk, const BigInt& m, RandomSource& rng) {
  if (sgn(m) < 0 || m >= pk.n()) throw DomainError("encrypt: plaintext outside [0, N)");
  return encrypt_with(pk, m, random_nonzero_bits(rng, pk.randomness_bits()));
}

BigInt decrypt(const PrivateKey& sk, const Ciphertext& c) {
  BigInt u = powm(c.value, 2 * sk.alpha(), sk.n_squared()) - 1;
  if (!mpz_divisible_p(u.get_mpz_t(), sk.n().get_mpz_t())) {
    throw IntegrityError("decrypt: inexact division by N");
  }
  BigInt l = mod(u / sk.n(), sk.n());
  return mulmod(l, sk.two_alpha_inverse(), sk.n());
}

PartialCiphertext partial_decrypt(const PublicKey& pk, const KeyShare& share, const Ciphertext& c) {
  if (share.index != 1 && share.index != 2) throw DomainError("share index must be 1 or 2");
  return PartialCiphertext{powm(c.value, share.exponent, pk.n_squared()), share.index};
}

BigInt threshold_decrypt(const PublicKey& pk, const PartialCiphertext& m1,
                         const PartialCiphertext& m2) {
  if (m1.share_index == m2.share_index) {
    throw IntegrityError("threshold_decrypt: both partials come from the same share");
  }
  BigInt u = mulmod(m1.value, m2.value, pk.n_squared()) - 1;
  if (!mpz_divisible_p(u.get_mpz_t(), pk.n().get_mpz_t())) {
    throw IntegrityError("threshold_decrypt: inexact division by N");
  }
  return mod(u / pk.n(), pk.n());
}

Ciphertext hom_add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b) {
  return Ciphertext{mulmod(a.value, b.value, pk.n_squared())};
}

Ciphertext hom_scalar_mul(const PublicKey& pk, const Ciphertext& c, const BigInt& k) {
  if (sgn(k) < 0 || k >= pk.n()) throw DomainError("hom_scalar_mul: scalar outside [0, N)");
  return Ciphertext{powm(c.value, k, pk.n_squared())};
}

Ciphertext hom_negate(const PublicKey& pk, const Ciphertext& c) {
  return Ciphertext{invert(c.value, pk.n_squared())};
}

Ciphertext hom_sub(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b) {
  return hom_add(pk, a, hom_negate(pk, b));
}

Ciphertext hom_scale(const PublicKey& pk, const Ciphertext& c, const BigInt& k) {
  if (sgn(k) >= 0) return Ciphertext{powm(c.value, k, pk.n_squared())};
  BigInt magnitude = -k;
  return hom_negate(pk, Ciphertext{powm(c.value, magnitude, pk.n_squared())});
}

Ciphertext refresh(const PublicKey& pk, const Ciphertext& c, const BigInt& r, RandomSource& rng) {
  if (sgn(r) <= 0) throw DomainError("refresh: r must be positive");
  Ciphertext zero = encrypt(pk, 0, rng);
  return hom_add(pk, c, Ciphertext{powm(zero.value, r, pk.n_squared())});
}

}  // namespace twinface
