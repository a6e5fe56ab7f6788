#include "twinface/party.hpp"

#include "twinface/encoding.hpp"

namespace twinface {

Party::Party(ParamSet params, PublicKey pk, KeyShare share, RandomSource& rng,
             std::shared_ptr<RandomnessPool> pool)
    : params_(params),
      pk_(std::move(pk)),
      share_(std::move(share)),
      rng_(&rng),
      pool_(std::move(pool)),
      constants_(PackingConstants::from(params)) {
  params_.validate();
  delta_ct_ = twinface::encrypt(pk_, constants_.delta, rng);
}

Ciphertext Party::encrypt(const BigInt& m) const { return twinface::encrypt(pk_, m, *rng_); }

Ciphertext Party::encrypt_signed(const BigInt& x) const {
  return twinface::encrypt(pk_, mod(x, pk_.n()), *rng_);
}

SquareBlind Party::square_blind() const {
  if (pool_) {
    if (auto b = pool_->draw_square()) return std::move(*b);
  }
  return factory().square();
}

MulBlind Party::mul_blind() const {
  if (pool_) {
    if (auto b = pool_->draw_mul()) return std::move(*b);
  }
  return factory().mul();
}

SminBlind Party::smin_blind(std::optional<int> forced_coin) const {
  if (pool_ && !forced_coin) {
    if (auto b = pool_->draw_smin()) return std::move(*b);
  }
  return factory().smin(forced_coin);
}

RefreshBlind Party::refresh_blind() const {
  if (pool_) {
    if (auto b = pool_->draw_refresh()) return std::move(*b);
  }
  return factory().refresh();
}

PartialCiphertext Party::partial(const Ciphertext& c) const {
  return partial_decrypt(pk_, share_, c);
}

}  // namespace twinface
