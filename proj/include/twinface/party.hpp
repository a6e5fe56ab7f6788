#pragma once

#include <memory>
#include <optional>

#include "twinface/paillier.hpp"
#include "twinface/pool.hpp"

namespace twinface {

// Everything one server needs to run its side of the two-party protocols.
class Party {
 public:
  Party(ParamSet params, PublicKey pk, KeyShare share, RandomSource& rng,
        std::shared_ptr<RandomnessPool> pool = nullptr);

  const ParamSet& params() const { return params_; }
  const PublicKey& pk() const { return pk_; }
  const KeyShare& share() const { return share_; }
  int peer_share_index() const { return 3 - share_.index; }
  const PackingConstants& constants() const { return constants_; }
  RandomSource& rng() const { return *rng_; }
  const std::shared_ptr<RandomnessPool>& pool() const { return pool_; }
  void set_pool(std::shared_ptr<RandomnessPool> pool) { pool_ = std::move(pool); }

  // Enc(delta); delta is public so one encryption is shared by every blinding.
  const Ciphertext& delta_ct() const { return delta_ct_; }

  Ciphertext encrypt(const BigInt& m) const;
  Ciphertext encrypt_signed(const BigInt& x) const;

  SquareBlind square_blind() const;
  MulBlind mul_blind() const;
  SminBlind smin_blind(std::optional<int> forced_coin = std::nullopt) const;
  RefreshBlind refresh_blind() const;

  PartialCiphertext partial(const Ciphertext& c) const;

 private:
  BlindFactory factory() const { return BlindFactory{&pk_, &params_, rng_}; }

  ParamSet params_;
  PublicKey pk_;
  KeyShare share_;
  RandomSource* rng_;
  std::shared_ptr<RandomnessPool> pool_;
  PackingConstants constants_;
  Ciphertext delta_ct_;
};

}  // namespace twinface
