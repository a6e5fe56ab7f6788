#pragma once

// Offline randomness. Each entry bundles the random values one protocol
// invocation consumes together with their precomputed encryptions, so the
// online phase only does the data-dependent work.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "twinface/paillier.hpp"

namespace twinface {

// One BatchSquare slot: r, Enc(r), Enc(-r^2), Enc(2 delta r).
struct SquareBlind {
  BigInt r;
  Ciphertext enc_r;
  Ciphertext enc_neg_r_sq;
  Ciphertext enc_two_delta_r;
};

// One BatchSMUL slot pair: r1, r2, Enc(r1), Enc(r2), Enc(-r1 r2), Enc(delta (r1 + r2)).
struct MulBlind {
  BigInt r1;
  BigInt r2;
  Ciphertext enc_r1;
  Ciphertext enc_r2;
  Ciphertext enc_neg_r1r2;
  Ciphertext enc_delta_sum;
};

// One 2-SMIN initiator draw: coin pi, r1 (sigma bits, nonzero),
// r2 in (floor(N/2) - r1, floor(N/2)], and Enc(r1 + r2) for pi = 0 or Enc(r2) for pi = 1.
struct SminBlind {
  int pi = 0;
  BigInt r1;
  BigInt r2;
  Ciphertext enc_offset;
};

// Enc(0)^r with r of ell bits, nonzero; multiplying by it refreshes a ciphertext.
struct RefreshBlind {
  Ciphertext zero_pow_r;
};

struct BlindFactory {
  const PublicKey* pk;
  const ParamSet* params;
  RandomSource* rng;

  SquareBlind square() const;
  MulBlind mul() const;
  SminBlind smin(std::optional<int> forced_coin = std::nullopt) const;
  RefreshBlind refresh() const;
};

enum class PoolKind { square, mul, smin, refresh };

struct PoolTargets {
  std::size_t square = 0;
  std::size_t mul = 0;
  std::size_t smin = 0;
  std::size_t refresh = 0;
  // Background refill starts when a queue drops below target / low_water_divisor.
  std::size_t low_water_divisor = 4;

  std::size_t of(PoolKind k) const;
  // Entries for `recognitions` requests over a shard of `rows` x `dim` cells.
  static PoolTargets for_recognitions(std::size_t recognitions, std::size_t rows,
                                      std::size_t dim);
};

class RandomnessPool {
 public:
  RandomnessPool(const PublicKey& pk, const ParamSet& params, RandomSource& rng,
                 PoolTargets targets);
  ~RandomnessPool();
  RandomnessPool(const RandomnessPool&) = delete;
  RandomnessPool& operator=(const RandomnessPool&) = delete;

  // Tops every queue up to its target (OpenMP-parallel generation).
  void fill();
  // Fills one kind to exactly `count` entries.
  void fill(PoolKind kind, std::size_t count);

  // nullopt when empty; callers then generate online.
  std::optional<SquareBlind> draw_square();
  std::optional<MulBlind> draw_mul();
  std::optional<SminBlind> draw_smin();
  std::optional<RefreshBlind> draw_refresh();

  std::size_t size(PoolKind kind) const;

  // Background thread that refills below the low-water mark.
  void start_background();
  void stop_background();

  // Serial numbers of every drawn entry, in draw order.
  std::vector<std::uint64_t> drawn_serials() const;

 private:
  template <typename T>
  struct Queue {
    std::deque<std::pair<std::uint64_t, T>> items;
  };

  template <typename T>
  std::optional<T> take(Queue<T>& q);
  void generate(PoolKind kind, std::size_t count);
  bool below_low_water() const;
  void background_loop();

  PublicKey pk_;
  ParamSet params_;
  RandomSource& rng_;
  PoolTargets targets_;

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  Queue<SquareBlind> square_;
  Queue<MulBlind> mul_;
  Queue<SminBlind> smin_;
  Queue<RefreshBlind> refresh_;
  std::uint64_t next_serial_ = 0;
  std::vector<std::uint64_t> drawn_;

  std::atomic<bool> stop_{false};
  std::thread worker_;
};

}  // namespace twinface
