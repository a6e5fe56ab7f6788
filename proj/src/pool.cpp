#include "twinface/pool.hpp"

#include <exception>

#include "twinface/error.hpp"

namespace twinface {

namespace {

BigInt mod_n(const BigInt& v, const PublicKey& pk) { return mod(v, pk.n()); }

}  // namespace

SquareBlind BlindFactory::square() const {
  BigInt delta = pow2(params->ell);
  SquareBlind b;
  b.r = random_bits(*rng, params->sigma);
  b.enc_r = encrypt(*pk, b.r, *rng);
  b.enc_neg_r_sq = encrypt(*pk, mod_n(-(b.r * b.r), *pk), *rng);
  b.enc_two_delta_r = encrypt(*pk, mod_n(2 * delta * b.r, *pk), *rng);
  return b;
}

MulBlind BlindFactory::mul() const {
  BigInt delta = pow2(params->ell);
  MulBlind b;
  b.r1 = random_bits(*rng, params->sigma);
  b.r2 = random_bits(*rng, params->sigma);
  b.enc_r1 = encrypt(*pk, b.r1, *rng);
  b.enc_r2 = encrypt(*pk, b.r2, *rng);
  b.enc_neg_r1r2 = encrypt(*pk, mod_n(-(b.r1 * b.r2), *pk), *rng);
  b.enc_delta_sum = encrypt(*pk, mod_n(delta * (b.r1 + b.r2), *pk), *rng);
  return b;
}

SminBlind BlindFactory::smin(std::optional<int> forced_coin) const {
  SminBlind b;
  b.pi = forced_coin ? (*forced_coin != 0 ? 1 : 0) : (rng->coin() ? 1 : 0);
  b.r1 = random_nonzero_bits(*rng, params->sigma);
  BigInt half = pk->half_n();
  b.r2 = half - random_below(*rng, b.r1);  // (half - r1, half]
  b.enc_offset = encrypt(*pk, b.pi == 0 ? mod_n(b.r1 + b.r2, *pk) : b.r2, *rng);
  return b;
}

RefreshBlind BlindFactory::refresh() const {
  BigInt r = random_nonzero_bits(*rng, params->ell);
  Ciphertext zero = encrypt(*pk, 0, *rng);
  return RefreshBlind{Ciphertext{powm(zero.value, r, pk->n_squared())}};
}

std::size_t PoolTargets::of(PoolKind k) const {
  switch (k) {
    case PoolKind::square: return square;
    case PoolKind::mul: return mul;
    case PoolKind::smin: return smin;
    case PoolKind::refresh: return refresh;
  }
  return 0;
}

PoolTargets PoolTargets::for_recognitions(std::size_t recognitions, std::size_t rows,
                                          std::size_t dim) {
  PoolTargets t;
  t.square = recognitions * rows * dim;
  // Own-shard fold plus the final three-way minimum.
  t.smin = recognitions * (rows + 2);
  t.refresh = recognitions * (rows + 2);
  t.mul = 0;
  return t;
}

RandomnessPool::RandomnessPool(const PublicKey& pk, const ParamSet& params, RandomSource& rng,
                               PoolTargets targets)
    : pk_(pk), params_(params), rng_(rng), targets_(targets) {}

RandomnessPool::~RandomnessPool() { stop_background(); }

template <typename T>
std::optional<T> RandomnessPool::take(Queue<T>& q) {
  std::optional<T> out;
  {
    std::lock_guard lock(mutex_);
    if (q.items.empty()) return std::nullopt;
    drawn_.push_back(q.items.front().first);
    out = std::move(q.items.front().second);
    q.items.pop_front();
  }
  cv_.notify_all();
  return out;
}

std::optional<SquareBlind> RandomnessPool::draw_square() { return take(square_); }
std::optional<MulBlind> RandomnessPool::draw_mul() { return take(mul_); }
std::optional<SminBlind> RandomnessPool::draw_smin() { return take(smin_); }
std::optional<RefreshBlind> RandomnessPool::draw_refresh() { return take(refresh_); }

std::size_t RandomnessPool::size(PoolKind kind) const {
  std::lock_guard lock(mutex_);
  switch (kind) {
    case PoolKind::square: return square_.items.size();
    case PoolKind::mul: return mul_.items.size();
    case PoolKind::smin: return smin_.items.size();
    case PoolKind::refresh: return refresh_.items.size();
  }
  return 0;
}

namespace {

template <typename T, typename Make>
std::vector<T> generate_parallel(std::size_t count, Make make) {
  std::vector<T> out(count);
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < count; ++i) {
    try {
      out[i] = make();
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace

void RandomnessPool::generate(PoolKind kind, std::size_t count) {
  if (count == 0) return;
  BlindFactory f{&pk_, &params_, &rng_};
  auto push = [this](auto& queue, auto&& items) {
    std::lock_guard lock(mutex_);
    for (auto& it : items) queue.items.emplace_back(next_serial_++, std::move(it));
  };
  switch (kind) {
    case PoolKind::square:
      push(square_, generate_parallel<SquareBlind>(count, [&] { return f.square(); }));
      break;
    case PoolKind::mul:
      push(mul_, generate_parallel<MulBlind>(count, [&] { return f.mul(); }));
      break;
    case PoolKind::smin:
      push(smin_, generate_parallel<SminBlind>(count, [&] { return f.smin(); }));
      break;
    case PoolKind::refresh:
      push(refresh_, generate_parallel<RefreshBlind>(count, [&] { return f.refresh(); }));
      break;
  }
}

void RandomnessPool::fill(PoolKind kind, std::size_t count) {
  std::size_t have = size(kind);
  if (count > have) generate(kind, count - have);
}

void RandomnessPool::fill() {
  for (PoolKind k : {PoolKind::square, PoolKind::mul, PoolKind::smin, PoolKind::refresh}) {
    fill(k, targets_.of(k));
  }
}

bool RandomnessPool::below_low_water() const {
  std::size_t div = targets_.low_water_divisor == 0 ? 1 : targets_.low_water_divisor;
  for (PoolKind k : {PoolKind::square, PoolKind::mul, PoolKind::smin, PoolKind::refresh}) {
    std::size_t target = targets_.of(k);
    if (target == 0) continue;
    std::size_t have = 0;
    switch (k) {
      case PoolKind::square: have = square_.items.size(); break;
      case PoolKind::mul: have = mul_.items.size(); break;
      case PoolKind::smin: have = smin_.items.size(); break;
      case PoolKind::refresh: have = refresh_.items.size(); break;
    }
    if (have < target / div) return true;
  }
  return false;
}

void RandomnessPool::background_loop() {
  while (!stop_) {
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, [this] { return stop_ || below_low_water(); });
      if (stop_) return;
    }
    // Refill in small steps so stop requests are honored promptly.
    for (PoolKind k : {PoolKind::square, PoolKind::mul, PoolKind::smin, PoolKind::refresh}) {
      std::size_t target = targets_.of(k);
      while (!stop_ && size(k) < target) {
        generate(k, std::min<std::size_t>(64, target - size(k)));
      }
    }
  }
}

void RandomnessPool::start_background() {
  if (worker_.joinable()) return;
  stop_ = false;
  worker_ = std::thread([this] { background_loop(); });
}

void RandomnessPool::stop_background() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

std::vector<std::uint64_t> RandomnessPool::drawn_serials() const {
  std::lock_guard lock(mutex_);
  return drawn_;
}

}  // namespace twinface
