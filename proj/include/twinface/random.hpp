#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <random>
#include <span>

namespace twinface {

// Source of random bytes. Implementations must tolerate concurrent calls.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::byte> out) = 0;

  std::uint64_t next_u64();
  bool coin();
};

// Kernel CSPRNG via getrandom(2).
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::byte> out) override;
};

// Reproducible stream for tests and benchmarks. Not cryptographically strong.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(std::uint64_t seed) : engine_(seed) {}
  void fill(std::span<std::byte> out) override;

 private:
  std::mutex mutex_;
  std::mt19937_64 engine_;
};

// Process-wide SystemRandom.
RandomSource& system_random();

}  // namespace twinface
