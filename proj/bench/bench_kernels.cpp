// Serial reference kernels against their OpenMP versions.
//
//   bench_kernels --benchmark_filter=diff
//
// Keys are toy_wide so a full 64 x 512 database fits in a few seconds;
// set OMP_NUM_THREADS to vary the parallel width.

#include <benchmark/benchmark.h>

#include "twinface/kernels.hpp"
#include "twinface/paillier.hpp"

using namespace twinface;

namespace {

constexpr std::size_t kDim = 512;

const KeyMaterial& keys() {
  static SeededRandom rng(7);
  static KeyMaterial k = keygen(ParamSet::toy_wide(), rng);
  return k;
}

std::vector<BigInt> plain(std::size_t n) {
  std::vector<BigInt> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(static_cast<unsigned long>(i % 10001));
  return out;
}

std::vector<Ciphertext> cells(std::size_t rows) {
  static SeededRandom rng(11);
  auto ms = plain(rows * kDim);
  return kernels::serial::encrypt_values(keys().pk, ms, rng);
}

template <auto Encrypt>
void encrypt_values(benchmark::State& state) {
  SeededRandom rng(3);
  auto ms = plain(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Encrypt(keys().pk, ms, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Decrypt>
void decrypt_values(benchmark::State& state) {
  auto cs = cells(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Decrypt(keys().sk, cs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cs.size()));
}

template <auto Diff>
void diff_matrix(benchmark::State& state) {
  auto cs = cells(static_cast<std::size_t>(state.range(0)));
  std::vector<Ciphertext> probe(cs.begin(), cs.begin() + kDim);
  for (auto _ : state) benchmark::DoNotOptimize(Diff(keys().pk, probe, cs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cs.size()));
}

template <auto Sums>
void row_sums(benchmark::State& state) {
  auto cs = cells(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Sums(keys().pk, cs, kDim));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cs.size()));
}

}  // namespace

BENCHMARK(encrypt_values<kernels::serial::encrypt_values>)->Name("encrypt/serial")->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(encrypt_values<kernels::parallel::encrypt_values>)->Name("encrypt/parallel")->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(decrypt_values<kernels::serial::decrypt_values>)->Name("decrypt/serial")->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(decrypt_values<kernels::parallel::decrypt_values>)->Name("decrypt/parallel")->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(diff_matrix<kernels::serial::diff_matrix>)->Name("diff/serial")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(diff_matrix<kernels::parallel::diff_matrix>)->Name("diff/parallel")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(row_sums<kernels::serial::row_sums>)->Name("row_sums/serial")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(row_sums<kernels::parallel::row_sums>)->Name("row_sums/parallel")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
