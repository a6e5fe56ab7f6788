#pragma once

// Measurement harness behind `twinface bench`. Every run uses an in-process
// loopback pair, so frame and byte counts are exact and timings exclude the
// network.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "twinface/paillier.hpp"

namespace twinface {

struct BenchRow {
  std::string suite;
  std::string op;
  std::size_t size = 0;
  double wall_ms = 0;
  std::uint64_t frames = 0;       // both directions
  std::uint64_t bytes = 0;        // both directions, including length prefixes
  std::uint64_t ciphertexts = 0;  // both directions
};

struct BenchOptions {
  // Precompute blinding material before the clock starts, as the offline phase would.
  bool offline = true;
  // Feature dimension for the pipeline suite.
  std::size_t dimension = 512;
};

inline constexpr const char* kBenchHeader = "suite,op,size,wall_ms,frames,bytes,ciphertexts";

std::string format_bench_row(const BenchRow& row);

// batch_square, naive_square and batch_smul over `size` random signed inputs.
std::vector<BenchRow> bench_protocols(const KeyMaterial& keys, std::span<const std::size_t> sizes,
                                      RandomSource& rng, const BenchOptions& options = {});

// One full recognition against a database of `size` rows.
std::vector<BenchRow> bench_pipeline(const KeyMaterial& keys, std::span<const std::size_t> sizes,
                                     RandomSource& rng, const BenchOptions& options = {});

// Comment lines with published square-operation runtimes, for side-by-side reading.
std::string bench_reference_notes();

}  // namespace twinface
