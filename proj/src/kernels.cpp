#include "twinface/kernels.hpp"

#include <exception>
#include <mutex>

#include "twinface/error.hpp"

namespace twinface::kernels {

namespace {

void check_matrix(std::size_t cells, std::size_t dim) {
  if (dim == 0 || cells % dim != 0) {
    throw DimensionError("matrix of " + std::to_string(cells) + " cells is not a multiple of " +
                         std::to_string(dim));
  }
}

// Runs f(i) for i in [0, n) across OpenMP threads; rethrows the first failure.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (long long i = 0; i < count; ++i) {
    try {
      f(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

Ciphertext diff_cell(const PublicKey& pk, std::span<const Ciphertext> probe,
                     std::span<const Ciphertext> cells, std::size_t k) {
  return hom_sub(pk, probe[k % probe.size()], cells[k]);
}

Ciphertext row_sum(const PublicKey& pk, std::span<const Ciphertext> cells, std::size_t dim,
                   std::size_t row) {
  BigInt acc = cells[row * dim].value;
  for (std::size_t j = 1; j < dim; ++j) {
    acc = acc * cells[row * dim + j].value % pk.n_squared();
  }
  return Ciphertext{acc};
}

}  // namespace

namespace serial {

std::vector<Ciphertext> encrypt_values(const PublicKey& pk, std::span<const BigInt> ms,
                                       RandomSource& rng) {
  std::vector<Ciphertext> out;
  out.reserve(ms.size());
  for (const auto& m : ms) out.push_back(encrypt(pk, m, rng));
  return out;
}

std::vector<BigInt> decrypt_values(const PrivateKey& sk, std::span<const Ciphertext> cs) {
  std::vector<BigInt> out;
  out.reserve(cs.size());
  for (const auto& c : cs) out.push_back(decrypt(sk, c));
  return out;
}

std::vector<Ciphertext> diff_matrix(const PublicKey& pk, std::span<const Ciphertext> probe,
                                    std::span<const Ciphertext> cells) {
  check_matrix(cells.size(), probe.size());
  std::vector<Ciphertext> out;
  out.reserve(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) out.push_back(diff_cell(pk, probe, cells, k));
  return out;
}

std::vector<Ciphertext> row_sums(const PublicKey& pk, std::span<const Ciphertext> cells,
                                 std::size_t dim) {
  check_matrix(cells.size(), dim);
  std::vector<Ciphertext> out;
  out.reserve(cells.size() / dim);
  for (std::size_t i = 0; i < cells.size() / dim; ++i) out.push_back(row_sum(pk, cells, dim, i));
  return out;
}

}  // namespace serial

namespace parallel {

std::vector<Ciphertext> encrypt_values(const PublicKey& pk, std::span<const BigInt> ms,
                                       RandomSource& rng) {
  std::vector<Ciphertext> out(ms.size());
  parallel_for(ms.size(), [&](std::size_t i) { out[i] = encrypt(pk, ms[i], rng); });
  return out;
}

std::vector<BigInt> decrypt_values(const PrivateKey& sk, std::span<const Ciphertext> cs) {
  std::vector<BigInt> out(cs.size());
  parallel_for(cs.size(), [&](std::size_t i) { out[i] = decrypt(sk, cs[i]); });
  return out;
}

std::vector<Ciphertext> diff_matrix(const PublicKey& pk, std::span<const Ciphertext> probe,
                                    std::span<const Ciphertext> cells) {
  check_matrix(cells.size(), probe.size());
  std::vector<Ciphertext> out(cells.size());
  parallel_for(cells.size(), [&](std::size_t k) { out[k] = diff_cell(pk, probe, cells, k); });
  return out;
}

std::vector<Ciphertext> row_sums(const PublicKey& pk, std::span<const Ciphertext> cells,
                                 std::size_t dim) {
  check_matrix(cells.size(), dim);
  std::vector<Ciphertext> out(cells.size() / dim);
  parallel_for(out.size(), [&](std::size_t i) { out[i] = row_sum(pk, cells, dim, i); });
  return out;
}

}  // namespace parallel

}  // namespace twinface::kernels
