#pragma once

// Data-parallel ciphertext kernels. Each exists as a serial reference and an
// OpenMP version; the two must agree (up to fresh encryption randomness).
//
// Matrices are flat, row-major: cell (i, j) of a rows x dim matrix is at i*dim + j.

#include <span>
#include <vector>

#include "twinface/paillier.hpp"

namespace twinface::kernels {

namespace serial {

std::vector<Ciphertext> encrypt_values(const PublicKey& pk, std::span<const BigInt> ms,
                                       RandomSource& rng);
std::vector<BigInt> decrypt_values(const PrivateKey& sk, std::span<const Ciphertext> cs);
// Enc(u_j - v_ij) for every cell.
std::vector<Ciphertext> diff_matrix(const PublicKey& pk, std::span<const Ciphertext> probe,
                                    std::span<const Ciphertext> cells);
// prod_j cell(i, j) for every row i.
std::vector<Ciphertext> row_sums(const PublicKey& pk, std::span<const Ciphertext> cells,
                                 std::size_t dim);

}  // namespace serial

namespace parallel {

std::vector<Ciphertext> encrypt_values(const PublicKey& pk, std::span<const BigInt> ms,
                                       RandomSource& rng);
std::vector<BigInt> decrypt_values(const PrivateKey& sk, std::span<const Ciphertext> cs);
std::vector<Ciphertext> diff_matrix(const PublicKey& pk, std::span<const Ciphertext> probe,
                                    std::span<const Ciphertext> cells);
std::vector<Ciphertext> row_sums(const PublicKey& pk, std::span<const Ciphertext> cells,
                                 std::size_t dim);

}  // namespace parallel

}  // namespace twinface::kernels
