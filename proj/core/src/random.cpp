// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#include "sclora/random.hpp"

#include "sclora/linalg.hpp"

namespace sclora {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x5c10a5u};
  return Rng(seq);
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

Vector gaussian_vector(std::size_t n, Rng& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  Vector v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

Matrix random_orthonormal(std::size_t dim, std::size_t r, Rng& rng) {
  return orthonormalize_columns(gaussian_matrix(dim, r, rng));
}

SymmetricMatrix random_symmetric(std::size_t dim, Rng& rng) {
  return symmetrize(gaussian_matrix(dim, dim, rng));
}

}  // namespace sclora
