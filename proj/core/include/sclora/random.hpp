// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "sclora/matrix.hpp"

namespace sclora {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream). Streams with distinct indices
/// never share state, so parallel consumers stay reproducible.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double stddev = 1.0);
Vector gaussian_vector(std::size_t n, Rng& rng, double stddev = 1.0);

/// dim × r matrix with orthonormal columns drawn from a Gaussian matrix.
Matrix random_orthonormal(std::size_t dim, std::size_t r, Rng& rng);

/// Random symmetric matrix with N(0,1) entries, symmetrized.
SymmetricMatrix random_symmetric(std::size_t dim, Rng& rng);

}  // namespace sclora
