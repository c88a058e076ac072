// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "sclora/matrix.hpp"

namespace sclora {

/// Eigenpairs of a symmetric matrix. Eigenvalues are sorted descending and
/// column i of `eigenvectors` belongs to eigenvalues[i].
///
/// Output is deterministic: equal eigenvalues keep the solver's column
/// order (stable sort), and each eigenvector is scaled so that its
/// largest-magnitude component is positive, the lowest index winning ties.
struct EigenDecomposition {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;
};

struct JacobiOptions {
  /// Converged once the off-diagonal Frobenius norm is at most
  /// tolerance * ||M||_F.
  double tolerance = 1e-12;
  int max_sweeps = 100;
};

/// Cyclic Jacobi eigensolver. Throws ConvergenceError when the sweep budget
/// runs out.
EigenDecomposition eig_sym(const SymmetricMatrix& m, const JacobiOptions& options = {});

/// Leading r singular triplets: m ≈ u · diag(sigma) · vᵀ.
struct ThinSvd {
  Matrix u;
  std::vector<double> sigma;
  Matrix v;
};

/// One-sided (Hestenes) Jacobi SVD truncated to rank r, 1 <= r <= min(rows, cols).
/// Each right singular vector follows the same sign convention as eig_sym;
/// left vectors flip with it.
ThinSvd svd_thin(const Matrix& m, std::size_t r);

/// Modified Gram-Schmidt with one re-orthogonalization pass. Throws
/// NumericalError if the columns are (numerically) linearly dependent.
Matrix orthonormalize_columns(const Matrix& m);

/// Flips the sign of column j so its largest-magnitude entry is positive.
/// Returns true when the column was flipped.
bool canonicalize_column_sign(Matrix& m, std::size_t j);

}  // namespace sclora
