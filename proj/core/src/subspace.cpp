// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#include "sclora/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sclora/errors.hpp"
#include "sclora/linalg.hpp"
#include "sclora/random.hpp"

namespace sclora {

double orthonormality_error(const Matrix& q) {
  const Matrix gram = mat_tmul(q, q);
  double err = 0.0;
  for (std::size_t i = 0; i < gram.rows(); ++i)
    for (std::size_t j = 0; j < gram.cols(); ++j)
      err = std::max(err, std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)));
  return err;
}

OrthonormalBasis OrthonormalBasis::from_columns(Matrix columns, double tolerance) {
  if (columns.empty()) throw InvalidArgument("basis: empty matrix");
  if (columns.cols() > columns.rows()) {
    throw InvalidArgument("basis: rank " + std::to_string(columns.cols()) +
                          " exceeds dimension " + std::to_string(columns.rows()));
  }
  const double err = orthonormality_error(columns);
  if (!(err <= tolerance)) {
    std::ostringstream msg;
    msg << "basis: columns are not orthonormal (max |QᵀQ - I| = " << err << ")";
    throw InvalidArgument(msg.str());
  }
  return OrthonormalBasis(std::move(columns));
}

Matrix OrthonormalBasis::projector() const { return mat_mul(q_, transpose(q_)); }

SymmetricMatrix delta_cov(const SymmetricMatrix& cov_pos, const SymmetricMatrix& cov_neg,
                          double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    std::ostringstream msg;
    msg << "beta must lie in [0, 1], got " << beta;
    throw InvalidArgument(msg.str());
  }
  if (cov_pos.dim() != cov_neg.dim()) {
    throw DimensionMismatch("delta_cov: covariance dims " + std::to_string(cov_pos.dim()) +
                            " and " + std::to_string(cov_neg.dim()));
  }
  const auto p = cov_pos.matrix().data();
  const auto n = cov_neg.matrix().data();
  Matrix d(cov_pos.dim(), cov_pos.dim());
  auto out = d.data();
  const double wp = 1.0 - beta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = wp * p[i] - beta * n[i];
  return symmetrize(d);
}

SymmetricMatrix delta_cov(const CovarianceMatrix& cov_pos, const CovarianceMatrix& cov_neg,
                          double beta) {
  return delta_cov(cov_pos.matrix, cov_neg.matrix, beta);
}

bool SubspaceSelection::degenerate() const {
  return std::any_of(warnings.begin(), warnings.end(),
                     [](const Warning& w) { return w.code == kWarnDegenerate; });
}

SubspaceSelection select_subspace(const SymmetricMatrix& delta, std::size_t r) {
  const std::size_t n = delta.dim();
  if (r < 1 || r > n) {
    throw InvalidArgument("select_subspace: rank " + std::to_string(r) + " outside [1, " +
                          std::to_string(n) + "]");
  }
  EigenDecomposition eig = eig_sym(delta);

  double top = 0.0;
  for (std::size_t i = 0; i < r; ++i) top += eig.eigenvalues[i];

  SubspaceSelection sel{OrthonormalBasis::from_columns(eig.eigenvectors.left_cols(r)),
                        std::move(eig.eigenvalues), top,
                        std::numeric_limits<double>::infinity(), {}};
  if (r < n) {
    sel.gap = sel.eigenvalues[r - 1] - sel.eigenvalues[r];
    const double scale = std::max(1.0, std::abs(sel.eigenvalues[0]));
    if (sel.gap < 1e-8 * scale) {
      std::ostringstream msg;
      msg << "eigenvalue gap lambda_" << r << " - lambda_" << r + 1 << " = " << sel.gap
          << " is below 1e-8*" << scale << "; optimal subspace is not unique";
      sel.warnings.push_back({kWarnDegenerate, msg.str()});
    }
  }
  return sel;
}

Vector project(const OrthonormalBasis& basis, std::span<const double> x) {
  if (x.size() != basis.dim()) {
    throw DimensionMismatch("project: vector length " + std::to_string(x.size()) +
                            " vs basis dim " + std::to_string(basis.dim()));
  }
  const Vector coeffs = mat_tvec(basis.columns(), x);
  return mat_vec(basis.columns(), coeffs);
}

double trace_reward(const OrthonormalBasis& basis, const SymmetricMatrix& delta) {
  if (basis.dim() != delta.dim()) {
    throw DimensionMismatch("reward: basis dim " + std::to_string(basis.dim()) +
                            " vs covariance dim " + std::to_string(delta.dim()));
  }
  const Matrix dq = mat_mul(delta.matrix(), basis.columns());
  double value = 0.0;
  for (std::size_t k = 0; k < basis.rank(); ++k) {
    for (std::size_t i = 0; i < basis.dim(); ++i) value += basis.columns()(i, k) * dq(i, k);
  }
  return value;
}

RewardValue reward(const OrthonormalBasis& basis, const CovarianceMatrix& cov_pos,
                   const CovarianceMatrix& cov_neg, double beta) {
  return RewardValue{trace_reward(basis, delta_cov(cov_pos, cov_neg, beta)), beta,
                     basis.rank()};
}

RewardValue reward_oracle_max(const SymmetricMatrix& delta, std::size_t r,
                              std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("reward_oracle_max: need at least one trial");
  if (r < 1 || r > delta.dim()) {
    throw InvalidArgument("reward_oracle_max: rank " + std::to_string(r) + " out of range");
  }
  double best = -std::numeric_limits<double>::infinity();
  Rng rng = make_rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const Matrix q = random_orthonormal(delta.dim(), r, rng);
    best = std::max(best, trace(mat_tmul(q, mat_mul(delta.matrix(), q))));
  }
  return RewardValue{best, std::nullopt, r};
}

}  // namespace sclora
