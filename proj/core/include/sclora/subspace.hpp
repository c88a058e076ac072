// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sclora/covariance.hpp"
#include "sclora/matrix.hpp"

namespace sclora {

/// Diagnostic attached to an otherwise successful result.
struct Warning {
  std::string code;
  std::string message;

  bool operator==(const Warning&) const = default;
};

inline constexpr const char* kWarnDegenerate = "DEGENERATE";
inline constexpr const char* kWarnRankDeficient = "RANK_DEFICIENT";
inline constexpr const char* kWarnBetaAdvisory = "BETA_ADVISORY";

/// r orthonormal columns q_1..q_r spanning a subspace S of R^dim.
class OrthonormalBasis {
 public:
  /// Validates QᵀQ = I within `tolerance` per entry.
  static OrthonormalBasis from_columns(Matrix columns, double tolerance = 1e-10);

  std::size_t dim() const noexcept { return q_.rows(); }
  std::size_t rank() const noexcept { return q_.cols(); }
  const Matrix& columns() const noexcept { return q_; }

  /// P = Q Qᵀ.
  Matrix projector() const;

 private:
  explicit OrthonormalBasis(Matrix q) : q_(std::move(q)) {}
  Matrix q_;
};

/// Largest |QᵀQ − I| entry.
double orthonormality_error(const Matrix& q);

/// (1 − β)·Cov₊ − β·Cov₋, β ∈ [0, 1].
SymmetricMatrix delta_cov(const SymmetricMatrix& cov_pos, const SymmetricMatrix& cov_neg,
                          double beta);
SymmetricMatrix delta_cov(const CovarianceMatrix& cov_pos, const CovarianceMatrix& cov_neg,
                          double beta);

struct SubspaceSelection {
  OrthonormalBasis basis;
  /// Full spectrum of delta, descending.
  std::vector<double> eigenvalues;
  /// Σ of the top-r eigenvalues: the maximal reward.
  double reward = 0.0;
  /// λ_r − λ_{r+1}; +inf when r == dim.
  double gap = 0.0;
  std::vector<Warning> warnings;

  bool degenerate() const;
};

/// Top-r eigenvectors of delta. A gap λ_r − λ_{r+1} below
/// 1e-8·max(1, |λ_1|) still succeeds but attaches a DEGENERATE warning:
/// the optimal subspace is then not unique.
SubspaceSelection select_subspace(const SymmetricMatrix& delta, std::size_t r);

/// Π_S(x) = Σ_i (q_iᵀx) q_i.
Vector project(const OrthonormalBasis& basis, std::span<const double> x);

struct RewardValue {
  double value = 0.0;
  std::optional<double> beta;
  std::size_t rank = 0;
};

/// Σ_i q_iᵀ·delta·q_i = tr(Q Qᵀ delta).
double trace_reward(const OrthonormalBasis& basis, const SymmetricMatrix& delta);

/// R(S) = (1 − β)E‖Π_S(X₊)‖² − β E‖Π_S(X₋)‖², in its trace form.
RewardValue reward(const OrthonormalBasis& basis, const CovarianceMatrix& cov_pos,
                   const CovarianceMatrix& cov_neg, double beta);

/// Best reward over `trials` random r-dimensional orthonormal bases. A probe
/// that the eigen-selected subspace must meet or beat. Deterministic in
/// `seed`.
RewardValue reward_oracle_max(const SymmetricMatrix& delta, std::size_t r,
                              std::size_t trials, std::uint64_t seed);

}  // namespace sclora
