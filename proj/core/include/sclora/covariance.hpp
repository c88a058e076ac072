// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "sclora/matrix.hpp"

namespace sclora {

/// Output activations of one sample: d_out × L, one column per token.
struct ActivationSample {
  Matrix tokens;
  std::string sample_id;
};

/// Streaming second-moment statistics for one layer and one task.
///
/// Each sample is reduced to the token sum x̂ = Σ_t tokens[:, t] and the
/// accumulator keeps Σ x̂x̂ᵀ together with the sample count. Values are
/// uncentered (E[XXᵀ], not a centered covariance). Additions happen in
/// arrival order with plain sequential summation.
class CovAccumulator {
 public:
  explicit CovAccumulator(std::size_t dim);

  std::size_t dim() const noexcept { return sum_outer_.rows(); }
  std::size_t sample_count() const noexcept { return sample_count_; }
  /// Token length L of the accumulated samples; 0 while empty.
  std::size_t token_length() const noexcept { return token_length_; }
  bool empty() const noexcept { return sample_count_ == 0; }
  const Matrix& sum_outer() const noexcept { return sum_outer_; }

  /// Accumulates the token-summed vector of `sample`.
  void add(const ActivationSample& sample);
  /// Accumulates an already-reduced vector x̂ observed over `token_length` tokens.
  void add_reduced(std::span<const double> x_hat, std::size_t token_length);

  /// Entrywise sum of statistics; `this` is the left operand.
  void merge_from(const CovAccumulator& other);

 private:
  void adopt_token_length(std::size_t length, const std::string& who);

  Matrix sum_outer_;
  std::size_t sample_count_ = 0;
  std::size_t token_length_ = 0;
};

CovAccumulator accumulate_sample(CovAccumulator acc, const ActivationSample& sample);
CovAccumulator merge(const CovAccumulator& a, const CovAccumulator& b);

struct CovarianceMatrix {
  SymmetricMatrix matrix;
  std::size_t sample_count = 0;
  std::size_t token_length = 0;

  std::size_t dim() const noexcept { return matrix.dim(); }
};

/// sum_outer / sample_count, re-symmetrized. Rejects an empty accumulator.
CovarianceMatrix finalize(const CovAccumulator& acc);

/// Keeps the first `length` token columns; samples shorter than that are
/// rejected.
Matrix clip_tokens(const Matrix& tokens, std::size_t length);

/// Token sum of each column block: the per-sample vector x̂.
Vector token_sum(const Matrix& tokens);

enum class RankVerdict { kOk, kWarn };

struct RankDiagnostic {
  RankVerdict verdict = RankVerdict::kOk;
  /// sample_count × token_length, an upper bound on rank(Cov).
  std::uint64_t support = 0;
  /// dim − r (may be negative when r > dim).
  std::int64_t bound = 0;

  bool warn() const noexcept { return verdict == RankVerdict::kWarn; }
  std::string message() const;
};

/// WARN when sample_count·L < dim − r: the covariance null space then has
/// dimension > r, so at β = 1 any r vectors inside it are optimal and the
/// selected subspace is not unique.
RankDiagnostic rank_deficiency_check(const CovarianceMatrix& cov, std::size_t r);
RankDiagnostic rank_deficiency_check(std::size_t dim, std::size_t sample_count,
                                     std::size_t token_length, std::size_t r);

}  // namespace sclora
