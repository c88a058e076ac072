// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#include "sclora/covariance.hpp"

#include "sclora/errors.hpp"

namespace sclora {

CovAccumulator::CovAccumulator(std::size_t dim) : sum_outer_(dim, dim) {}

void CovAccumulator::adopt_token_length(std::size_t length, const std::string& who) {
  if (length == 0) throw InvalidArgument(who + ": token length must be at least 1");
  if (token_length_ != 0 && token_length_ != length) {
    throw DimensionMismatch(who + ": token length " + std::to_string(length) +
                            " differs from accumulator token length " +
                            std::to_string(token_length_));
  }
  token_length_ = length;
}

void CovAccumulator::add(const ActivationSample& sample) {
  const std::string who = sample.sample_id.empty()
                              ? std::string("sample")
                              : "sample '" + sample.sample_id + "'";
  if (sample.tokens.rows() != dim()) {
    throw DimensionMismatch(who + ": activation dim " + std::to_string(sample.tokens.rows()) +
                            " does not match accumulator dim " + std::to_string(dim()));
  }
  if (!all_finite(sample.tokens.data())) {
    throw InvalidArgument(who + ": non-finite activation");
  }
  add_reduced(token_sum(sample.tokens), sample.tokens.cols());
}

void CovAccumulator::add_reduced(std::span<const double> x_hat, std::size_t token_length) {
  if (x_hat.size() != dim()) {
    throw DimensionMismatch("add_reduced: vector length " + std::to_string(x_hat.size()) +
                            " vs dim " + std::to_string(dim()));
  }
  adopt_token_length(token_length, "add_reduced");
  const std::size_t n = dim();
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x_hat[i];
    for (std::size_t j = i; j < n; ++j) {
      const double v = sum_outer_(i, j) + xi * x_hat[j];
      sum_outer_(i, j) = v;
      sum_outer_(j, i) = v;
    }
  }
  ++sample_count_;
}

void CovAccumulator::merge_from(const CovAccumulator& other) {
  if (other.dim() != dim()) {
    throw DimensionMismatch("merge: accumulator dims " + std::to_string(dim()) + " and " +
                            std::to_string(other.dim()));
  }
  if (other.empty()) return;
  adopt_token_length(other.token_length_, "merge");
  auto dst = sum_outer_.data();
  auto src = other.sum_outer_.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = dst[i] + src[i];
  sample_count_ += other.sample_count_;
}

CovAccumulator accumulate_sample(CovAccumulator acc, const ActivationSample& sample) {
  acc.add(sample);
  return acc;
}

CovAccumulator merge(const CovAccumulator& a, const CovAccumulator& b) {
  CovAccumulator out = a;
  out.merge_from(b);
  return out;
}

CovarianceMatrix finalize(const CovAccumulator& acc) {
  if (acc.empty()) throw InvalidArgument("finalize: accumulator holds no samples");
  const double inv = 1.0 / static_cast<double>(acc.sample_count());
  Matrix scaled = acc.sum_outer();
  for (double& v : scaled.data()) v *= inv;
  return CovarianceMatrix{symmetrize(scaled), acc.sample_count(), acc.token_length()};
}

Matrix clip_tokens(const Matrix& tokens, std::size_t length) {
  if (length == 0) throw InvalidArgument("clip length must be at least 1");
  if (tokens.cols() < length) {
    throw DimensionMismatch("cannot clip sample with " + std::to_string(tokens.cols()) +
                            " tokens to length " + std::to_string(length));
  }
  return tokens.cols() == length ? tokens : tokens.left_cols(length);
}

Vector token_sum(const Matrix& tokens) {
  Vector x(tokens.rows(), 0.0);
  for (std::size_t i = 0; i < tokens.rows(); ++i) {
    double s = 0.0;
    for (double v : tokens.row(i)) s += v;
    x[i] = s;
  }
  return x;
}

std::string RankDiagnostic::message() const {
  if (warn()) {
    return "samples x tokens = " + std::to_string(support) + " < dim - rank = " +
           std::to_string(bound) +
           "; covariance null space exceeds the rank, subspace at beta near 1 is not unique";
  }
  return "samples x tokens = " + std::to_string(support) + " >= dim - rank = " +
         std::to_string(bound);
}

RankDiagnostic rank_deficiency_check(std::size_t dim, std::size_t sample_count,
                                     std::size_t token_length, std::size_t r) {
  RankDiagnostic d;
  d.support = static_cast<std::uint64_t>(sample_count) * token_length;
  d.bound = static_cast<std::int64_t>(dim) - static_cast<std::int64_t>(r);
  d.verdict = d.bound > 0 && d.support < static_cast<std::uint64_t>(d.bound)
                  ? RankVerdict::kWarn
                  : RankVerdict::kOk;
  return d;
}

RankDiagnostic rank_deficiency_check(const CovarianceMatrix& cov, std::size_t r) {
  return rank_deficiency_check(cov.dim(), cov.sample_count, cov.token_length, r);
}

}  // namespace sclora
