// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sclora/matrix.hpp"
#include "sclora/subspace.hpp"

namespace sclora {

enum class Scheme { kScLora, kVanilla, kPissa };

std::string_view to_string(Scheme s);
/// Accepts "sc-lora", "vanilla", "pissa".
Scheme parse_scheme(std::string_view name);

/// Low-rank adapter on a frozen residual: W' = w_res + b·a.
/// a is r × d_in (down-projection), b is d_out × r (up-projection).
/// No α/r scaling is applied.
struct AdapterPair {
  Matrix a;
  Matrix b;
  Matrix w_res;
  std::size_t rank = 0;
  Scheme scheme = Scheme::kVanilla;

  std::size_t d_in() const noexcept { return a.cols(); }
  std::size_t d_out() const noexcept { return b.rows(); }

  /// Throws DimensionMismatch unless the three shapes agree with `rank`.
  void validate() const;
};

/// b = Q_r, a = Q_rᵀ·w0, w_res = w0 − b·a. At init b·a·x = Π_S(w0·x).
AdapterPair init_sc_lora(const Matrix& w0, const OrthonormalBasis& basis);

/// a ~ N(0, 2/d_in) (Kaiming fan-in, gain √2), b = 0, w_res = w0.
AdapterPair init_vanilla(const Matrix& w0, std::size_t r, std::uint64_t seed);

/// Top-r singular triplets of w0 split evenly: b = U_r·diag(√σ),
/// a = diag(√σ)·V_rᵀ, w_res = w0 − b·a.
AdapterPair init_pissa(const Matrix& w0, std::size_t r);

/// w_res·x + b·(a·x); b·a is never formed.
Vector adapted_forward(const AdapterPair& p, std::span<const double> x);

/// w_res + b·a.
Matrix merge_adapter(const AdapterPair& p);

struct InvariantCheck {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Runs the invariants an adapter must satisfy at initialization against
/// its pretrained weight: shape coherence, reconstruction, plus the
/// scheme-specific ones (orthonormal b and the projection identity for
/// SC-LoRA, b = 0 for vanilla, Eckart–Young residual for PiSSA). Random
/// probe vectors come from `seed`.
std::vector<InvariantCheck> verify_adapter(const AdapterPair& p, const Matrix& w0,
                                           std::uint64_t seed, std::size_t probes = 100);

}  // namespace sclora
