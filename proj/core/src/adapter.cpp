// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#include "sclora/adapter.hpp"

#include <algorithm>
#include <cmath>

#include "sclora/errors.hpp"
#include "sclora/linalg.hpp"
#include "sclora/random.hpp"

namespace sclora {

namespace {

void require_rank(const Matrix& w0, std::size_t r, const char* who) {
  const std::size_t limit = std::min(w0.rows(), w0.cols());
  if (r < 1 || r > limit) {
    throw InvalidArgument(std::string(who) + ": rank " + std::to_string(r) +
                          " outside [1, " + std::to_string(limit) + "] for W0 " + w0.shape());
  }
}

InvariantCheck check_le(std::string name, double measured, double tolerance) {
  return InvariantCheck{std::move(name), measured, tolerance, measured <= tolerance};
}

}  // namespace

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::kScLora:
      return "sc-lora";
    case Scheme::kVanilla:
      return "vanilla";
    case Scheme::kPissa:
      return "pissa";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "sc-lora") return Scheme::kScLora;
  if (name == "vanilla") return Scheme::kVanilla;
  if (name == "pissa") return Scheme::kPissa;
  throw InvalidArgument("unknown scheme '" + std::string(name) +
                        "' (expected sc-lora, vanilla or pissa)");
}

void AdapterPair::validate() const {
  if (a.rows() != rank || b.cols() != rank) {
    throw DimensionMismatch("adapter: a " + a.shape() + " and b " + b.shape() +
                            " inconsistent with rank " + std::to_string(rank));
  }
  if (w_res.rows() != b.rows() || w_res.cols() != a.cols()) {
    throw DimensionMismatch("adapter: w_res " + w_res.shape() + " inconsistent with b " +
                            b.shape() + " and a " + a.shape());
  }
}

AdapterPair init_sc_lora(const Matrix& w0, const OrthonormalBasis& basis) {
  if (basis.dim() != w0.rows()) {
    throw DimensionMismatch("init_sc_lora: basis dim " + std::to_string(basis.dim()) +
                            " vs W0 rows " + std::to_string(w0.rows()));
  }
  AdapterPair p;
  p.b = basis.columns();
  p.a = mat_tmul(basis.columns(), w0);
  p.w_res = w0 - mat_mul(p.b, p.a);
  p.rank = basis.rank();
  p.scheme = Scheme::kScLora;
  return p;
}

AdapterPair init_vanilla(const Matrix& w0, std::size_t r, std::uint64_t seed) {
  require_rank(w0, r, "init_vanilla");
  Rng rng = make_rng(seed);
  AdapterPair p;
  p.a = gaussian_matrix(r, w0.cols(), rng, std::sqrt(2.0 / static_cast<double>(w0.cols())));
  p.b = Matrix(w0.rows(), r);
  p.w_res = w0;
  p.rank = r;
  p.scheme = Scheme::kVanilla;
  return p;
}

AdapterPair init_pissa(const Matrix& w0, std::size_t r) {
  require_rank(w0, r, "init_pissa");
  const ThinSvd svd = svd_thin(w0, r);
  AdapterPair p;
  p.b = svd.u;
  p.a = transpose(svd.v);
  for (std::size_t k = 0; k < r; ++k) {
    const double root = std::sqrt(svd.sigma[k]);
    for (std::size_t i = 0; i < p.b.rows(); ++i) p.b(i, k) *= root;
    for (double& v : p.a.row(k)) v *= root;
  }
  p.w_res = w0 - mat_mul(p.b, p.a);
  p.rank = r;
  p.scheme = Scheme::kPissa;
  return p;
}

Vector adapted_forward(const AdapterPair& p, std::span<const double> x) {
  if (x.size() != p.d_in()) {
    throw DimensionMismatch("adapted_forward: input length " + std::to_string(x.size()) +
                            " vs d_in " + std::to_string(p.d_in()));
  }
  Vector y = mat_vec(p.w_res, x);
  const Vector ax = mat_vec(p.a, x);
  const Vector bax = mat_vec(p.b, ax);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bax[i];
  return y;
}

Matrix merge_adapter(const AdapterPair& p) { return p.w_res + mat_mul(p.b, p.a); }

std::vector<InvariantCheck> verify_adapter(const AdapterPair& p, const Matrix& w0,
                                           std::uint64_t seed, std::size_t probes) {
  std::vector<InvariantCheck> checks;

  const bool shapes_ok = p.a.rows() == p.rank && p.b.cols() == p.rank &&
                         p.w_res.rows() == p.b.rows() && p.w_res.cols() == p.a.cols() &&
                         p.w_res.rows() == w0.rows() && p.w_res.cols() == w0.cols();
  checks.push_back({"shape_coherence", shapes_ok ? 0.0 : 1.0, 0.0, shapes_ok});
  if (!shapes_ok) return checks;

  const bool finite = all_finite(p.a.data()) && all_finite(p.b.data()) &&
                      all_finite(p.w_res.data());
  checks.push_back({"finite_entries", finite ? 0.0 : 1.0, 0.0, finite});
  if (!finite) return checks;

  const double w0_norm = frobenius_norm(w0);
  checks.push_back(check_le("reconstruction", frobenius_norm(merge_adapter(p) - w0),
                            1e-10 * std::max(1.0, w0_norm)));

  switch (p.scheme) {
    case Scheme::kVanilla: {
      double max_b = 0.0;
      for (double v : p.b.data()) max_b = std::max(max_b, std::abs(v));
      checks.push_back(check_le("vanilla_b_zero", max_b, 0.0));
      checks.push_back(check_le("vanilla_residual_is_w0", max_abs_diff(p.w_res, w0), 0.0));
      break;
    }
    case Scheme::kScLora: {
      const double ortho = orthonormality_error(p.b);
      checks.push_back(check_le("b_orthonormal", ortho, 1e-10));
      if (ortho > 1e-10) break;
      const auto basis = OrthonormalBasis::from_columns(p.b);
      checks.push_back(check_le("a_equals_bt_w0",
                                frobenius_norm(p.a - mat_tmul(p.b, w0)),
                                1e-10 * std::max(1.0, w0_norm)));
      // b·a·x = Π_S(w0·x), measured relative to ‖x‖.
      Rng rng = make_rng(seed, 0x7e57);
      double worst = 0.0;
      for (std::size_t t = 0; t < probes; ++t) {
        const Vector x = gaussian_vector(w0.cols(), rng);
        const Vector bax = mat_vec(p.b, mat_vec(p.a, x));
        const Vector target = project(basis, mat_vec(w0, x));
        double diff = 0.0;
        for (std::size_t i = 0; i < bax.size(); ++i) {
          diff += (bax[i] - target[i]) * (bax[i] - target[i]);
        }
        worst = std::max(worst, std::sqrt(diff) / norm2(x));
      }
      checks.push_back(check_le("projection_identity", worst, 1e-8));
      break;
    }
    case Scheme::kPissa: {
      const std::size_t full = std::min(w0.rows(), w0.cols());
      const ThinSvd svd = svd_thin(w0, full);
      double tail = 0.0;
      for (std::size_t i = p.rank; i < full; ++i) tail += svd.sigma[i] * svd.sigma[i];
      const double res = frobenius_norm(p.w_res);
      checks.push_back(check_le("eckart_young_residual", std::abs(res * res - tail),
                                1e-8 * std::max(1.0, w0_norm * w0_norm)));
      break;
    }
  }
  return checks;
}

}  // namespace sclora
