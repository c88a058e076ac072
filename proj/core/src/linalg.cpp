// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#include "sclora/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sclora/errors.hpp"

namespace sclora {

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

// tan of the rotation angle that zeroes the (p,q) entry, smaller root.
double jacobi_tangent(double app, double aqq, double apq) {
  const double theta = (aqq - app) / (2.0 * apq);
  if (std::abs(theta) > 1e150) return 0.5 / theta;
  const double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  return theta < 0.0 ? -t : t;
}

std::vector<std::size_t> descending_order(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return order;
}

}  // namespace

bool canonicalize_column_sign(Matrix& m, std::size_t j) {
  std::size_t best = 0;
  double best_abs = -1.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double v = std::abs(m(i, j));
    if (v > best_abs) {
      best_abs = v;
      best = i;
    }
  }
  if (m(best, j) < 0.0) {
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) = -m(i, j);
    return true;
  }
  return false;
}

EigenDecomposition eig_sym(const SymmetricMatrix& sym, const JacobiOptions& options) {
  const Matrix& m = sym.matrix();
  if (m.empty()) throw InvalidArgument("eig_sym: empty matrix");
  if (!all_finite(m.data())) throw InvalidArgument("eig_sym: input has non-finite entries");

  const std::size_t n = m.rows();
  Matrix a = m;
  Matrix v = Matrix::identity(n);
  const double threshold = options.tolerance * frobenius_norm(m);

  double off = off_diagonal_norm(a);
  int sweep = 0;
  while (off > threshold) {
    if (sweep == options.max_sweeps) {
      throw ConvergenceError("eig_sym: no convergence after " +
                                 std::to_string(options.max_sweeps) + " sweeps",
                             off);
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double t = jacobi_tangent(a(p, p), a(q, q), apq);
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          const double np = c * akp - s * akq;
          const double nq = s * akp + c * akq;
          a(k, p) = np;
          a(p, k) = np;
          a(k, q) = nq;
          a(q, k) = nq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    ++sweep;
    off = off_diagonal_norm(a);
  }

  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
  const auto order = descending_order(diag);

  EigenDecomposition out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = diag[order[j]];
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = v(i, order[j]);
    canonicalize_column_sign(out.eigenvectors, j);
  }
  return out;
}

Matrix orthonormalize_columns(const Matrix& m) {
  Matrix q = m;
  const std::size_t rows = q.rows();
  for (std::size_t j = 0; j < q.cols(); ++j) {
    Vector col = q.col(j);
    const double original = norm2(col);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double proj = 0.0;
        for (std::size_t i = 0; i < rows; ++i) proj += q(i, k) * col[i];
        for (std::size_t i = 0; i < rows; ++i) col[i] -= proj * q(i, k);
      }
    }
    const double nrm = norm2(col);
    if (!(nrm > 1e-12 * original) || nrm == 0.0) {
      throw NumericalError("orthonormalize_columns: column " + std::to_string(j) +
                           " is linearly dependent on earlier columns");
    }
    for (double& x : col) x /= nrm;
    q.set_col(j, col);
  }
  return q;
}

namespace {

// Full one-sided Jacobi on a tall matrix (rows >= cols): on return `work`
// holds U·Σ column-wise and `v` the right singular vectors.
void hestenes_sweeps(Matrix& work, Matrix& v) {
  const std::size_t m = work.rows();
  const std::size_t n = work.cols();
  const double tol = std::numeric_limits<double>::epsilon() * static_cast<double>(m);
  constexpr int kMaxSweeps = 100;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    double worst = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          alpha += work(k, p) * work(k, p);
          beta += work(k, q) * work(k, q);
          gamma += work(k, p) * work(k, q);
        }
        if (alpha == 0.0 || beta == 0.0) continue;
        const double rel = std::abs(gamma) / std::sqrt(alpha * beta);
        worst = std::max(worst, rel);
        if (rel <= tol) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < m; ++k) {
          const double wp = work(k, p);
          const double wq = work(k, q);
          work(k, p) = c * wp - s * wq;
          work(k, q) = s * wp + c * wq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vp = v(k, p);
          const double vq = v(k, q);
          v(k, p) = c * vp - s * vq;
          v(k, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) return;
    if (sweep + 1 == kMaxSweeps) {
      throw ConvergenceError("svd_thin: no convergence after 100 sweeps", worst);
    }
  }
}

// Replaces column j of u by a unit vector orthogonal to columns [0, j).
void complete_column(Matrix& u, std::size_t j) {
  for (std::size_t e = 0; e < u.rows(); ++e) {
    Vector cand(u.rows(), 0.0);
    cand[e] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double proj = 0.0;
        for (std::size_t i = 0; i < u.rows(); ++i) proj += u(i, k) * cand[i];
        for (std::size_t i = 0; i < u.rows(); ++i) cand[i] -= proj * u(i, k);
      }
    }
    const double nrm = norm2(cand);
    if (nrm > 0.5) {
      for (double& x : cand) x /= nrm;
      u.set_col(j, cand);
      return;
    }
  }
  throw NumericalError("svd_thin: could not complete left singular basis");
}

}  // namespace

ThinSvd svd_thin(const Matrix& m, std::size_t r) {
  if (m.empty()) throw InvalidArgument("svd_thin: empty matrix");
  const std::size_t min_dim = std::min(m.rows(), m.cols());
  if (r < 1 || r > min_dim) {
    throw InvalidArgument("svd_thin: rank " + std::to_string(r) + " outside [1, " +
                          std::to_string(min_dim) + "] for " + m.shape());
  }
  if (!all_finite(m.data())) throw InvalidArgument("svd_thin: input has non-finite entries");

  const bool wide = m.rows() < m.cols();
  Matrix work = wide ? transpose(m) : m;
  const std::size_t n = work.cols();
  Matrix v = Matrix::identity(n);
  hestenes_sweeps(work, v);

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2(work.col(j));
  const auto order = descending_order(sigma);
  const double sigma_max = sigma[order[0]];
  const double negligible =
      sigma_max * static_cast<double>(std::max(work.rows(), n)) * 1e-15;

  Matrix u_r(work.rows(), r);
  Matrix v_r(n, r);
  std::vector<double> sigma_r(r);
  for (std::size_t j = 0; j < r; ++j) {
    const std::size_t src = order[j];
    sigma_r[j] = sigma[src];
    for (std::size_t i = 0; i < n; ++i) v_r(i, j) = v(i, src);
    if (sigma[src] > negligible && sigma[src] > 0.0) {
      for (std::size_t i = 0; i < work.rows(); ++i) u_r(i, j) = work(i, src) / sigma[src];
    } else {
      complete_column(u_r, j);
    }
  }

  // SVD of mᵀ = U Σ Vᵀ gives m = V Σ Uᵀ.
  ThinSvd out = wide ? ThinSvd{std::move(v_r), std::move(sigma_r), std::move(u_r)}
                     : ThinSvd{std::move(u_r), std::move(sigma_r), std::move(v_r)};
  for (std::size_t j = 0; j < r; ++j) {
    if (canonicalize_column_sign(out.v, j)) {
      for (std::size_t i = 0; i < out.u.rows(); ++i) out.u(i, j) = -out.u(i, j);
    }
  }
  return out;
}

}  // namespace sclora
