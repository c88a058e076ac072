// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "sclora/errors.hpp"
#include "sclora/linalg.hpp"
#include "sclora/random.hpp"
#include "sclora/subspace.hpp"

using namespace sclora;

namespace {

CovarianceMatrix diag_cov(std::vector<double> d) {
  return CovarianceMatrix{symmetrize(Matrix::diagonal(d)), 1, 1};
}

OrthonormalBasis unit_basis(std::size_t dim, std::size_t index) {
  Matrix q(dim, 1);
  q(index, 0) = 1.0;
  return OrthonormalBasis::from_columns(q);
}

double top_sum(const SymmetricMatrix& m, std::size_t r) {
  const auto eig = eig_sym(m);
  double s = 0.0;
  for (std::size_t i = 0; i < r; ++i) s += eig.eigenvalues[i];
  return s;
}

}  // namespace

TEST_CASE("delta_cov endpoints and hand arithmetic") {
  Rng rng = make_rng(3);
  const Matrix x = gaussian_matrix(4, 4, rng);
  const Matrix y = gaussian_matrix(4, 4, rng);
  const SymmetricMatrix pos = symmetrize(mat_mul(x, transpose(x)));
  const SymmetricMatrix neg = symmetrize(mat_mul(y, transpose(y)));
  CHECK(delta_cov(pos, neg, 0.0).matrix() == pos.matrix());
  CHECK(delta_cov(pos, neg, 1.0).matrix() == -1.0 * neg.matrix());

  CHECK(delta_cov(diag_cov({4, 0}), diag_cov({0, 2}), 0.5).matrix() ==
        Matrix::diagonal(std::vector<double>{2, -1}));
}

TEST_CASE("delta_cov rejects bad beta and dims") {
  CHECK_THROWS_AS(delta_cov(diag_cov({1, 1}), diag_cov({1, 1}), 1.3), InvalidArgument);
  CHECK_THROWS_AS(delta_cov(diag_cov({1, 1}), diag_cov({1, 1}), -0.1), InvalidArgument);
  CHECK_THROWS_AS(delta_cov(diag_cov({1, 1}), diag_cov({1, 1, 1}), 0.5), DimensionMismatch);
}

TEST_CASE("select_subspace: diagonal") {
  const auto sel = select_subspace(symmetrize(Matrix::diagonal(std::vector<double>{2, -1})), 1);
  CHECK(sel.basis.columns() == Matrix::from_rows({{1}, {0}}));
  CHECK(sel.reward == 2.0);
  CHECK_FALSE(sel.degenerate());
}

TEST_CASE("select_subspace: recovers a planted subspace") {
  Rng rng = make_rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix q = random_orthonormal(4, 4, rng);
    const Matrix d = Matrix::diagonal(std::vector<double>{5, 1, 0, -3});
    const SymmetricMatrix m = symmetrize(oracle::naive_product(oracle::naive_product(q, d), transpose(q)));
    const auto sel = select_subspace(m, 2);
    CHECK(max_abs_diff(sel.basis.projector(), oracle::projector(q.left_cols(2))) <= 1e-8);
  }
}

TEST_CASE("select_subspace: full rank reward is the trace") {
  Rng rng = make_rng(12);
  const SymmetricMatrix m = random_symmetric(7, rng);
  const auto sel = select_subspace(m, 7);
  CHECK(std::abs(trace_reward(sel.basis, m) - trace(m.matrix())) <= 1e-9);
  CHECK(std::isinf(sel.gap));
}

TEST_CASE("select_subspace: rank out of range") {
  const SymmetricMatrix m = symmetrize(Matrix::identity(3));
  CHECK_THROWS_AS(select_subspace(m, 0), InvalidArgument);
  CHECK_THROWS_AS(select_subspace(m, 4), InvalidArgument);
}

TEST_CASE("select_subspace: degenerate gap warns but succeeds") {
  const auto sel = select_subspace(symmetrize(Matrix::diagonal(std::vector<double>{3, 1, 1, 0})), 2);
  CHECK(sel.degenerate());
  REQUIRE(sel.warnings.size() == 1);
  CHECK(sel.warnings[0].code == std::string(kWarnDegenerate));
  CHECK(sel.reward == 4.0);
  // Either e2 or e3 completes the basis; the reward is the same.
  CHECK(std::abs(trace_reward(sel.basis, symmetrize(Matrix::diagonal(std::vector<double>{3, 1, 1, 0}))) -
                 4.0) <= 1e-12);
}

TEST_CASE("project: fixed points, kernel, idempotence") {
  Rng rng = make_rng(21);
  const auto basis = OrthonormalBasis::from_columns(random_orthonormal(8, 3, rng));
  const Matrix& q = basis.columns();

  const Vector inside = mat_vec(q, gaussian_vector(3, rng));
  const Vector p_in = project(basis, inside);
  CHECK(norm2(axpy(-1.0, p_in, inside)) <= 1e-10 * norm2(inside));

  Vector outside = gaussian_vector(8, rng);
  outside = axpy(-1.0, mat_vec(q, mat_tvec(q, outside)), outside);
  CHECK(norm2(project(basis, outside)) <= 1e-10 * norm2(outside));

  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = gaussian_vector(8, rng);
    const Vector once = project(basis, x);
    const Vector twice = project(basis, once);
    CHECK(norm2(axpy(-1.0, twice, once)) <= 1e-10 * norm2(x));
  }
  CHECK_THROWS_AS(project(basis, Vector(7, 1.0)), DimensionMismatch);
}

TEST_CASE("projector is symmetric and idempotent") {
  Rng rng = make_rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const auto basis = OrthonormalBasis::from_columns(random_orthonormal(10, 1 + trial % 9, rng));
    const Matrix p = basis.projector();
    CHECK(frobenius_norm(mat_mul(p, p) - p) <= 1e-10);
    CHECK(frobenius_norm(p - transpose(p)) <= 1e-10);
  }
}

TEST_CASE("OrthonormalBasis rejects non-orthonormal columns") {
  CHECK_THROWS_AS(OrthonormalBasis::from_columns(Matrix(3, 2, 1.0)), InvalidArgument);
  CHECK_THROWS_AS(OrthonormalBasis::from_columns(Matrix::identity(3).left_cols(2) + Matrix(3, 2, 1e-6)),
                  InvalidArgument);
}

TEST_CASE("reward: hand arithmetic and beta=0 top eigenvector") {
  const RewardValue r = reward(unit_basis(2, 0), diag_cov({4, 0}), diag_cov({0, 2}), 0.5);
  CHECK(r.value == 2.0);
  CHECK(r.beta.value() == 0.5);
  CHECK(r.rank == 1);

  Rng rng = make_rng(4);
  const Matrix x = gaussian_matrix(5, 5, rng);
  const CovarianceMatrix pos{symmetrize(mat_mul(x, transpose(x))), 5, 1};
  const auto eig = eig_sym(pos.matrix);
  const auto top = OrthonormalBasis::from_columns(eig.eigenvectors.left_cols(1));
  CHECK(std::abs(reward(top, pos, diag_cov({1, 1, 1, 1, 1}), 0.0).value - eig.eigenvalues[0]) <=
        1e-9);
}

TEST_CASE("reward equals the sample expansion over the empirical sets") {
  Rng rng = make_rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t dim = 6;
    std::vector<Vector> xs_pos, xs_neg;
    CovAccumulator acc_pos(dim), acc_neg(dim);
    for (int i = 0; i < 40; ++i) {
      xs_pos.push_back(gaussian_vector(dim, rng, 2.0));
      acc_pos.add_reduced(xs_pos.back(), 1);
    }
    for (int i = 0; i < 25; ++i) {
      xs_neg.push_back(gaussian_vector(dim, rng));
      acc_neg.add_reduced(xs_neg.back(), 1);
    }
    const auto basis = OrthonormalBasis::from_columns(random_orthonormal(dim, 2, rng));
    const double beta = 0.1 * trial;
    const double expected = (1.0 - beta) * oracle::mean_projected_energy(basis.columns(), xs_pos) -
                            beta * oracle::mean_projected_energy(basis.columns(), xs_neg);
    const double got = reward(basis, finalize(acc_pos), finalize(acc_neg), beta).value;
    CHECK(std::abs(got - expected) <= 1e-10 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("reward_oracle_max never beats the eigen selection") {
  Rng rng = make_rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t dim = 4 + trial % 9;
    const SymmetricMatrix m = random_symmetric(dim, rng);
    const std::size_t r = 1 + trial % (dim - 1);
    const auto sel = select_subspace(m, r);
    CHECK(reward_oracle_max(m, r, 1000, trial).value <= trace_reward(sel.basis, m) + 1e-9);
    CHECK(std::abs(trace_reward(sel.basis, m) - top_sum(m, r)) <= 1e-9);
  }
}

TEST_CASE("reward_oracle_max on the identity") {
  const auto v = reward_oracle_max(symmetrize(Matrix::identity(6)), 3, 50, 1);
  CHECK(std::abs(v.value - 3.0) <= 1e-10);
  CHECK_FALSE(v.beta.has_value());
  CHECK_THROWS_AS(reward_oracle_max(symmetrize(Matrix::identity(6)), 3, 0, 1), InvalidArgument);
}

TEST_CASE("reward_oracle_max is reproducible") {
  Rng rng = make_rng(9);
  const SymmetricMatrix m = random_symmetric(6, rng);
  CHECK(reward_oracle_max(m, 2, 100, 5).value == reward_oracle_max(m, 2, 100, 5).value);
}

TEST_CASE("basis invariance under an r x r rotation") {
  Rng rng = make_rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const auto b1 = OrthonormalBasis::from_columns(random_orthonormal(9, 4, rng));
    const auto b2 = OrthonormalBasis::from_columns(mat_mul(b1.columns(), random_orthonormal(4, 4, rng)));
    const Matrix x = gaussian_matrix(9, 9, rng);
    const CovarianceMatrix pos{symmetrize(mat_mul(x, transpose(x))), 9, 1};
    const CovarianceMatrix neg{symmetrize(Matrix::identity(9)), 9, 1};
    CHECK(std::abs(reward(b1, pos, neg, 0.3).value - reward(b2, pos, neg, 0.3).value) <= 1e-10);
    CHECK(max_abs_diff(b1.projector(), b2.projector()) <= 1e-10);
  }
}

TEST_CASE("reward at beta=1 is never positive") {
  Rng rng = make_rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = gaussian_matrix(6, 3, rng);
    const CovarianceMatrix pos{symmetrize(Matrix::identity(6)), 1, 1};
    const CovarianceMatrix neg{symmetrize(mat_mul(x, transpose(x))), 3, 1};
    const auto basis = OrthonormalBasis::from_columns(random_orthonormal(6, 2, rng));
    CHECK(reward(basis, pos, neg, 1.0).value <= 0.0);
  }
}
