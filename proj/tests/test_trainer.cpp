// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "sclora/errors.hpp"
#include "sclora/linalg.hpp"
#include "sclora/trainer.hpp"

using namespace sclora;

namespace {

GenConfig small_gen(std::uint64_t seed) {
  GenConfig g;
  g.d_in = 12;
  g.d_out = 10;
  g.r_plus = 3;
  g.r_minus = 3;
  g.n_plus = 40;
  g.n_minus = 30;
  g.seed = seed;
  return g;
}

SweepConfig small_sweep() {
  SweepConfig cfg;
  cfg.gen = small_gen(0);
  cfg.rank = 3;
  cfg.init_samples = 40;
  cfg.betas = {0.0, 0.5, 0.9};
  cfg.seeds = {3, 4};
  cfg.steps = 60;
  cfg.learning_rate = 1e-2;
  cfg.batch_size = 8;
  return cfg;
}

double drift_via_forward(const AdapterPair& p, const TwoTaskDataset& data, const Matrix& w0) {
  double total = 0.0;
  for (std::size_t s = 0; s < data.minus.size(); ++s) {
    const Vector x(data.minus.inputs.row(s).begin(), data.minus.inputs.row(s).end());
    const Vector d = axpy(-1.0, mat_vec(w0, x), adapted_forward(p, x));
    total += dot(d, d);
  }
  return total / static_cast<double>(data.minus.size());
}

}  // namespace

TEST_CASE("gen_two_task_data: pairs satisfy their defining maps") {
  GenConfig g = small_gen(11);
  g.n_plus = g.n_minus = 1;
  const GeneratedProblem p = gen_two_task_data(g);
  const auto xp = p.data.plus.inputs.row(0);
  const auto xm = p.data.minus.inputs.row(0);
  const Vector yp = mat_vec(p.w_target, xp);
  const Vector ym = mat_vec(p.w0, xm);
  CHECK(std::equal(yp.begin(), yp.end(), p.data.plus.targets.row(0).begin()));
  CHECK(std::equal(ym.begin(), ym.end(), p.data.minus.targets.row(0).begin()));
}

TEST_CASE("gen_two_task_data: structure of the generated problem") {
  const GeneratedProblem p = gen_two_task_data(small_gen(12));
  const Matrix cross = mat_tmul(p.u_plus, p.u_minus);
  for (double v : cross.data()) CHECK(std::abs(v) <= 1e-10);

  for (std::size_t i = 0; i < p.w0.rows(); ++i) CHECK(std::abs(norm2(p.w0.row(i)) - 1.0) <= 1e-12);
  CHECK(std::abs(frobenius_norm(p.w_target - p.w0) - 0.5 * frobenius_norm(p.w0)) <= 1e-12);

  // Inputs lie in their task subspace.
  const Matrix proj_minus = oracle::projector(p.u_minus);
  for (std::size_t s = 0; s < p.data.minus.size(); ++s) {
    const auto x = p.data.minus.inputs.row(s);
    CHECK(norm2(axpy(-1.0, mat_vec(proj_minus, x), x)) <= 1e-12 * norm2(x));
  }

  const GeneratedProblem again = gen_two_task_data(small_gen(12));
  CHECK(again.w0 == p.w0);
  CHECK(again.data.plus.inputs == p.data.plus.inputs);
  CHECK_FALSE(gen_two_task_data(small_gen(13)).w0 == p.w0);
}

TEST_CASE("gen_two_task_data: overlap knob sets principal cosines") {
  GenConfig g = small_gen(14);
  g.overlap_cosine = 0.6;
  const GeneratedProblem p = gen_two_task_data(g);
  CHECK(orthonormality_error(p.u_minus) <= 1e-12);
  const auto svd = svd_thin(mat_tmul(p.u_plus, p.u_minus), 3);
  for (double s : svd.sigma) CHECK(std::abs(s - 0.6) <= 1e-12);
}

TEST_CASE("gen_two_task_data: bounds") {
  GenConfig g = small_gen(1);
  g.r_plus = 7;
  g.r_minus = 6;
  CHECK_THROWS_AS(gen_two_task_data(g), InvalidArgument);
  g = small_gen(1);
  g.n_minus = 0;
  CHECK_THROWS_AS(gen_two_task_data(g), InvalidArgument);
}

TEST_CASE("eval_preservation: zero at init for every scheme") {
  const GeneratedProblem p = gen_two_task_data(small_gen(20));
  const auto sel = select_subspace(symmetrize(Matrix::identity(10)), 3);
  for (const AdapterPair& a :
       {init_sc_lora(p.w0, sel.basis), init_vanilla(p.w0, 3, 1), init_pissa(p.w0, 3)}) {
    CHECK(eval_preservation(a, p.data, p.w0) <= 1e-18);
  }
}

TEST_CASE("eval_preservation: doubled weight drifts by the full output energy") {
  const GeneratedProblem p = gen_two_task_data(small_gen(21));
  AdapterPair a;
  a.b = 2.0 * Matrix::identity(10);
  a.a = p.w0;
  a.w_res = Matrix(10, 12);
  a.rank = 10;
  double expected = 0.0;
  for (std::size_t s = 0; s < p.data.minus.size(); ++s) {
    const Vector y = mat_vec(p.w0, p.data.minus.inputs.row(s));
    expected += dot(y, y);
  }
  expected /= static_cast<double>(p.data.minus.size());
  CHECK(std::abs(eval_preservation(a, p.data, p.w0) - expected) <= 1e-12 * expected);
}

TEST_CASE("eval_preservation: merged and factored routes agree") {
  const GeneratedProblem p = gen_two_task_data(small_gen(22));
  AdapterPair a = init_pissa(p.w0, 3);
  Rng rng = make_rng(5);
  a.a = a.a + gaussian_matrix(3, 12, rng, 0.2);
  a.b = a.b + gaussian_matrix(10, 3, rng, 0.2);
  CHECK(std::abs(eval_preservation(a, p.data, p.w0) - drift_via_forward(a, p.data, p.w0)) <= 1e-10);
}

TEST_CASE("loss_and_gradients matches central finite differences") {
  const GeneratedProblem p = gen_two_task_data(small_gen(30));
  Rng rng = make_rng(31);
  AdapterPair a = init_vanilla(p.w0, 3, 2);
  a.b = gaussian_matrix(10, 3, rng, 0.5);  // b = 0 would make ∂/∂a vanish
  std::vector<std::size_t> rows(p.data.plus.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;

  const Gradients g = loss_and_gradients(a, p.data.plus, rows);
  auto loss = [&] { return task_loss(a, p.data.plus); };
  CHECK(std::abs(g.loss - loss()) <= 1e-12 * g.loss);

  std::uniform_int_distribution<std::size_t> pick_a(0, a.a.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_b(0, a.b.size() - 1);
  for (int t = 0; t < 20; ++t) {
    const std::size_t ia = pick_a(rng);
    const double fd_a = oracle::central_difference(loss, &a.a.data()[ia], 1e-5);
    CHECK(std::abs(fd_a - g.grad_a.data()[ia]) <= 1e-4 * std::max(1e-6, std::abs(fd_a)));
    const std::size_t ib = pick_b(rng);
    const double fd_b = oracle::central_difference(loss, &a.b.data()[ib], 1e-5);
    CHECK(std::abs(fd_b - g.grad_b.data()[ib]) <= 1e-4 * std::max(1e-6, std::abs(fd_b)));
  }
}

TEST_CASE("train_adapter: vanishing learning rate freezes the dynamics") {
  const GeneratedProblem p = gen_two_task_data(small_gen(40));
  const AdapterPair init = init_pissa(p.w0, 3);
  const TrainResult r = train_adapter(init, p.data, TrainConfig{5, 1e-12, 40, 1});
  CHECK(max_abs_diff(r.trained.a, init.a) <= 1e-9);
  CHECK(max_abs_diff(r.trained.b, init.b) <= 1e-9);
  REQUIRE(r.trace.size() == 5);
  for (double v : r.trace) CHECK(std::abs(v - r.trace.front()) <= 1e-9);
}

TEST_CASE("train_adapter: single full-rank pair converges") {
  const std::size_t d = 4;
  Rng rng = make_rng(41);
  const Matrix w0 = gaussian_matrix(d, d, rng);
  TwoTaskDataset data;
  data.d_in = data.d_out = d;
  const Vector x = gaussian_vector(d, rng);
  const Vector y = gaussian_vector(d, rng);
  data.plus = TaskSet{transpose(Matrix::column(x)), transpose(Matrix::column(y))};
  data.minus = data.plus;

  const AdapterPair init =
      init_sc_lora(w0, OrthonormalBasis::from_columns(random_orthonormal(d, d, rng)));
  const double initial = task_loss(init, data.plus);
  const TrainResult r = train_adapter(init, data, TrainConfig{2000, 1e-2, 1, 0});
  CHECK(task_loss(r.trained, data.plus) < 1e-3 * initial);
}

TEST_CASE("train_adapter: residual frozen, trace finite, deterministic") {
  const GeneratedProblem p = gen_two_task_data(small_gen(50));
  const AdapterPair init = init_pissa(p.w0, 3);
  const TrainConfig cfg{100, 1e-2, 8, 9};
  const TrainResult r1 = train_adapter(init, p.data, cfg);
  const TrainResult r2 = train_adapter(init, p.data, cfg);
  CHECK(r1.trained.w_res == init.w_res);
  CHECK(all_finite(r1.trace));
  CHECK(r1.trace == r2.trace);
  CHECK(r1.trained.a == r2.trained.a);
  CHECK(r1.trained.b == r2.trained.b);
  CHECK(task_loss(r1.trained, p.data.plus) < task_loss(init, p.data.plus));
}

TEST_CASE("train_adapter: divergence names the step") {
  const GeneratedProblem p = gen_two_task_data(small_gen(51));
  try {
    (void)train_adapter(init_pissa(p.w0, 3), p.data, TrainConfig{500, 1e6, 8, 0});
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.step() < 500);
  }
}

TEST_CASE("train_adapter: config validation") {
  const GeneratedProblem p = gen_two_task_data(small_gen(52));
  const AdapterPair init = init_pissa(p.w0, 3);
  CHECK_THROWS_AS(train_adapter(init, p.data, TrainConfig{0, 1e-2, 8, 0}), InvalidArgument);
  CHECK_THROWS_AS(train_adapter(init, p.data, TrainConfig{5, 0.0, 8, 0}), InvalidArgument);
  CHECK_THROWS_AS(train_adapter(init, p.data, TrainConfig{5, 1e-2, 0, 0}), InvalidArgument);
}

TEST_CASE("containment_drift: zero at SC-LoRA init") {
  const GeneratedProblem p = gen_two_task_data(small_gen(60));
  const auto basis = OrthonormalBasis::from_columns(orthonormalize_columns(p.w0.left_cols(3)));
  const AdapterPair a = init_sc_lora(p.w0, basis);
  CHECK(containment_drift(a, p.data.plus, basis.columns()) <= 1e-20);
}

TEST_CASE("containment_drift: not preserved once b trains") {
  const GeneratedProblem p = gen_two_task_data(small_gen(61));
  const auto basis = OrthonormalBasis::from_columns(orthonormalize_columns(p.w0.left_cols(3)));
  const TrainResult trained = train_adapter(init_sc_lora(p.w0, basis), p.data, TrainConfig{100, 1e-2, 8, 0});
  CHECK(containment_drift(trained.trained, p.data.plus, basis.columns()) > 1e-8);
}

TEST_CASE("beta_sweep: identical seeds give identical records") {
  SweepConfig cfg = small_sweep();
  cfg.betas = {0.5};
  cfg.seeds = {7, 7};
  const SweepReport r = beta_sweep(cfg);
  REQUIRE(r.records.size() == 2);
  CHECK(r.records[0].final_plus_loss == r.records[1].final_plus_loss);
  CHECK(r.records[0].preservation_drift == r.records[1].preservation_drift);
  CHECK(r.records[0].loss_trace == r.records[1].loss_trace);
}

TEST_CASE("beta_sweep: thread count does not change the report") {
  SweepConfig cfg = small_sweep();
  const SweepReport serial = beta_sweep(cfg);
  cfg.threads = 2;
  const SweepReport parallel = beta_sweep(cfg);
  REQUIRE(serial.records.size() == parallel.records.size());
  for (std::size_t i = 0; i < serial.records.size(); ++i) {
    CHECK(serial.records[i].loss_trace == parallel.records[i].loss_trace);
    CHECK(serial.records[i].preservation_drift == parallel.records[i].preservation_drift);
  }
  CHECK(serial.summary.size() == 3);
  for (const auto& rec : serial.records) {
    CHECK(rec.final_plus_loss >= 0.0);
    CHECK(rec.preservation_drift >= 0.0);
    CHECK(all_finite(rec.loss_trace));
  }
}

TEST_CASE("beta_sweep: beta=0 basis spans the top eigenvectors of Cov+") {
  const SweepConfig cfg = small_sweep();
  const CellSetup setup = prepare_cell(cfg, 3);
  const SweepRecord rec = run_cell(cfg, setup, 0.0, 3);
  const auto eig = eig_sym(setup.cov_pos.matrix);
  CHECK(max_abs_diff(oracle::projector(rec.basis), oracle::projector(eig.eigenvectors.left_cols(3))) <=
        1e-8);
}

TEST_CASE("beta_sweep: empty lists rejected") {
  SweepConfig cfg = small_sweep();
  cfg.betas.clear();
  CHECK_THROWS_AS(beta_sweep(cfg), InvalidArgument);
  cfg = small_sweep();
  cfg.betas = {1.5};
  CHECK_THROWS_AS(beta_sweep(cfg), InvalidArgument);
}

TEST_CASE("follows_trend") {
  const std::vector<double> down{5, 4, 3, 2};
  CHECK(follows_trend(down, Trend::kNonIncreasing));
  CHECK_FALSE(follows_trend(down, Trend::kNonDecreasing));
  CHECK(follows_trend(std::vector<double>{5, 4, 4.3, 2}, Trend::kNonIncreasing));  // +7.5%
  CHECK_FALSE(follows_trend(std::vector<double>{5, 4, 4.5, 2}, Trend::kNonIncreasing));  // +12.5%
  CHECK_FALSE(follows_trend(std::vector<double>{5, 5.1, 4, 4.1}, Trend::kNonIncreasing));  // two
  CHECK(follows_trend(std::vector<double>{1, 1.05, 1.02, 2}, Trend::kNonDecreasing));
}
