// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#include "sclora/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "sclora/errors.hpp"
#include "sclora/linalg.hpp"
#include "sclora/random.hpp"
#include "sclora/subspace.hpp"

namespace sclora {

namespace {

// Stream indices under a cell seed.
constexpr std::uint64_t kDataStream = 0;
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kTrainStream = 2;

TaskSet make_task(const Matrix& inputs, const Matrix& weight) {
  Matrix targets(inputs.rows(), weight.rows());
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    const Vector y = mat_vec(weight, inputs.row(i));
    std::copy(y.begin(), y.end(), targets.row(i).begin());
  }
  return TaskSet{inputs, std::move(targets)};
}

void require_task_shapes(const AdapterPair& p, const TaskSet& task, const char* who) {
  if (task.inputs.cols() != p.d_in() || task.targets.cols() != p.d_out() ||
      task.inputs.rows() != task.targets.rows()) {
    throw DimensionMismatch(std::string(who) + ": task inputs " + task.inputs.shape() +
                            " / targets " + task.targets.shape() +
                            " do not fit adapter d_in=" + std::to_string(p.d_in()) +
                            " d_out=" + std::to_string(p.d_out()));
  }
}

}  // namespace

Matrix draw_task_inputs(const Matrix& u, std::size_t n, Rng& rng) {
  Matrix x(n, u.rows());
  for (std::size_t s = 0; s < n; ++s) {
    const Vector z = gaussian_vector(u.cols(), rng);
    const Vector row = mat_vec(u, z);
    std::copy(row.begin(), row.end(), x.row(s).begin());
  }
  return x;
}

GeneratedProblem gen_two_task_data(const GenConfig& config) {
  if (config.r_plus < 1 || config.r_minus < 1 ||
      config.r_plus + config.r_minus > config.d_in) {
    throw InvalidArgument("gen_two_task_data: need 1 <= r_plus, r_minus and r_plus + r_minus <= "
                          "d_in, got r_plus=" + std::to_string(config.r_plus) +
                          " r_minus=" + std::to_string(config.r_minus) +
                          " d_in=" + std::to_string(config.d_in));
  }
  if (config.n_plus < 1 || config.n_minus < 1 || config.d_out < 1) {
    throw InvalidArgument("gen_two_task_data: sample counts and d_out must be positive");
  }
  if (!(config.overlap_cosine >= 0.0 && config.overlap_cosine <= 1.0)) {
    throw InvalidArgument("gen_two_task_data: overlap_cosine must lie in [0, 1]");
  }

  Rng rng = make_rng(config.seed, kDataStream);

  Matrix w0 = gaussian_matrix(config.d_out, config.d_in, rng);
  for (std::size_t i = 0; i < w0.rows(); ++i) {
    const double n = norm2(w0.row(i));
    for (double& v : w0.row(i)) v /= n;
  }

  // Joint orthonormalization makes the two subspaces exactly orthogonal.
  const Matrix joint = random_orthonormal(config.d_in, config.r_plus + config.r_minus, rng);
  Matrix u_plus(config.d_in, config.r_plus);
  Matrix u_minus(config.d_in, config.r_minus);
  const double c = config.overlap_cosine;
  const double s = std::sqrt(1.0 - c * c);
  for (std::size_t i = 0; i < config.d_in; ++i) {
    for (std::size_t j = 0; j < config.r_plus; ++j) u_plus(i, j) = joint(i, j);
    for (std::size_t j = 0; j < config.r_minus; ++j) {
      const double own = joint(i, config.r_plus + j);
      u_minus(i, j) = (c != 0.0 && j < config.r_plus) ? s * own + c * joint(i, j) : own;
    }
  }

  Matrix g = gaussian_matrix(config.d_out, config.d_in, rng);
  const double scale = 0.5 * frobenius_norm(w0) / frobenius_norm(g);
  Matrix w_target = w0 + scale * g;

  const Matrix x_plus = draw_task_inputs(u_plus, config.n_plus, rng);
  const Matrix x_minus = draw_task_inputs(u_minus, config.n_minus, rng);

  TwoTaskDataset data{make_task(x_plus, w_target), make_task(x_minus, w0), config.d_in,
                      config.d_out, config};
  return GeneratedProblem{std::move(w0), std::move(w_target), std::move(u_plus),
                          std::move(u_minus), std::move(data)};
}

Gradients loss_and_gradients(const AdapterPair& p, const TaskSet& task,
                             std::span<const std::size_t> rows) {
  require_task_shapes(p, task, "loss_and_gradients");
  if (rows.empty()) throw InvalidArgument("loss_and_gradients: empty batch");
  const std::size_t r = p.rank;
  const std::size_t d_in = p.d_in();
  const std::size_t d_out = p.d_out();

  Gradients g{0.0, Matrix(r, d_in), Matrix(d_out, r)};
  Vector err(d_out);
  Vector bt_err(r);
  for (std::size_t idx : rows) {
    const auto x = task.inputs.row(idx);
    const auto y = task.targets.row(idx);
    const Vector ax = mat_vec(p.a, x);
    const Vector wx = mat_vec(p.w_res, x);
    const Vector bax = mat_vec(p.b, ax);
    double sq = 0.0;
    for (std::size_t i = 0; i < d_out; ++i) {
      err[i] = wx[i] + bax[i] - y[i];
      sq += err[i] * err[i];
    }
    g.loss += sq;

    // dL/dB += err (Ax)ᵀ ; dL/dA += (Bᵀ err) xᵀ
    std::fill(bt_err.begin(), bt_err.end(), 0.0);
    for (std::size_t i = 0; i < d_out; ++i) {
      auto brow = p.b.row(i);
      auto gbrow = g.grad_b.row(i);
      for (std::size_t k = 0; k < r; ++k) {
        gbrow[k] += err[i] * ax[k];
        bt_err[k] += brow[k] * err[i];
      }
    }
    for (std::size_t k = 0; k < r; ++k) {
      auto garow = g.grad_a.row(k);
      for (std::size_t j = 0; j < d_in; ++j) garow[j] += bt_err[k] * x[j];
    }
  }
  const double n = static_cast<double>(rows.size());
  g.loss /= n;
  for (double& v : g.grad_a.data()) v *= 2.0 / n;
  for (double& v : g.grad_b.data()) v *= 2.0 / n;
  return g;
}

double task_loss(const AdapterPair& p, const TaskSet& task) {
  require_task_shapes(p, task, "task_loss");
  double total = 0.0;
  for (std::size_t s = 0; s < task.size(); ++s) {
    const Vector out = adapted_forward(p, task.inputs.row(s));
    const auto y = task.targets.row(s);
    for (std::size_t i = 0; i < out.size(); ++i) total += (out[i] - y[i]) * (out[i] - y[i]);
  }
  return total / static_cast<double>(task.size());
}

TrainResult train_adapter(AdapterPair p, const TwoTaskDataset& data, const TrainConfig& cfg) {
  p.validate();
  require_task_shapes(p, data.plus, "train_adapter");
  if (cfg.steps < 1) throw InvalidArgument("train_adapter: steps must be at least 1");
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw InvalidArgument("train_adapter: learning rate must be positive");
  }
  if (cfg.batch_size < 1) throw InvalidArgument("train_adapter: batch size must be at least 1");

  const std::size_t n = data.plus.size();
  const std::size_t batch = std::min(cfg.batch_size, n);
  Rng rng = make_rng(cfg.seed, kTrainStream);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = n;  // forces a shuffle on the first step

  std::vector<double> trace;
  trace.reserve(cfg.steps);
  std::vector<std::size_t> rows(batch);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    for (std::size_t k = 0; k < batch; ++k) {
      if (cursor == n) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      rows[k] = order[cursor++];
    }
    const Gradients g = loss_and_gradients(p, data.plus, rows);
    if (!std::isfinite(g.loss)) throw DivergenceError(step);
    trace.push_back(g.loss);

    auto a = p.a.data();
    auto ga = g.grad_a.data();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= cfg.learning_rate * ga[i];
    auto b = p.b.data();
    auto gb = g.grad_b.data();
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= cfg.learning_rate * gb[i];
    if (!all_finite(p.a.data()) || !all_finite(p.b.data())) throw DivergenceError(step);
  }
  return TrainResult{std::move(p), std::move(trace)};
}

double eval_preservation(const AdapterPair& p, const TwoTaskDataset& data, const Matrix& w0) {
  require_same_shape(p.w_res, w0, "eval_preservation");
  const Matrix merged = merge_adapter(p);
  const TaskSet& minus = data.minus;
  double total = 0.0;
  for (std::size_t s = 0; s < minus.size(); ++s) {
    const auto x = minus.inputs.row(s);
    const Vector adapted = mat_vec(merged, x);
    const Vector original = mat_vec(w0, x);
    for (std::size_t i = 0; i < adapted.size(); ++i) {
      const double d = adapted[i] - original[i];
      total += d * d;
    }
  }
  return total / static_cast<double>(minus.size());
}

double containment_drift(const AdapterPair& p, const TaskSet& task, const Matrix& q) {
  if (q.rows() != p.d_out()) {
    throw DimensionMismatch("containment_drift: basis rows " + std::to_string(q.rows()) +
                            " vs d_out " + std::to_string(p.d_out()));
  }
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t s = 0; s < task.size(); ++s) {
    const Vector bax = mat_vec(p.b, mat_vec(p.a, task.inputs.row(s)));
    const double out_norm = dot(bax, bax);
    if (out_norm == 0.0) continue;
    const Vector inside = mat_vec(q, mat_tvec(q, bax));
    double outside = 0.0;
    for (std::size_t i = 0; i < bax.size(); ++i) {
      outside += (bax[i] - inside[i]) * (bax[i] - inside[i]);
    }
    total += outside / out_norm;
    ++counted;
  }
  return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

CellSetup prepare_cell(const SweepConfig& cfg, std::uint64_t seed) {
  GenConfig gen = cfg.gen;
  gen.seed = seed;
  GeneratedProblem problem = gen_two_task_data(gen);
  if (cfg.init_samples < 1) throw InvalidArgument("sweep: init_samples must be at least 1");

  Rng rng = make_rng(seed, kInitStream);
  auto covariance_of = [&](const Matrix& u) {
    const Matrix x = draw_task_inputs(u, cfg.init_samples, rng);
    CovAccumulator acc(problem.w0.rows());
    for (std::size_t s = 0; s < x.rows(); ++s) acc.add_reduced(mat_vec(problem.w0, x.row(s)), 1);
    return finalize(acc);
  };
  CovarianceMatrix cov_pos = covariance_of(problem.u_plus);
  CovarianceMatrix cov_neg = covariance_of(problem.u_minus);
  return CellSetup{std::move(problem), std::move(cov_pos), std::move(cov_neg)};
}

SweepRecord run_cell(const SweepConfig& cfg, const CellSetup& setup, double beta,
                     std::uint64_t seed) {
  const SymmetricMatrix delta = delta_cov(setup.cov_pos, setup.cov_neg, beta);
  SubspaceSelection sel = select_subspace(delta, cfg.rank);
  const AdapterPair init = init_sc_lora(setup.problem.w0, sel.basis);

  const TrainConfig train{cfg.steps, cfg.learning_rate, cfg.batch_size, seed};
  TrainResult result = train_adapter(init, setup.problem.data, train);

  SweepRecord rec;
  rec.beta = beta;
  rec.seed = seed;
  rec.final_plus_loss = task_loss(result.trained, setup.problem.data.plus);
  rec.preservation_drift =
      eval_preservation(result.trained, setup.problem.data, setup.problem.w0);
  rec.containment_drift =
      containment_drift(result.trained, setup.problem.data.plus, sel.basis.columns());
  rec.loss_trace = std::move(result.trace);
  rec.basis = sel.basis.columns();
  rec.warnings = std::move(sel.warnings);
  return rec;
}

SweepReport beta_sweep(const SweepConfig& cfg) {
  if (cfg.betas.empty() || cfg.seeds.empty()) {
    throw InvalidArgument("beta_sweep: betas and seeds must be non-empty");
  }
  for (double b : cfg.betas) {
    if (!(b >= 0.0 && b <= 1.0)) throw InvalidArgument("beta_sweep: beta outside [0, 1]");
  }

  const std::size_t n_beta = cfg.betas.size();
  const std::size_t n_seed = cfg.seeds.size();
  std::vector<SweepRecord> records(n_beta * n_seed);

  // One work item per seed: the β-independent setup is shared by its cells.
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t si = next++; si < n_seed; si = next++) {
      try {
        const CellSetup setup = prepare_cell(cfg, cfg.seeds[si]);
        for (std::size_t bi = 0; bi < n_beta; ++bi) {
          records[bi * n_seed + si] = run_cell(cfg, setup, cfg.betas[bi], cfg.seeds[si]);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(cfg.threads, 1, n_seed);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  SweepReport report;
  report.seeds = cfg.seeds;
  for (std::size_t bi = 0; bi < n_beta; ++bi) {
    SweepSummaryRow row;
    row.beta = cfg.betas[bi];
    row.seeds = n_seed;
    for (std::size_t si = 0; si < n_seed; ++si) {
      const SweepRecord& rec = records[bi * n_seed + si];
      row.mean_plus_loss += rec.final_plus_loss;
      row.mean_preservation_drift += rec.preservation_drift;
      row.mean_containment_drift += rec.containment_drift;
    }
    row.mean_plus_loss /= static_cast<double>(n_seed);
    row.mean_preservation_drift /= static_cast<double>(n_seed);
    row.mean_containment_drift /= static_cast<double>(n_seed);
    report.summary.push_back(row);
  }
  report.records = std::move(records);
  return report;
}

bool follows_trend(std::span<const double> series, Trend trend, std::size_t max_inversions,
                   double max_relative) {
  std::size_t inversions = 0;
  for (std::size_t i = 0; i + 1 < series.size(); ++i) {
    const double prev = series[i];
    const double next = series[i + 1];
    const double excess = trend == Trend::kNonIncreasing ? next - prev : prev - next;
    if (excess <= 0.0) continue;
    ++inversions;
    if (inversions > max_inversions) return false;
    if (excess > max_relative * std::abs(prev)) return false;
  }
  return true;
}

}  // namespace sclora
