// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sclora/adapter.hpp"
#include "sclora/covariance.hpp"
#include "sclora/random.hpp"

namespace sclora {

/// Input/target pairs of one task; row i of each matrix is sample i.
struct TaskSet {
  Matrix inputs;   // n × d_in
  Matrix targets;  // n × d_out

  std::size_t size() const noexcept { return inputs.rows(); }
};

struct GenConfig {
  std::size_t d_in = 48;
  std::size_t d_out = 32;
  std::size_t r_plus = 8;
  std::size_t r_minus = 8;
  std::size_t n_plus = 256;
  std::size_t n_minus = 256;
  /// Cosine of the principal angles between the leading min(r_plus, r_minus)
  /// directions of the two input subspaces. 0 keeps them orthogonal.
  double overlap_cosine = 0.0;
  std::uint64_t seed = 0;
};

/// T₊ (fine-tune) and T₋ (preserve) data for one linear layer.
struct TwoTaskDataset {
  TaskSet plus;
  TaskSet minus;
  std::size_t d_in = 0;
  std::size_t d_out = 0;
  GenConfig config;
};

struct GeneratedProblem {
  Matrix w0;        // pretrained weight, unit-norm rows
  Matrix w_target;  // w0 + G with ‖G‖_F = 0.5‖w0‖_F
  Matrix u_plus;    // d_in × r_plus, orthonormal
  Matrix u_minus;   // d_in × r_minus, orthonormal
  TwoTaskDataset data;
};

/// T₋: x = U₋z, y = w0·x. T₊: x = U₊z, y = w_target·x. z ~ N(0, I).
/// Deterministic in config.seed.
GeneratedProblem gen_two_task_data(const GenConfig& config);

/// n inputs x = U·z drawn from `rng`, returned as rows.
Matrix draw_task_inputs(const Matrix& u, std::size_t n, Rng& rng);

struct TrainConfig {
  std::size_t steps = 500;
  double learning_rate = 1e-2;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

struct Gradients {
  double loss = 0.0;
  Matrix grad_a;
  Matrix grad_b;
};

/// MSE loss mean‖(w_res + b·a)x − y‖² over the selected rows and its exact
/// gradients with respect to a and b.
Gradients loss_and_gradients(const AdapterPair& p, const TaskSet& task,
                             std::span<const std::size_t> rows);

/// Loss over every sample of `task`.
double task_loss(const AdapterPair& p, const TaskSet& task);

struct TrainResult {
  AdapterPair trained;
  /// Mini-batch loss before each update, one entry per step.
  std::vector<double> trace;
};

/// Mini-batch gradient descent on T₊, updating only a and b. Batches walk a
/// per-epoch shuffle seeded from cfg.seed. Throws DivergenceError when a
/// step's loss is not finite.
TrainResult train_adapter(AdapterPair p, const TwoTaskDataset& data, const TrainConfig& cfg);

/// Mean over T₋ inputs of ‖merge_adapter(p)·x − w0·x‖².
double eval_preservation(const AdapterPair& p, const TwoTaskDataset& data, const Matrix& w0);

/// Mean over T₊ inputs of ‖(I − QQᵀ)·b·a·x‖² / ‖b·a·x‖²: how far the adapter
/// output has left span(Q). Zero at SC-LoRA initialization.
double containment_drift(const AdapterPair& p, const TaskSet& task, const Matrix& q);

struct SweepConfig {
  GenConfig gen;
  std::size_t rank = 8;
  /// Samples per task used only for the covariances, drawn separately from
  /// the training/evaluation data.
  std::size_t init_samples = 256;
  std::vector<double> betas{0.0, 0.25, 0.5, 0.75, 0.9};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::size_t steps = 500;
  double learning_rate = 1e-2;
  std::size_t batch_size = 32;
  std::size_t threads = 1;
};

struct SweepRecord {
  double beta = 0.0;
  std::uint64_t seed = 0;
  double final_plus_loss = 0.0;
  double preservation_drift = 0.0;
  double containment_drift = 0.0;
  std::vector<double> loss_trace;
  Matrix basis;
  std::vector<Warning> warnings;
};

struct SweepSummaryRow {
  double beta = 0.0;
  double mean_plus_loss = 0.0;
  double mean_preservation_drift = 0.0;
  double mean_containment_drift = 0.0;
  std::size_t seeds = 0;
};

struct SweepReport {
  /// Ordered by beta (outer) then seed (inner), matching the config lists.
  std::vector<SweepRecord> records;
  std::vector<SweepSummaryRow> summary;
  std::vector<std::uint64_t> seeds;
};

/// Everything a sweep cell needs that does not depend on β.
struct CellSetup {
  GeneratedProblem problem;
  CovarianceMatrix cov_pos;
  CovarianceMatrix cov_neg;
};

/// Generates the data for `seed` and the covariances of h = w0·x over
/// `init_samples` fresh inputs per task (one token per sample).
CellSetup prepare_cell(const SweepConfig& cfg, std::uint64_t seed);

SweepRecord run_cell(const SweepConfig& cfg, const CellSetup& setup, double beta,
                     std::uint64_t seed);

/// All (β, seed) cells. Cells run on up to cfg.threads workers; the report
/// does not depend on the thread count.
SweepReport beta_sweep(const SweepConfig& cfg);

enum class Trend { kNonIncreasing, kNonDecreasing };

/// True when `series` follows `trend` except for at most `max_inversions`
/// adjacent pairs, each off by at most `max_relative` of the earlier value.
bool follows_trend(std::span<const double> series, Trend trend,
                   std::size_t max_inversions = 1, double max_relative = 0.10);

}  // namespace sclora
