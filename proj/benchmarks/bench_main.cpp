// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "sclora/adapter.hpp"
#include "sclora/covariance.hpp"
#include "sclora/linalg.hpp"
#include "sclora/random.hpp"
#include "sclora/subspace.hpp"
#include "sclora/trainer.hpp"

namespace {

using namespace sclora;

void BM_EigSym(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  Rng rng = make_rng(1);
  const SymmetricMatrix m = random_symmetric(dim, rng);
  for (auto _ : state) benchmark::DoNotOptimize(eig_sym(m));
}
BENCHMARK(BM_EigSym)->Arg(16)->Arg(32)->Arg(64)->Arg(128);

void BM_SvdThin(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng = make_rng(2);
  const Matrix m = gaussian_matrix(n, n + n / 2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(svd_thin(m, 8));
}
BENCHMARK(BM_SvdThin)->Arg(32)->Arg(64);

void BM_CovarianceAccumulate(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const std::size_t tokens = 16;
  Rng rng = make_rng(3);
  const Matrix sample = gaussian_matrix(dim, tokens, rng);
  CovAccumulator acc(dim);
  for (auto _ : state) {
    acc.add({sample, ""});
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CovarianceAccumulate)->Arg(32)->Arg(128)->Arg(512);

void BM_SelectSubspace(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  Rng rng = make_rng(4);
  const SymmetricMatrix delta = random_symmetric(dim, rng);
  for (auto _ : state) benchmark::DoNotOptimize(select_subspace(delta, 8));
}
BENCHMARK(BM_SelectSubspace)->Arg(32)->Arg(64);

void BM_SweepCell(benchmark::State& state) {
  SweepConfig cfg;
  const CellSetup setup = prepare_cell(cfg, 0);
  for (auto _ : state) benchmark::DoNotOptimize(run_cell(cfg, setup, 0.5, 0));
}
BENCHMARK(BM_SweepCell)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
