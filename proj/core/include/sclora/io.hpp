// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sclora/adapter.hpp"
#include "sclora/covariance.hpp"
#include "sclora/matrix.hpp"
#include "sclora/subspace.hpp"
#include "sclora/trainer.hpp"

namespace sclora {

// Bundle container: a JSON header followed by matrix records.
//   "SCLB" | u8 version (=1) | u64 header bytes | UTF-8 JSON header
//   | u64 record count | matrix records (see matrix_io.hpp)
inline constexpr char kBundleMagic[4] = {'S', 'C', 'L', 'B'};
inline constexpr std::uint8_t kBundleVersion = 1;

struct Bundle {
  std::string header_json;
  std::vector<Matrix> records;
};

void save_bundle(const std::filesystem::path& path, const Bundle& bundle);
Bundle load_bundle(const std::filesystem::path& path);

struct AdapterMeta {
  std::optional<double> beta;
  std::optional<std::uint64_t> seed;
  std::vector<Warning> warnings;
};

struct AdapterFile {
  AdapterPair pair;
  AdapterMeta meta;
};

/// Header {kind, scheme, r, d_in, d_out, beta, seed, warnings}; records a, b, w_res.
void save_adapter(const std::filesystem::path& path, const AdapterPair& pair,
                  const AdapterMeta& meta);
AdapterFile load_adapter(const std::filesystem::path& path);

/// Header {kind, dim, sample_count, token_length}; one record.
void save_covariance(const std::filesystem::path& path, const CovarianceMatrix& cov);
/// Also accepts a bare matrix (binary or CSV); sample_count and token_length
/// are then 0, meaning unknown.
CovarianceMatrix load_covariance(const std::filesystem::path& path);

/// report.csv, summary.csv, containment columns in summary, and one
/// trace_<beta>_<seed>.csv per cell.
void write_sweep_report(const std::filesystem::path& dir, const SweepReport& report);

/// Shortest round-trip decimal form.
std::string format_number(double v);

}  // namespace sclora
