// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sclora/matrix.hpp"

namespace sclora {

// Binary matrix record:
//   "SCLM" | u8 version (=1) | u64 rows | u64 cols | rows*cols f64, row-major
// All integers and doubles are little-endian.
inline constexpr char kMatrixMagic[4] = {'S', 'C', 'L', 'M'};
inline constexpr std::uint8_t kMatrixVersion = 1;

void write_matrix(std::ostream& out, const Matrix& m);
std::vector<char> encode_matrix(const Matrix& m);

/// Reads consecutive matrix records from a stream, tracking the byte offset
/// so errors can point at the offending record.
class MatrixRecordReader {
 public:
  MatrixRecordReader(std::istream& in, std::string source, std::uint64_t start_offset = 0);

  /// Next record, or nullopt at a clean end of stream.
  std::optional<Matrix> next();
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  void read_exact(char* dst, std::size_t n, const char* what);

  std::istream& in_;
  std::string source_;
  std::uint64_t offset_;
};

/// Headerless CSV, one matrix row per line, written with round-trip precision.
void write_matrix_csv(std::ostream& out, const Matrix& m);
Matrix read_matrix_csv(std::istream& in, const std::string& source);

void save_matrix(const std::filesystem::path& path, const Matrix& m);
void save_matrix_csv(const std::filesystem::path& path, const Matrix& m);

/// Loads a single matrix; binary when the file starts with the record magic,
/// CSV otherwise. Throws FormatError naming the file and byte offset.
Matrix load_matrix(const std::filesystem::path& path);

/// All records of a binary file (e.g. an activation dump).
std::vector<Matrix> load_matrix_records(const std::filesystem::path& path);

/// Low-level little-endian helpers, shared with the bundle container.
void put_u64(std::ostream& out, std::uint64_t v);
void put_f64(std::ostream& out, double v);

}  // namespace sclora
