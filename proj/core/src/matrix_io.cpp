// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#include "sclora/matrix_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sclora/errors.hpp"

namespace sclora {

namespace {

// Guards against absurd headers allocating gigabytes before failing.
constexpr std::uint64_t kMaxEntries = std::uint64_t{1} << 28;

std::uint64_t decode_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
  return v;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string(), 0, "cannot open file for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void write_matrix(std::ostream& out, const Matrix& m) {
  out.write(kMatrixMagic, 4);
  out.put(static_cast<char>(kMatrixVersion));
  put_u64(out, m.rows());
  put_u64(out, m.cols());
  for (double v : m.data()) put_f64(out, v);
}

std::vector<char> encode_matrix(const Matrix& m) {
  std::ostringstream ss(std::ios::binary);
  write_matrix(ss, m);
  const std::string s = ss.str();
  return {s.begin(), s.end()};
}

MatrixRecordReader::MatrixRecordReader(std::istream& in, std::string source,
                                       std::uint64_t start_offset)
    : in_(in), source_(std::move(source)), offset_(start_offset) {}

void MatrixRecordReader::read_exact(char* dst, std::size_t n, const char* what) {
  in_.read(dst, static_cast<std::streamsize>(n));
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (got != n) {
    throw FormatError(source_, offset_ + got,
                      std::string("truncated record while reading ") + what);
  }
  offset_ += n;
}

std::optional<Matrix> MatrixRecordReader::next() {
  if (in_.peek() == std::char_traits<char>::eof()) return std::nullopt;

  char magic[4];
  const std::uint64_t record_start = offset_;
  read_exact(magic, 4, "magic");
  if (std::memcmp(magic, kMatrixMagic, 4) != 0) {
    throw FormatError(source_, record_start, "bad magic, expected \"SCLM\"");
  }
  char version = 0;
  read_exact(&version, 1, "version");
  if (static_cast<std::uint8_t>(version) != kMatrixVersion) {
    throw FormatError(source_, offset_ - 1,
                      "unsupported version " +
                          std::to_string(static_cast<unsigned>(
                              static_cast<unsigned char>(version))));
  }
  char dims[16];
  read_exact(dims, 16, "dimensions");
  const std::uint64_t rows = decode_u64(dims);
  const std::uint64_t cols = decode_u64(dims + 8);
  if (rows == 0 || cols == 0 || rows > kMaxEntries || cols > kMaxEntries ||
      rows * cols > kMaxEntries) {
    throw FormatError(source_, offset_ - 16,
                      "invalid dimensions " + std::to_string(rows) + "x" + std::to_string(cols));
  }

  std::vector<double> data(rows * cols);
  std::vector<char> raw(data.size() * 8);
  const std::uint64_t payload_start = offset_;
  read_exact(raw.data(), raw.size(), "payload");
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<double>(decode_u64(raw.data() + 8 * i));
    if (!std::isfinite(data[i])) {
      throw FormatError(source_, payload_start + 8 * i, "non-finite matrix entry");
    }
  }
  return Matrix(rows, cols, std::move(data));
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(std::istream& in, const std::string& source) {
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::uint64_t offset = 0;
  std::string line;
  while (std::getline(in, line)) {
    const std::uint64_t line_start = offset;
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::size_t count = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc() || !std::isfinite(v)) {
        throw FormatError(source, line_start + static_cast<std::uint64_t>(p - line.data()),
                          "expected a finite number");
      }
      data.push_back(v);
      ++count;
      p = res.ptr;
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      if (p == end) break;
      if (*p != ',') {
        throw FormatError(source, line_start + static_cast<std::uint64_t>(p - line.data()),
                          "expected ',' between values");
      }
      ++p;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw FormatError(source, line_start,
                        "row has " + std::to_string(count) + " values, expected " +
                            std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw FormatError(source, 0, "no numeric rows");
  return Matrix(rows, cols, std::move(data));
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_output(path);
  write_matrix(out, m);
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

void save_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_output(path);
  write_matrix_csv(out, m);
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

Matrix load_matrix(const std::filesystem::path& path) {
  auto in = open_input(path);
  char head[4] = {};
  in.read(head, 4);
  const bool binary = in.gcount() == 4 && std::memcmp(head, kMatrixMagic, 4) == 0;
  in.clear();
  in.seekg(0);
  if (!binary) return read_matrix_csv(in, path.string());

  MatrixRecordReader reader(in, path.string());
  auto m = reader.next();
  if (!m) throw FormatError(path.string(), 0, "empty file");
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(path.string(), reader.offset(), "trailing bytes after matrix record");
  }
  return std::move(*m);
}

std::vector<Matrix> load_matrix_records(const std::filesystem::path& path) {
  auto in = open_input(path);
  MatrixRecordReader reader(in, path.string());
  std::vector<Matrix> out;
  while (auto m = reader.next()) out.push_back(std::move(*m));
  if (out.empty()) throw FormatError(path.string(), 0, "no matrix records");
  return out;
}

}  // namespace sclora
