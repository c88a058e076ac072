// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace sclora {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Dimensions are always positive except
/// for the default-constructed (empty) value.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix column(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  Vector col(std::size_t j) const;
  void set_col(std::size_t j, std::span<const double> values);

  /// Leading `count` columns.
  Matrix left_cols(std::size_t count) const;

  std::string shape() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Square matrix with M(i,j) == M(j,i) bit-for-bit. Only obtainable through
/// symmetrize(), which enforces that.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;

  std::size_t dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

  bool operator==(const SymmetricMatrix&) const = default;

 private:
  explicit SymmetricMatrix(Matrix m) : m_(std::move(m)) {}
  friend SymmetricMatrix symmetrize(const Matrix& m);

  Matrix m_;
};

Matrix transpose(const Matrix& m);
Matrix mat_mul(const Matrix& a, const Matrix& b);
/// aᵀ·b without forming the transpose.
Matrix mat_tmul(const Matrix& a, const Matrix& b);
Vector mat_vec(const Matrix& m, std::span<const double> x);
Vector mat_tvec(const Matrix& m, std::span<const double> x);

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& m);

/// (m + mᵀ)/2, written pairwise so the result is exactly symmetric.
SymmetricMatrix symmetrize(const Matrix& m);

double frobenius_norm(const Matrix& m);
double trace(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);
bool all_finite(std::span<const double> values);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
Vector axpy(double alpha, std::span<const double> x, std::span<const double> y);

/// Throws DimensionMismatch with both shapes unless a and b agree.
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

}  // namespace sclora
