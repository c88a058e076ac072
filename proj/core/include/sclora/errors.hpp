// Copyright 2026 The sclora Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sclora {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad caller input: shapes, ranges, unparsable values.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A file could not be read or decoded. Carries the file name and the byte
/// offset at which decoding stopped.
class FormatError : public Error {
 public:
  FormatError(std::string file, std::uint64_t offset, const std::string& what)
      : Error(file + " @ byte " + std::to_string(offset) + ": " + what),
        file_(std::move(file)),
        offset_(offset) {}

  const std::string& file() const noexcept { return file_; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::string file_;
  std::uint64_t offset_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver ran out of sweeps. `residual` is the off-diagonal
/// Frobenius norm left when it stopped.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : NumericalError(what + " (residual off-diagonal norm " +
                       std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Training produced a non-finite loss.
class DivergenceError : public NumericalError {
 public:
  explicit DivergenceError(std::size_t step)
      : NumericalError("training diverged: non-finite loss at step " +
                       std::to_string(step)),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace sclora
