// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace neurodissip {

/// Stable numeric codes shared with the C API (see neurodissip.h).
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kDimensionMismatch = 2,
  kConvergence = 3,
  kSingularMatrix = 4,
  kConfig = 5,
  kIo = 6,
  kNumeric = 7,
  kDegenerate = 8,
  kInternal = 99,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorCode::kInvalidArgument, what) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorCode::kDimensionMismatch, what) {}
};

/// Iterative kernel gave up. Carries the last iterate and its residual.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations, double residual,
                   std::vector<double> last_iterate = {})
      : Error(ErrorCode::kConvergence, what),
        iterations_(iterations),
        residual_(residual),
        last_iterate_(std::move(last_iterate)) {}

  std::size_t iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }
  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

 private:
  std::size_t iterations_;
  double residual_;
  std::vector<double> last_iterate_;
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, double pivot)
      : Error(ErrorCode::kSingularMatrix, what), pivot_(pivot) {}
  double pivot() const noexcept { return pivot_; }

 private:
  double pivot_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::kConfig, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorCode::kNumeric, what) {}
};

class DegenerateError : public Error {
 public:
  explicit DegenerateError(const std::string& what) : Error(ErrorCode::kDegenerate, what) {}
};

}  // namespace neurodissip
