// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace neurodissip {

using Complex = std::complex<double>;

/// Dense real vector. Constructors taking external data reject NaN/Inf.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, double fill = 0.0) : data_(dim, fill) {}
  explicit Vector(std::vector<double> entries);
  Vector(std::initializer_list<double> entries);

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  const double* data() const noexcept { return data_.data(); }
  double* data() noexcept { return data_.data(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }
  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }

  std::span<const double> span() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  bool operator==(const Vector&) const = default;

 private:
  std::vector<double> data_;
};

/// Dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  /// Throws DimensionError if entries.size() != rows*cols, NumericError on non-finite entries.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> entries() const noexcept { return data_; }
  std::span<double> entries() noexcept { return data_; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  Matrix transposed() const;
  std::string shape() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Vector arithmetic.
Vector add(const Vector& a, const Vector& b);
Vector subtract(const Vector& a, const Vector& b);
Vector scale(const Vector& a, double s);
double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
bool all_finite(std::span<const double> values) noexcept;

// Matrix arithmetic. Shape mismatches throw DimensionError naming both shapes.
Matrix matmul(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, const Vector& x);
Vector matvec_transposed(const Matrix& a, const Vector& x);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Matrix outer(const Vector& u, const Vector& v);
double frobenius_norm(const Matrix& a);

struct SingularPair {
  double sigma = 0.0;
  Vector u;  // left singular vector, a.rows()
  Vector v;  // right singular vector, a.cols()
  std::size_t iterations = 0;
};

/// Leading singular triplet by power iteration on the Gram matrix. The iterate
/// is accelerated by repeated squaring of the normalised Gram matrix, so each
/// iteration doubles the effective power. Stops when the Rayleigh quotient
/// changes by less than 1e-10 relative; throws ConvergenceError after 5000
/// iterations.
SingularPair leading_singular_pair(const Matrix& a);

/// Largest singular value (induced 2-norm). Zero for the zero matrix.
double spectral_norm(const Matrix& a);

/// All eigenvalues with multiplicity, sorted by descending modulus and then by
/// ascending argument in (-pi, pi]. Closed form for n <= 2; Householder
/// Hessenberg reduction followed by Francis double-shift QR otherwise.
std::vector<Complex> eigenvalues(const Matrix& a);

/// Largest eigenvalue modulus.
double spectral_radius(const Matrix& a);

struct SvdResult {
  Matrix u;  // rows x k, k = min(rows, cols)
  Vector s;  // k, non-increasing, non-negative
  Matrix v;  // cols x k
};

/// Thin SVD via one-sided Jacobi: a = u * diag(s) * v^T.
SvdResult svd_bounded(const Matrix& a);

/// Gaussian elimination with partial pivoting. Pivots below 1e-12 throw
/// SingularMatrixError.
Vector solve_linear(const Matrix& a, const Vector& b);

}  // namespace neurodissip
