// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#include "neurodissip/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "neurodissip/errors.hpp"

namespace neurodissip {

namespace {

constexpr double kPowerRelTol = 1e-10;
constexpr std::size_t kPowerMaxIter = 5000;
constexpr double kPivotMin = 1e-12;
constexpr std::size_t kJacobiMaxSweeps = 60;

void require_finite(std::span<const double> values, const char* what) {
  if (!all_finite(values)) throw NumericError(std::string(what) + " contains non-finite entries");
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape() + " vs " + b.shape());
}

void require_same_dim(const Vector& a, const Vector& b, const char* op) {
  if (a.size() != b.size())
    throw DimensionError(std::string(op) + ": dimension mismatch " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
}

// Symmetric Gram matrix product in place: out = p * p, returns Frobenius norm of out.
double square_into(const std::vector<double>& p, std::vector<double>& out, std::size_t n) {
  double fro = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += p[i * n + k] * p[k * n + j];
      out[i * n + j] = s;
      fro += s * s;
    }
  }
  return std::sqrt(fro);
}

}  // namespace

Vector::Vector(std::vector<double> entries) : data_(std::move(entries)) {
  require_finite(data_, "Vector");
}

Vector::Vector(std::initializer_list<double> entries) : data_(entries) {
  require_finite(data_, "Vector");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols)
    throw DimensionError("Matrix: " + std::to_string(data_.size()) + " entries for shape " +
                         shape());
  require_finite(data_, "Matrix");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_, "Matrix");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

std::string Matrix::shape() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

bool all_finite(std::span<const double> values) noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

Vector add(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "add");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector subtract(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "subtract");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector scale(const Vector& a, double s) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
  return out;
}

double dot(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vector& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw DimensionError("matmul: inner dimensions differ for " + a.shape() + " x " + b.shape());
  Matrix out(a.rows(), b.cols());
  const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    auto orow = out.row(i);
    for (std::size_t k = 0; k < m; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < p; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size())
    throw DimensionError("matvec: matrix " + a.shape() + " vs vector of dim " +
                         std::to_string(x.size()));
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * x[j];
    out[i] = s;
  }
  return out;
}

Vector matvec_transposed(const Matrix& a, const Vector& x) {
  if (a.rows() != x.size())
    throw DimensionError("matvec_transposed: matrix " + a.shape() + " vs vector of dim " +
                         std::to_string(x.size()));
  Vector out(a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) out[j] += r[j] * x[i];
  }
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out(a.rows(), a.cols());
  auto o = out.entries();
  auto x = a.entries(), y = b.entries();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] + y[i];
  return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "subtract");
  Matrix out(a.rows(), a.cols());
  auto o = out.entries();
  auto x = a.entries(), y = b.entries();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] - y[i];
  return out;
}

Matrix scale(const Matrix& a, double s) {
  Matrix out(a.rows(), a.cols());
  auto o = out.entries();
  auto x = a.entries();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] * s;
  return out;
}

Matrix outer(const Vector& u, const Vector& v) {
  Matrix out(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out(i, j) = u[i] * v[j];
  return out;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.entries()) s += v * v;
  return std::sqrt(s);
}

SingularPair leading_singular_pair(const Matrix& a) {
  if (a.empty()) throw InvalidArgument("spectral_norm: empty matrix " + a.shape());

  // Work on the smaller Gram matrix; `right` tells which singular vector it yields.
  const bool right = a.cols() <= a.rows();
  const std::size_t n = right ? a.cols() : a.rows();
  std::vector<double> gram(n * n, 0.0);
  if (right) {
    for (std::size_t r = 0; r < a.rows(); ++r) {
      auto row = a.row(r);
      for (std::size_t i = 0; i < n; ++i) {
        if (row[i] == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) gram[i * n + j] += row[i] * row[j];
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      auto ri = a.row(i);
      for (std::size_t j = i; j < n; ++j) {
        auto rj = a.row(j);
        double s = 0.0;
        for (std::size_t k = 0; k < a.cols(); ++k) s += ri[k] * rj[k];
        gram[i * n + j] = gram[j * n + i] = s;
      }
    }
  }

  SingularPair out;
  auto finish = [&](std::vector<double> vec, double rho) {
    out.sigma = std::sqrt(std::max(rho, 0.0));
    Vector g(std::move(vec));
    if (right) {
      out.v = g;
      out.u = out.sigma > 0.0 ? scale(matvec(a, g), 1.0 / out.sigma) : Vector(a.rows());
      if (out.sigma == 0.0) out.u[0] = 1.0;
    } else {
      out.u = g;
      out.v = out.sigma > 0.0 ? scale(matvec_transposed(a, g), 1.0 / out.sigma) : Vector(a.cols());
      if (out.sigma == 0.0) out.v[0] = 1.0;
    }
    return out;
  };

  double gfro = 0.0;
  for (double g : gram) gfro += g * g;
  gfro = std::sqrt(gfro);
  if (gfro == 0.0) {
    std::vector<double> e(n, 0.0);
    e[0] = 1.0;
    return finish(std::move(e), 0.0);
  }

  auto rayleigh = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double gi = 0.0;
      for (std::size_t j = 0; j < n; ++j) gi += gram[i * n + j] * v[j];
      s += v[i] * gi;
    }
    return s;
  };

  std::vector<double> power(gram), scratch(n * n), v(n, 1.0 / std::sqrt(double(n))), w(n);
  for (double& p : power) p /= gfro;
  // Copies the largest column of `power` into out and returns its norm.
  auto largest_column = [&](std::vector<double>& out) {
    std::size_t best = 0;
    double best_norm = -1.0;
    for (std::size_t c = 0; c < n; ++c) {
      double cn = 0.0;
      for (std::size_t r = 0; r < n; ++r) cn += power[r * n + c] * power[r * n + c];
      if (cn > best_norm) best_norm = cn, best = c;
    }
    for (std::size_t r = 0; r < n; ++r) out[r] = power[r * n + best];
    return std::sqrt(best_norm);
  };
  bool perturbed = false;
  double prev = -1.0;
  for (std::size_t it = 1; it <= kPowerMaxIter; ++it) {
    double wn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += power[i * n + j] * v[j];
      w[i] = s;
      wn += s * s;
    }
    wn = std::sqrt(wn);
    if (wn <= 1e-12) {
      // Start vector (numerically) orthogonal to the dominant direction.
      if (!perturbed) {
        std::mt19937_64 rng(0x5eed);
        std::normal_distribution<double> nd;
        double vn = 0.0;
        for (double& x : v) {
          x = nd(rng);
          vn += x * x;
        }
        for (double& x : v) x /= std::sqrt(vn);
        perturbed = true;
        continue;
      }
      // The squared power is ~rank one; its largest column spans the dominant direction.
      wn = largest_column(w);
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
    double rho = rayleigh(v);
    // A start vector inside a lower eigenspace never leaves it; the largest
    // column of the squared power tends to the dominant direction regardless.
    if (const double cn = largest_column(w); cn > 0.0) {
      for (double& x : w) x /= cn;
      if (const double rc = rayleigh(w); rc > rho * (1.0 + kPowerRelTol)) {
        v = w;
        rho = rc;
      }
    }
    out.iterations = it;
    if (it > 1 && std::abs(rho - prev) <= kPowerRelTol * std::max(std::abs(rho), 1e-300))
      return finish(std::move(v), rho);
    prev = rho;
    const double pf = square_into(power, scratch, n);
    if (pf == 0.0) return finish(std::move(v), rho);
    for (std::size_t i = 0; i < n * n; ++i) power[i] = scratch[i] / pf;
  }
  double residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double gi = 0.0;
    for (std::size_t j = 0; j < n; ++j) gi += gram[i * n + j] * v[j];
    residual += (gi - prev * v[i]) * (gi - prev * v[i]);
  }
  throw ConvergenceError("spectral_norm: power iteration did not converge for " + a.shape(),
                         kPowerMaxIter, std::sqrt(residual), v);
}

double spectral_norm(const Matrix& a) { return leading_singular_pair(a).sigma; }

namespace {

void sort_eigenvalues(std::vector<Complex>& eig) {
  for (auto& z : eig)
    if (z.imag() == 0.0) z = Complex(z.real(), 0.0);  // drop -0.0 so arg(-1) = pi
  std::stable_sort(eig.begin(), eig.end(), [](const Complex& x, const Complex& y) {
    const double mx = std::abs(x), my = std::abs(y);
    if (mx != my) return mx > my;
    return std::arg(x) < std::arg(y);
  });
}

void eig2x2(double a, double b, double c, double d, std::vector<Complex>& out) {
  const double m = 0.5 * (a + d);
  const double half_diff = 0.5 * (a - d);
  const double disc = half_diff * half_diff + b * c;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    const double big = m >= 0.0 ? m + s : m - s;
    const double det = a * d - b * c;
    const double small = big != 0.0 ? det / big : m - s;
    out.emplace_back(big, 0.0);
    out.emplace_back(small, 0.0);
  } else {
    const double s = std::sqrt(-disc);
    out.emplace_back(m, s);
    out.emplace_back(m, -s);
  }
}

void hessenberg(std::vector<double>& h, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double alpha = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) alpha += h[i * n + k] * h[i * n + k];
    alpha = std::sqrt(alpha);
    if (alpha == 0.0) continue;
    if (h[(k + 1) * n + k] > 0.0) alpha = -alpha;
    double vnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      v[i] = h[i * n + k];
      if (i == k + 1) v[i] -= alpha;
      vnorm += v[i] * v[i];
    }
    if (vnorm == 0.0) continue;
    // H <- P H P with P = I - 2 v v^T / (v^T v).
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i] * h[i * n + j];
      s *= 2.0 / vnorm;
      for (std::size_t i = k + 1; i < n; ++i) h[i * n + j] -= s * v[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += h[i * n + j] * v[j];
      s *= 2.0 / vnorm;
      for (std::size_t j = k + 1; j < n; ++j) h[i * n + j] -= s * v[j];
    }
    h[(k + 1) * n + k] = alpha;
    for (std::size_t i = k + 2; i < n; ++i) h[i * n + k] = 0.0;
  }
}

// Francis double-shift QR on an upper Hessenberg matrix (EISPACK hqr lineage).
std::vector<Complex> hessenberg_qr(std::vector<double>& a, std::size_t n) {
  auto at = [&](std::ptrdiff_t i, std::ptrdiff_t j) -> double& { return a[i * n + j]; };
  const double eps = std::numeric_limits<double>::epsilon();
  const std::size_t max_sweeps = 100 * n;
  std::vector<Complex> wr(n);

  double anorm = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = (i > 0 ? i - 1 : 0); j < n; ++j) anorm += std::abs(at(i, j));

  std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(n) - 1;
  double t = 0.0;
  std::size_t total = 0;
  while (nn >= 0) {
    int its = 0;
    std::ptrdiff_t l;
    do {
      for (l = nn; l > 0; --l) {
        double s = std::abs(at(l - 1, l - 1)) + std::abs(at(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(at(l, l - 1)) <= eps * s) {
          at(l, l - 1) = 0.0;
          break;
        }
      }
      double x = at(nn, nn);
      if (l == nn) {
        wr[nn--] = Complex(x + t, 0.0);
      } else {
        double y = at(nn - 1, nn - 1);
        double w = at(nn, nn - 1) * at(nn - 1, nn);
        if (l == nn - 1) {
          const double p = 0.5 * (y - x);
          const double q = p * p + w;
          double z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + std::copysign(z, p);
            wr[nn - 1] = wr[nn] = Complex(x + z, 0.0);
            if (z != 0.0) wr[nn] = Complex(x - w / z, 0.0);
          } else {
            wr[nn] = Complex(x + p, -z);
            wr[nn - 1] = std::conj(wr[nn]);
          }
          nn -= 2;
        } else {
          if (++total > max_sweeps)
            throw ConvergenceError("eigenvalues: QR iteration exceeded " +
                                       std::to_string(max_sweeps) + " sweeps",
                                   total, std::abs(at(nn, nn - 1)));
          if (its == 10 || its == 20) {
            t += x;
            for (std::ptrdiff_t i = 0; i <= nn; ++i) at(i, i) -= x;
            const double s = std::abs(at(nn, nn - 1)) + std::abs(at(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          std::ptrdiff_t m;
          double p = 0.0, q = 0.0, r = 0.0, z;
          for (m = nn - 2; m >= l; --m) {
            z = at(m, m);
            r = x - z;
            double s = y - z;
            p = (r * s - w) / at(m + 1, m) + at(m, m + 1);
            q = at(m + 1, m + 1) - z - r - s;
            r = at(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(at(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v =
                std::abs(p) * (std::abs(at(m - 1, m - 1)) + std::abs(z) + std::abs(at(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (std::ptrdiff_t i = m; i < nn - 1; ++i) {
            at(i + 2, i) = 0.0;
            if (i != m) at(i + 2, i - 1) = 0.0;
          }
          for (std::ptrdiff_t k = m; k < nn; ++k) {
            if (k != m) {
              p = at(k, k - 1);
              q = at(k + 1, k - 1);
              r = 0.0;
              if (k + 1 != nn) r = at(k + 2, k - 1);
              if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            const double s = std::copysign(std::sqrt(p * p + q * q + r * r), p);
            if (s != 0.0) {
              if (k == m) {
                if (l != m) at(k, k - 1) = -at(k, k - 1);
              } else {
                at(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (std::ptrdiff_t j = k; j <= nn; ++j) {
                p = at(k, j) + q * at(k + 1, j);
                if (k + 1 != nn) {
                  p += r * at(k + 2, j);
                  at(k + 2, j) -= p * z;
                }
                at(k + 1, j) -= p * y;
                at(k, j) -= p * x;
              }
              const std::ptrdiff_t mmin = nn < k + 3 ? nn : k + 3;
              for (std::ptrdiff_t i = l; i <= mmin; ++i) {
                p = x * at(i, k) + y * at(i, k + 1);
                if (k + 1 != nn) {
                  p += z * at(i, k + 2);
                  at(i, k + 2) -= p * r;
                }
                at(i, k + 1) -= p * q;
                at(i, k) -= p;
              }
            }
          }
        }
      }
    } while (l + 1 < nn);
  }
  return wr;
}

}  // namespace

std::vector<Complex> eigenvalues(const Matrix& a) {
  if (!a.is_square()) throw DimensionError("eigenvalues: matrix must be square, got " + a.shape());
  const std::size_t n = a.rows();
  std::vector<Complex> eig;
  eig.reserve(n);
  if (n == 1) {
    eig.emplace_back(a(0, 0), 0.0);
  } else if (n == 2) {
    eig2x2(a(0, 0), a(0, 1), a(1, 0), a(1, 1), eig);
  } else if (n > 2) {
    std::vector<double> h(a.entries().begin(), a.entries().end());
    hessenberg(h, n);
    eig = hessenberg_qr(h, n);
  }
  sort_eigenvalues(eig);
  return eig;
}

double spectral_radius(const Matrix& a) {
  const auto eig = eigenvalues(a);
  return eig.empty() ? 0.0 : std::abs(eig.front());
}

SvdResult svd_bounded(const Matrix& a) {
  if (a.rows() < a.cols()) {
    SvdResult t = svd_bounded(a.transposed());
    return {std::move(t.v), std::move(t.s), std::move(t.u)};
  }
  const std::size_t m = a.rows(), n = a.cols();
  Matrix u = a;
  Matrix v = Matrix::identity(n);
  const double eps = 1e-15;
  bool converged = n < 2;
  std::size_t sweep = 0;
  double worst = 0.0;
  for (; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
    converged = true;
    worst = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += u(i, p) * u(i, p);
          beta += u(i, q) * u(i, q);
          gamma += u(i, p) * u(i, q);
        }
        const double scale_pq = std::sqrt(alpha * beta);
        if (scale_pq == 0.0 || std::abs(gamma) <= eps * scale_pq) continue;
        worst = std::max(worst, std::abs(gamma) / scale_pq);
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double up = u(i, p), uq = u(i, q);
          u(i, p) = c * up - s * uq;
          u(i, q) = s * up + c * uq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
  }
  if (!converged)
    throw ConvergenceError("svd_bounded: Jacobi sweeps did not converge for " + a.shape(), sweep,
                           worst);

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += u(i, j) * u(i, j);
    sigma[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  SvdResult out{Matrix(m, n), Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.s[k] = sigma[j];
    for (std::size_t i = 0; i < m; ++i) out.u(i, k) = sigma[j] > 0.0 ? u(i, j) / sigma[j] : 0.0;
    for (std::size_t i = 0; i < n; ++i) out.v(i, k) = v(i, j);
  }
  return out;
}

Vector solve_linear(const Matrix& a, const Vector& b) {
  if (!a.is_square()) throw DimensionError("solve_linear: matrix must be square, got " + a.shape());
  if (b.size() != a.rows())
    throw DimensionError("solve_linear: matrix " + a.shape() + " vs rhs of dim " +
                         std::to_string(b.size()));
  const std::size_t n = a.rows();
  Matrix m = a;
  Vector x = b;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m(i, k)) > std::abs(m(piv, k))) piv = i;
    if (std::abs(m(piv, k)) < kPivotMin)
      throw SingularMatrixError("solve_linear: pivot below 1e-12 at column " + std::to_string(k),
                                m(piv, k));
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
      std::swap(x[k], x[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m(i, k) / m(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) m(i, j) -= f * m(k, j);
      x[i] -= f * x[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    double s = x[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= m(k, j) * x[j];
    x[k] = s / m(k, k);
  }
  return x;
}

}  // namespace neurodissip
