// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#include "neurodissip/structured_maps.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "neurodissip/errors.hpp"

namespace neurodissip {
namespace {

constexpr double kPfTol = 1e-10;
constexpr double kSvdTol = 1e-8;
constexpr double kDiscTol = 1e-10;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.entries()) v = standard_normal(rng);
  return m;
}

void check_bounds(MapKind kind, std::size_t rows, std::size_t cols, double lo, double hi) {
  if (rows == 0 || cols == 0) throw InvalidArgument("structured map: empty shape");
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw InvalidArgument("structured map: non-finite bounds");
  if (map_kind_is_square_only(kind) && rows != cols)
    throw DimensionError(std::string(map_kind_name(kind)) + " requires a square weight, got (" +
                         std::to_string(rows) + "x" + std::to_string(cols) + ")");
  if (kind == MapKind::kUnstructured) return;
  if (lo > hi)
    throw InvalidArgument(std::string(map_kind_name(kind)) + ": lambda_min " +
                          std::to_string(lo) + " exceeds lambda_max " + std::to_string(hi));
  if (kind == MapKind::kPerronFrobenius && lo < 0.0)
    throw InvalidArgument("perron_frobenius: lambda_min must be non-negative");
}

// Householder product H(v_0) H(v_1) ... with v_i the rows of `vecs`.
// prefix[i] holds H(v_0)...H(v_{i-1}).
Matrix householder_product(const Matrix& vecs, std::vector<Matrix>* prefix = nullptr) {
  const std::size_t n = vecs.rows();
  Matrix q = Matrix::identity(n);
  if (prefix) prefix->assign(1, q);
  std::vector<double> qv(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto v = vecs.row(k);
    double beta = 0.0;
    for (double x : v) beta += x * x;
    if (beta > 1e-300) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += q(i, j) * v[j];
        qv[i] = s;
      }
      const double c = 2.0 / beta;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) q(i, j) -= c * qv[i] * v[j];
    }
    if (prefix) prefix->push_back(q);
  }
  return q;
}

Matrix reflector(std::span<const double> v) {
  const std::size_t n = v.size();
  Matrix h = Matrix::identity(n);
  double beta = 0.0;
  for (double x : v) beta += x * x;
  if (beta <= 1e-300) return h;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) -= 2.0 * v[i] * v[j] / beta;
  return h;
}

// dL/dvecs given dL/dQ for Q = H(v_0) ... H(v_{n-1}).
Matrix householder_pullback(const Matrix& vecs, const Matrix& grad_q) {
  const std::size_t n = vecs.rows();
  std::vector<Matrix> prefix;
  householder_product(vecs, &prefix);
  Matrix grad(n, n);
  Matrix suffix = Matrix::identity(n);  // H(v_{k+1}) ... H(v_{n-1})
  for (std::size_t kk = n; kk-- > 0;) {
    const auto v = vecs.row(kk);
    double beta = 0.0;
    for (double x : v) beta += x * x;
    if (beta > 1e-300) {
      // dL/dH_k = L_k^T G R_k^T
      const Matrix gh = matmul(matmul(prefix[kk].transposed(), grad_q), suffix.transposed());
      std::vector<double> sym_v(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += (gh(i, j) + gh(j, i)) * v[j];
        sym_v[i] = s;
      }
      double vgv = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) vgv += v[i] * gh(i, j) * v[j];
      for (std::size_t i = 0; i < n; ++i)
        grad(kk, i) = -2.0 * sym_v[i] / beta + 4.0 * vgv * v[i] / (beta * beta);
    }
    suffix = matmul(reflector(v), suffix);
  }
  return grad;
}

Matrix gershgorin_offdiag(const Matrix& raw, bool complex_conjugate) {
  const std::size_t n = raw.rows();
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) m(i, j) = complex_conjugate ? 0.5 * (raw(i, j) - raw(j, i)) : raw(i, j);
  return m;
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::string_view map_kind_name(MapKind k) {
  switch (k) {
    case MapKind::kUnstructured: return "unstructured";
    case MapKind::kPerronFrobenius: return "perron_frobenius";
    case MapKind::kSpectralSvd: return "spectral_svd";
    case MapKind::kGershgorinReal: return "gershgorin_real";
    case MapKind::kGershgorinComplex: return "gershgorin_complex";
  }
  return "unknown";
}

MapKind parse_map_kind(std::string_view name) {
  std::string key;
  for (char c : name)
    if (c != '-' && c != '_' && c != ' ')
      key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "unstructured" || key == "linear" || key == "dense") return MapKind::kUnstructured;
  if (key == "perronfrobenius" || key == "pf") return MapKind::kPerronFrobenius;
  if (key == "spectralsvd" || key == "spectral" || key == "svd") return MapKind::kSpectralSvd;
  if (key == "gershgorinreal" || key == "gershgorin" || key == "gersh")
    return MapKind::kGershgorinReal;
  if (key == "gershgorincomplex" || key == "gershcomplex") return MapKind::kGershgorinComplex;
  throw InvalidArgument("unknown map kind '" + std::string(name) + "'");
}

bool map_kind_is_square_only(MapKind k) {
  return k == MapKind::kPerronFrobenius || k == MapKind::kGershgorinReal ||
         k == MapKind::kGershgorinComplex;
}

std::pair<double, double> singular_value_interval(double lo, double hi) {
  if (lo >= 0.0) return {lo, hi};
  if (hi <= 0.0) return {-hi, -lo};
  return {0.0, std::max(-lo, hi)};
}

StructuredLinearMap sample_map(MapKind kind, std::size_t rows, std::size_t cols, double lo,
                               double hi, Rng& rng) {
  check_bounds(kind, rows, cols, lo, hi);
  StructuredLinearMap map;
  map.kind = kind;
  map.rows = rows;
  map.cols = cols;
  map.lambda_min = lo;
  map.lambda_max = hi;
  switch (kind) {
    case MapKind::kUnstructured: {
      const double a = 1.0 / std::sqrt(static_cast<double>(cols));
      Matrix w(rows, cols);
      for (double& v : w.entries()) v = uniform(rng, -a, a);
      map.params.push_back(std::move(w));
      break;
    }
    case MapKind::kPerronFrobenius:
      map.params.push_back(random_matrix(rows, cols, rng));
      map.params.push_back(random_matrix(rows, cols, rng));
      break;
    case MapKind::kSpectralSvd: {
      map.params.push_back(random_matrix(rows, rows, rng));
      map.params.push_back(random_matrix(cols, cols, rng));
      map.params.push_back(random_matrix(1, std::min(rows, cols), rng));
      break;
    }
    case MapKind::kGershgorinReal:
    case MapKind::kGershgorinComplex: {
      Matrix m(rows, cols);
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
          if (i != j) m(i, j) = uniform(rng, 0.0, 1.0);
      map.params.push_back(std::move(m));
      break;
    }
  }
  return map;
}

Matrix StructuredLinearMap::realize() const {
  switch (kind) {
    case MapKind::kUnstructured: return params.at(0);
    case MapKind::kPerronFrobenius: {
      const Matrix& a = params.at(0);
      const Matrix& mp = params.at(1);
      Matrix w(rows, cols);
      for (std::size_t i = 0; i < rows; ++i) {
        const auto ar = a.row(i);
        const double mx = *std::max_element(ar.begin(), ar.end());
        double z = 0.0;
        for (double v : ar) z += std::exp(v - mx);
        for (std::size_t j = 0; j < cols; ++j) {
          const double m = lambda_max - (lambda_max - lambda_min) * sigmoid(mp(i, j));
          w(i, j) = std::exp(ar[j] - mx) / z * m;
        }
      }
      return w;
    }
    case MapKind::kSpectralSvd: {
      const Matrix u = householder_product(params.at(0));
      const Matrix v = householder_product(params.at(1));
      const Matrix& s = params.at(2);
      const std::size_t k = s.cols();
      Matrix w(rows, cols);
      for (std::size_t r = 0; r < k; ++r) {
        const double sig = lambda_max - (lambda_max - lambda_min) * sigmoid(s(0, r));
        for (std::size_t i = 0; i < rows; ++i) {
          const double ui = u(i, r) * sig;
          for (std::size_t j = 0; j < cols; ++j) w(i, j) += ui * v(r, j);
        }
      }
      return w;
    }
    case MapKind::kGershgorinReal:
    case MapKind::kGershgorinComplex: {
      const Matrix m = gershgorin_offdiag(params.at(0), kind == MapKind::kGershgorinComplex);
      const double center = 0.5 * (lambda_min + lambda_max);
      const double radius = 0.5 * (lambda_max - lambda_min);
      Matrix w(rows, cols);
      for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        for (double v : m.row(i)) s += std::abs(v);
        for (std::size_t j = 0; j < cols; ++j)
          w(i, j) = i == j ? center : (s > 0.0 ? radius * m(i, j) / s : 0.0);
      }
      return w;
    }
  }
  throw Error(ErrorCode::kInternal, "realize: unknown map kind");
}

std::vector<Matrix> StructuredLinearMap::pullback(const Matrix& g) const {
  if (g.rows() != rows || g.cols() != cols)
    throw DimensionError("pullback: gradient " + g.shape() + " for map of shape (" +
                         std::to_string(rows) + "x" + std::to_string(cols) + ")");
  switch (kind) {
    case MapKind::kUnstructured: return {g};
    case MapKind::kPerronFrobenius: {
      const Matrix& a = params.at(0);
      const Matrix& mp = params.at(1);
      Matrix ga(rows, cols);
      Matrix gm(rows, cols);
      std::vector<double> p(cols), q(cols);
      for (std::size_t i = 0; i < rows; ++i) {
        const auto ar = a.row(i);
        const double mx = *std::max_element(ar.begin(), ar.end());
        double z = 0.0;
        for (std::size_t j = 0; j < cols; ++j) z += (p[j] = std::exp(ar[j] - mx));
        double dot_pq = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
          p[j] /= z;
          const double sg = sigmoid(mp(i, j));
          const double m = lambda_max - (lambda_max - lambda_min) * sg;
          q[j] = g(i, j) * m;  // dL/dsoftmax
          dot_pq += p[j] * q[j];
          gm(i, j) = g(i, j) * p[j] * (-(lambda_max - lambda_min)) * sg * (1.0 - sg);
        }
        for (std::size_t j = 0; j < cols; ++j) ga(i, j) = p[j] * (q[j] - dot_pq);
      }
      return {std::move(ga), std::move(gm)};
    }
    case MapKind::kSpectralSvd: {
      const Matrix u = householder_product(params.at(0));
      const Matrix v = householder_product(params.at(1));
      const Matrix& s = params.at(2);
      const std::size_t k = s.cols();
      Matrix gu(rows, rows);
      Matrix gv(cols, cols);
      Matrix gs(1, k);
      for (std::size_t r = 0; r < k; ++r) {
        const double sg = sigmoid(s(0, r));
        const double sig = lambda_max - (lambda_max - lambda_min) * sg;
        // g v_r (rows) and u_r^T g (cols)
        double dsig = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          double gvi = 0.0;
          for (std::size_t j = 0; j < cols; ++j) gvi += g(i, j) * v(r, j);
          gu(i, r) = gvi * sig;
          dsig += u(i, r) * gvi;
        }
        for (std::size_t j = 0; j < cols; ++j) {
          double ugj = 0.0;
          for (std::size_t i = 0; i < rows; ++i) ugj += u(i, r) * g(i, j);
          gv(r, j) = ugj * sig;
        }
        gs(0, r) = dsig * (-(lambda_max - lambda_min)) * sg * (1.0 - sg);
      }
      return {householder_pullback(params.at(0), gu), householder_pullback(params.at(1), gv),
              std::move(gs)};
    }
    case MapKind::kGershgorinReal:
    case MapKind::kGershgorinComplex: {
      const bool cplx = kind == MapKind::kGershgorinComplex;
      const Matrix m = gershgorin_offdiag(params.at(0), cplx);
      const double radius = 0.5 * (lambda_max - lambda_min);
      Matrix d(rows, cols);
      for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0, gm = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
          if (i == j) continue;
          s += std::abs(m(i, j));
          gm += g(i, j) * m(i, j);
        }
        if (s <= 0.0) continue;
        for (std::size_t j = 0; j < cols; ++j)
          if (i != j) d(i, j) = radius / s * (g(i, j) - sign(m(i, j)) * gm / s);
      }
      if (!cplx) return {std::move(d)};
      Matrix dr(rows, cols);
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) dr(i, j) = 0.5 * (d(i, j) - d(j, i));
      return {std::move(dr)};
    }
  }
  throw Error(ErrorCode::kInternal, "pullback: unknown map kind");
}

Matrix realize_pf(std::size_t n, double lo, double hi, Rng& rng) {
  return sample_map(MapKind::kPerronFrobenius, n, n, lo, hi, rng).realize();
}

Matrix realize_spectral(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng) {
  return sample_map(MapKind::kSpectralSvd, rows, cols, lo, hi, rng).realize();
}

Matrix realize_gershgorin(std::size_t n, double lo, double hi, bool complex_conjugate, Rng& rng) {
  return sample_map(complex_conjugate ? MapKind::kGershgorinComplex : MapKind::kGershgorinReal, n,
                    n, lo, hi, rng)
      .realize();
}

Matrix realize_unstructured(std::size_t rows, std::size_t cols, Rng& rng) {
  return sample_map(MapKind::kUnstructured, rows, cols, 0.0, 0.0, rng).realize();
}

NormPenalties weight_norm_penalties(const Matrix& w) {
  NormPenalties p;
  for (double v : w.entries()) p.l1 += std::abs(v);
  p.l2 = frobenius_norm(w);
  p.spectral = spectral_norm(w);
  return p;
}

GuaranteeReport check_guarantee(const StructuredLinearMap& map, const Matrix& w) {
  GuaranteeReport rep;
  const double lo = map.lambda_min;
  const double hi = map.lambda_max;
  if (w.rows() == w.cols()) rep.eigenvalues = eigenvalues(w);
  rep.singular_values = svd_bounded(w).s.values();
  auto violate = [&](double amount) {
    if (amount > rep.max_violation) rep.max_violation = amount;
  };
  switch (map.kind) {
    case MapKind::kUnstructured:
      rep.guarantee = "none";
      break;
    case MapKind::kPerronFrobenius: {
      rep.guarantee = "non-negative entries, row sums and spectral radius within [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]";
      for (std::size_t i = 0; i < w.rows(); ++i) {
        double s = 0.0;
        for (double v : w.row(i)) {
          violate(-v);
          s += v;
        }
        violate(lo - s);
        violate(s - hi);
      }
      double rho = 0.0;
      for (const Complex& e : rep.eigenvalues) rho = std::max(rho, std::abs(e));
      violate(rho - hi);
      rep.passed = rep.max_violation <= kPfTol;
      break;
    }
    case MapKind::kSpectralSvd: {
      const auto [slo, shi] = singular_value_interval(lo, hi);
      rep.guarantee = "singular values within [" + std::to_string(slo) + ", " +
                      std::to_string(shi) + "]";
      for (double s : rep.singular_values) {
        violate(slo - s);
        violate(s - shi);
      }
      rep.passed = rep.max_violation <= kSvdTol;
      break;
    }
    case MapKind::kGershgorinReal:
    case MapKind::kGershgorinComplex: {
      const double c = 0.5 * (lo + hi);
      const double r = 0.5 * (hi - lo);
      rep.guarantee = "eigenvalues within |z - " + std::to_string(c) + "| <= " + std::to_string(r);
      for (const Complex& e : rep.eigenvalues) violate(std::abs(e - c) - r);
      rep.passed = rep.max_violation <= kDiscTol;
      break;
    }
  }
  return rep;
}

nlohmann::json guarantee_to_json(const GuaranteeReport& report) {
  nlohmann::json eig = nlohmann::json::array();
  for (const Complex& e : report.eigenvalues) eig.push_back({e.real(), e.imag()});
  return {{"passed", report.passed},
          {"guarantee", report.guarantee},
          {"max_violation", report.max_violation},
          {"eigenvalues", std::move(eig)},
          {"singular_values", report.singular_values}};
}

}  // namespace neurodissip
