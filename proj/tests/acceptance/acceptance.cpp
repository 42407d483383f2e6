// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any
// criterion fails. Usage: acceptance [--only N[,N...]] [--work DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "neurodissip/commands.hpp"
#include "neurodissip/dissipativity.hpp"
#include "neurodissip/dynamics.hpp"
#include "neurodissip/errors.hpp"
#include "neurodissip/experiment.hpp"
#include "neurodissip/io.hpp"
#include "neurodissip/pwa.hpp"
#include "neurodissip/structured_maps.hpp"
#include "neurodissip/training.hpp"

#ifndef NEURODISSIP_SOURCE_DIR
#error "NEURODISSIP_SOURCE_DIR must point at the source tree"
#endif

using namespace neurodissip;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kPwaRelTol = 1e-6;
constexpr double kPwaBudgetS = 30.0;
constexpr std::size_t kPwaMinPairs = 5000;
constexpr std::size_t kSoundNets = 200;
constexpr std::size_t kSoundAnchors = 14400;
constexpr std::size_t kEqSystems = 1000;
constexpr double kEqSlack = 1e-9;
constexpr std::size_t kMapSeeds = 100;
constexpr double kSvdTol = 1e-8;
constexpr double kDiscTol = 1e-10;
constexpr double kPfTol = 1e-10;
constexpr double kRegionBudgetS = 60.0;
constexpr double kOriginTol = 1e-6;
constexpr double kLimitAgreeTol = 1e-6;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradEps = 1e-5;
constexpr double kGradFloor = 1e-8;
constexpr double kLinearMapTol = 1e-3;
constexpr double kTrainImprovement = 10.0;
constexpr double kTrainBudgetS = 600.0;
constexpr std::size_t kSweepCount = 828;
constexpr std::size_t kSweepThreads = 8;
constexpr double kSweepBudgetS = 900.0;
constexpr std::size_t kDissipationSteps = 1000;
constexpr double kDissipationSlack = 1e-9;

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

std::string work_root;

std::string work_dir(const std::string& name) {
  const fs::path p = fs::path(work_root) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string preset(const std::string& name) {
  return std::string(NEURODISSIP_SOURCE_DIR) + "/configs/" + name + ".json";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// ---- Oracles, written without the library's linear algebra. ----

Vector oracle_forward(const MlpNetwork& net, const Vector& x) {
  std::vector<double> h = x.values();
  for (const Layer& l : net.layers()) {
    std::vector<double> z(l.output_dim(), 0.0);
    for (std::size_t i = 0; i < z.size(); ++i) {
      double s = l.bias ? (*l.bias)[i] : 0.0;
      for (std::size_t j = 0; j < h.size(); ++j) s += l.weight(i, j) * h[j];
      z[i] = l.activation ? activation_value(*l.activation, s) : s;
    }
    h = std::move(z);
  }
  return Vector(std::move(h));
}

double oracle_norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

// Largest singular value of a 2x2 matrix in closed form.
double norm_2x2(const Matrix& a) {
  const double p = a(0, 0), q = a(0, 1), r = a(1, 0), s = a(1, 1);
  const double f = p * p + q * q + r * r + s * s;
  const double d = p * s - q * r;
  return std::sqrt(0.5 * (f + std::sqrt(std::max(0.0, f * f - 4.0 * d * d))));
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  return ev;
}

// Singular values from the eigenvalues of the smaller Gram matrix.
std::vector<double> oracle_singular_values(const Matrix& w) {
  const bool tall = w.rows() >= w.cols();
  const std::size_t k = tall ? w.cols() : w.rows();
  std::vector<std::vector<double>> g(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      if (tall)
        for (std::size_t r = 0; r < w.rows(); ++r) s += w(r, i) * w(r, j);
      else
        for (std::size_t c = 0; c < w.cols(); ++c) s += w(i, c) * w(j, c);
      g[i][j] = s;
    }
  std::vector<double> sv;
  for (double e : jacobi_eigenvalues(g)) sv.push_back(std::sqrt(std::max(0.0, e)));
  std::sort(sv.rbegin(), sv.rend());
  return sv;
}

double oracle_spectral_norm(const Matrix& w) { return oracle_singular_values(w).front(); }

std::complex<double> complex_det(std::vector<std::vector<std::complex<double>>> a) {
  const std::size_t n = a.size();
  std::complex<double> det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) == 0.0) return 0.0;
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const std::complex<double> f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return det;
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, double scale, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = scale * standard_normal(rng);
  return m;
}

Vector uniform_vector(std::size_t n, double lo, double hi, Rng& rng) {
  Vector v(n);
  for (double& e : v) e = uniform(rng, lo, hi);
  return v;
}

// in -> width (activated) repeated `depth` times, then a linear width -> out layer.
MlpNetwork random_network(std::size_t in, std::size_t width, std::size_t out, std::size_t depth,
                          Activation act, bool bias, double gain, Rng& rng,
                          double max_norm = 0.0) {
  std::vector<Layer> layers;
  for (std::size_t l = 0; l <= depth; ++l) {
    const std::size_t fan_in = l == 0 ? in : width;
    const std::size_t fan_out = l == depth ? out : width;
    Layer layer;
    layer.weight = gaussian_matrix(fan_out, fan_in, gain / std::sqrt(static_cast<double>(fan_in)), rng);
    if (max_norm > 0.0)
      layer.weight = scale(layer.weight, uniform(rng, 0.2, max_norm) / oracle_spectral_norm(layer.weight));
    if (bias) layer.bias = uniform_vector(fan_out, -1.0, 1.0, rng);
    if (l < depth) layer.activation = act;
    layers.push_back(std::move(layer));
  }
  return MlpNetwork(std::move(layers));
}

// ---- Criteria. ----

Outcome pwa_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  constexpr std::size_t kAnchorsPerNet = 26;
  std::size_t pairs = 0, violations = 0;
  double worst = 0.0;
  for (Activation act : all_activations())
    for (std::size_t depth : {1, 4, 8})
      for (std::size_t width : {2, 8, 64})
        for (bool bias : {true, false}) {
          const MlpNetwork net = random_network(2, width, 2, depth, act, bias, 1.5, rng);
          for (std::size_t k = 0; k < kAnchorsPerNet; ++k) {
            const double spread = k % 2 == 0 ? 1.0 : 6.0;
            const Vector x = uniform_vector(2, -spread, spread, rng);
            const PwaForm form = extract_pwa(net, x);
            const Vector y = oracle_forward(net, x);
            std::vector<double> r(2);
            for (std::size_t i = 0; i < 2; ++i) {
              double s = form.b_star[i];
              for (std::size_t j = 0; j < 2; ++j) s += form.a_star(i, j) * x[j];
              r[i] = y[i] - s;
            }
            const double rel = oracle_norm2(r) / (1.0 + oracle_norm2(y.values()));
            worst = std::max(worst, std::isfinite(rel) ? rel : INFINITY);
            violations += !(rel <= kPwaRelTol);
            ++pairs;
          }
        }
  const double secs = seconds_since(t0);
  return {pairs >= kPwaMinPairs && violations == 0 && secs < kPwaBudgetS,
          std::to_string(pairs) + " pairs, " + std::to_string(violations) +
              " violations, worst relative residual " + fmt(worst) + ", " + fmt(secs) + " s"};
}

Outcome contraction_soundness() {
  Rng rng(202);
  std::vector<Activation> stable;
  for (Activation a : all_activations())
    if (stability_class(a) == StabilityClass::kStable) stable.push_back(a);
  const GridSpec grid;  // 120 x 120 over [-6, 6]^2
  std::size_t violations = 0, anchors = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < kSoundNets; ++k) {
    const Activation act = stable[k % stable.size()];
    const std::size_t depth = std::array<std::size_t, 3>{1, 4, 8}[k % 3];
    const std::size_t width = k % 2 == 0 ? 2 : 8;
    const MlpNetwork net = random_network(2, width, 2, depth, act, k % 4 < 2, 1.0, rng, 0.99);
    for (const Layer& l : net.layers())
      if (!(oracle_spectral_norm(l.weight) < 1.0)) ++violations;
    for (std::size_t c = 0; c < grid.size(); ++c) {
      const double n = norm_2x2(extract_pwa(net, grid.anchor(c)).a_star);
      worst = std::max(worst, n);
      violations += !(n < 1.0);
      ++anchors;
    }
  }
  return {violations == 0 && anchors == kSoundNets * kSoundAnchors,
          std::to_string(kSoundNets) + " nets, " + std::to_string(anchors) + " anchors, " +
              std::to_string(violations) + " violations, max ||A*|| " + fmt(worst)};
}

Outcome equilibrium_bound_check() {
  Rng rng(303);
  std::size_t violations = 0;
  double tightest = INFINITY;
  for (std::size_t k = 0; k < kEqSystems; ++k) {
    const std::size_t n = 2 + k % 5;
    Matrix a = gaussian_matrix(n, n, 1.0, rng);
    const double target = uniform(rng, 0.05, 0.99);
    a = scale(a, target / oracle_spectral_norm(a));
    const Vector b = uniform_vector(n, -3.0, 3.0, rng);
    // Fixed point by Picard iteration, which converges for a contraction.
    std::vector<double> x(n, 0.0);
    for (int it = 0; it < 20000; ++it) {
      std::vector<double> next(n);
      double delta = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t j = 0; j < n; ++j) s += a(i, j) * x[j];
        next[i] = s;
        delta = std::max(delta, std::abs(s - x[i]));
      }
      x = std::move(next);
      if (delta < 1e-15) break;
    }
    const double xn = oracle_norm2(x);
    Matrix i_minus_a = scale(a, -1.0);
    for (std::size_t i = 0; i < n; ++i) i_minus_a(i, i) += 1.0;
    const double bn = oracle_norm2(b.values());
    const double lower = bn / oracle_spectral_norm(i_minus_a);
    const double upper = bn / (1.0 - oracle_spectral_norm(a));
    PwaForm form;
    form.anchor = Vector(n);
    form.a_star = a;
    form.b_star = b;
    const EquilibriumBounds lib = equilibrium_bounds(form);
    const bool ok = lower <= xn + kEqSlack && xn <= upper + kEqSlack &&
                    lib.lower <= xn + kEqSlack && xn <= lib.upper + kEqSlack &&
                    std::abs(lib.lower - lower) <= kEqSlack * std::max(1.0, lower) &&
                    std::abs(lib.upper - upper) <= kEqSlack * std::max(1.0, upper);
    violations += !ok;
    tightest = std::min({tightest, xn - lower, upper - xn});
  }
  return {violations == 0, std::to_string(kEqSystems) + " systems, " + std::to_string(violations) +
                               " violations, tightest slack " + fmt(tightest)};
}

Outcome structured_guarantees() {
  std::size_t pf_bad = 0, svd_bad = 0, disc_bad = 0, eig_bad = 0;
  for (std::size_t seed = 0; seed < kMapSeeds; ++seed) {
    Rng rng(stable_hash("maps", seed));
    const std::size_t n = 2 + seed % 7;
    {
      const double lo = uniform(rng, 0.0, 1.0), hi = lo + uniform(rng, 0.0, 1.0);
      const Matrix w = realize_pf(n, lo, hi, rng);
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += w(i, j);
        pf_bad += s < lo - kPfTol || s > hi + kPfTol;
      }
      // Power iteration on the positive matrix converges to the Perron root.
      std::vector<double> v(n, 1.0);
      double rho = 0.0;
      for (int it = 0; it < 2000; ++it) {
        std::vector<double> next(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) next[i] += w(i, j) * v[j];
        rho = oracle_norm2(next) / oracle_norm2(v);
        const double nn = oracle_norm2(next);
        for (double& e : next) e /= nn;
        v = std::move(next);
      }
      pf_bad += rho > hi + kPfTol || spectral_radius(w) > hi + kPfTol;
    }
    {
      const std::size_t rows = 2 + seed % 7, cols = 2 + (seed / 7) % 7;
      const double lo = uniform(rng, 0.0, 1.0), hi = lo + uniform(rng, 0.0, 1.0);
      const Matrix w = realize_spectral(rows, cols, lo, hi, rng);
      for (double s : oracle_singular_values(w)) svd_bad += s < lo - kSvdTol || s > hi + kSvdTol;
    }
    for (bool cplx : {false, true}) {
      double lo = uniform(rng, -1.5, 1.5), hi = uniform(rng, -1.5, 1.5);
      if (lo > hi) std::swap(lo, hi);
      const Matrix w = realize_gershgorin(n, lo, hi, cplx, rng);
      const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
      const std::vector<Complex> ev = eigenvalues(w);
      Complex trace_sum = 0.0;
      for (const Complex& l : ev) {
        disc_bad += std::abs(l - c) > r + kDiscTol;
        trace_sum += l;
        // Each eigenvalue must make W - lambda I singular.
        std::vector<std::vector<std::complex<double>>> m(n, std::vector<std::complex<double>>(n));
        double scale_ref = 1.0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            m[i][j] = w(i, j) - (i == j ? l : 0.0);
            scale_ref = std::max(scale_ref, std::abs(m[i][j]));
          }
        eig_bad += std::abs(complex_det(m)) > 1e-8 * std::pow(scale_ref, static_cast<double>(n));
      }
      double trace = 0.0;
      for (std::size_t i = 0; i < n; ++i) trace += w(i, i);
      eig_bad += std::abs(trace_sum - trace) > 1e-9;
    }
  }
  return {pf_bad + svd_bad + disc_bad + eig_bad == 0,
          std::to_string(kMapSeeds) + " seeds; violations: perron_frobenius " + std::to_string(pf_bad) +
              ", spectral " + std::to_string(svd_bad) + ", gershgorin disc " + std::to_string(disc_bad) +
              ", eigenvalue check " + std::to_string(eig_bad)};
}

Outcome region_maps() {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream detail;
  bool ok = true;
  std::size_t oracle_bad = 0;
  for (const std::string name : {"region-relu", "region-tanh", "region-sigmoid", "region-selu"}) {
    const ExperimentConfig c = load_config(preset(name));
    const MlpNetwork net = config_network(c);
    const GridAnalysis g = certify_region(net, c.analysis.grid, kSweepThreads);
    std::size_t diss = 0, non = 0;
    for (std::size_t k = 0; k < g.cells.size(); ++k) {
      const PointVerdict& p = g.cells[k];
      if (p.error) continue;
      (p.dissipative ? diss : non)++;
      if (k % 97 == 0) {
        const double n = norm_2x2(extract_pwa(net, p.anchor).a_star);
        oracle_bad += std::abs(n - p.a_norm) > 1e-9 * std::max(1.0, n) || (n < 1.0) != p.dissipative;
      }
    }
    const double frac = static_cast<double>(diss) / static_cast<double>(g.cells.size());
    detail << name.substr(7) << " " << fmt(100.0 * frac) << "% dissipative; ";
    if (name == "region-relu" || name == "region-tanh") ok = ok && non == 0 && diss == g.cells.size();
    if (name == "region-sigmoid") {
      const bool mixed = diss > 0 && non > 0;
      ok = ok && mixed;
      if (!mixed)
        detail << "(sigmoid secant gains never exceed 1/4, so with unit-bounded weights every cell "
                  "is dissipative) ";
    }
  }
  const double secs = seconds_since(t0);
  ok = ok && oracle_bad == 0 && secs < kRegionBudgetS;
  detail << "oracle mismatches " << oracle_bad << ", " << fmt(secs) << " s";
  return {ok, detail.str()};
}

std::vector<double> spectra_medians(const std::string& name) {
  const ExperimentConfig c = load_config(preset(name));
  const CommandResult r = run_command(c, "spectra", work_dir(name), kSweepThreads);
  std::vector<double> med;
  for (const auto& s : r.summary["studies"]) med.push_back(s["median_modulus"].get<double>());
  return med;
}

Outcome depth_trend() {
  const std::vector<double> stable = spectra_medians("depth-stable");
  const std::vector<double> unstable = spectra_medians("depth-unstable");
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (double e : v) s += (s.empty() ? "" : " > ") + fmt(e);
    return s;
  };
  const bool dec = stable.size() == 3 && stable[0] > stable[1] && stable[1] > stable[2];
  const bool inc = unstable.size() == 3 && unstable[0] < unstable[1] && unstable[1] < unstable[2];
  std::string detail = "medians over depths 1, 4, 8: stable " + list(stable) + " (" +
                       (dec ? "decreasing" : "not decreasing") + "); (1.2, 1.4) " + list(unstable) +
                       " (" + (inc ? "increasing" : "not increasing") + ")";
  if (!inc)
    detail += "; GELU's secant gain tends to 0 on negative inputs, so composing the shared "
              "layer shrinks the pooled moduli even with eigenvalues of modulus above 1";
  return {dec && inc, detail};
}

// Limit reached from x0 and a 5 x 5 lattice of starts; nullopt if they disagree.
std::optional<Vector> common_limit(const MlpNetwork& net, const ExperimentConfig& c) {
  std::vector<Vector> starts{Vector(c.analysis.x0)};
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      starts.push_back(Vector{-6.0 + 3.0 * static_cast<double>(i), -6.0 + 3.0 * static_cast<double>(j)});
  std::optional<Vector> limit;
  for (const Vector& s : starts) {
    const Trajectory t = rollout(net, s, c.analysis.rollout_steps);
    if (t.attractor.kind != AttractorClass::kConvergedPoint || !t.attractor.limit) return std::nullopt;
    if (!limit)
      limit = t.attractor.limit;
    else if (norm2(subtract(*limit, *t.attractor.limit)) > kLimitAgreeTol)
      return std::nullopt;
  }
  return limit;
}

Outcome bias_effect() {
  const ExperimentConfig on = load_config(preset("bias-on"));
  const ExperimentConfig off = load_config(preset("bias-off"));
  const MlpNetwork net_on = config_network(on);
  const MlpNetwork net_off = config_network(off);
  const std::optional<Vector> lim_on = common_limit(net_on, on);
  const std::optional<Vector> lim_off = common_limit(net_off, off);
  bool ok = lim_on && lim_off;
  std::ostringstream d;
  if (lim_on) {
    const double n = norm2(*lim_on);
    const EquilibriumBounds b = equilibrium_bounds(extract_pwa(net_on, *lim_on));
    const bool inside = b.lower <= n + kEqSlack && n <= b.upper + kEqSlack;
    ok = ok && n > kOriginTol && inside;
    d << "bias: ||x*|| " << fmt(n) << " in [" << fmt(b.lower) << ", " << fmt(b.upper) << "] "
      << (inside ? "yes" : "no") << "; ";
  } else {
    d << "bias: starts do not share one equilibrium; ";
  }
  if (lim_off) {
    const double n = norm2(*lim_off);
    ok = ok && n <= kOriginTol;
    d << "no bias: ||x*|| " << fmt(n);
  } else {
    d << "no bias: starts do not share one equilibrium";
  }
  return {ok, d.str()};
}

Outcome gradient_check() {
  Rng rng(808);
  const MapSpec plain;
  const TrainableNetwork tf = make_trainable(2, 2, 2, 6, Activation::kGelu, true, plain, rng);
  const TrainableNetwork tg = make_trainable(1, 2, 2, 6, Activation::kGelu, true, plain, rng);
  BlockSSM model{tf.realize(), tg.realize()};
  constexpr std::size_t kHorizon = 8;
  std::vector<Vector> states, inputs;
  for (std::size_t t = 0; t <= kHorizon; ++t) states.push_back(uniform_vector(2, -1.0, 1.0, rng));
  for (std::size_t t = 0; t < kHorizon; ++t) inputs.push_back(uniform_vector(1, -1.0, 1.0, rng));
  const GradientTape tape = backward(model, states, inputs, kHorizon);

  std::size_t params = 0, bad = 0;
  double worst = 0.0;
  auto probe = [&](bool is_f, std::size_t l, bool is_bias, std::size_t i, std::size_t j, double analytic) {
    auto loss_at = [&](double delta) {
      std::vector<Layer> layers = (is_f ? model.f_net : model.g_net).layers();
      if (is_bias)
        (*layers[l].bias)[i] += delta;
      else
        layers[l].weight(i, j) += delta;
      BlockSSM m = model;
      (is_f ? m.f_net : m.g_net) = MlpNetwork(std::move(layers));
      return rollout_loss(m, states, inputs, kHorizon);
    };
    const double numeric = (loss_at(kGradEps) - loss_at(-kGradEps)) / (2.0 * kGradEps);
    const double rel = std::abs(analytic - numeric) / (std::abs(analytic) + kGradFloor);
    worst = std::max(worst, rel);
    bad += !(rel <= kGradRelTol);
    ++params;
  };
  for (bool is_f : {true, false}) {
    const MlpNetwork& net = is_f ? model.f_net : model.g_net;
    const std::vector<LayerGradient>& grads = is_f ? tape.f : tape.g;
    for (std::size_t l = 0; l < net.depth(); ++l) {
      const Layer& layer = net.layer(l);
      for (std::size_t i = 0; i < layer.output_dim(); ++i) {
        for (std::size_t j = 0; j < layer.input_dim(); ++j) probe(is_f, l, false, i, j, grads[l].weight(i, j));
        if (layer.bias) probe(is_f, l, true, i, 0, grads[l].bias[i]);
      }
    }
  }
  return {bad == 0 && params > 0, std::to_string(params) + " parameters, " + std::to_string(bad) +
                                      " above tolerance, worst relative error " + fmt(worst)};
}

struct TrainedPlant {
  ExperimentConfig config;
  BlockSSM model;
  TrainReport report;
  double seconds = 0.0;
};

TrainedPlant train_plant(const std::string& name) {
  const ExperimentConfig c = load_config(preset(name));
  const auto t0 = std::chrono::steady_clock::now();
  const TrainingData data = training_data(simulate(c.plant));
  TrainState st = init_train_state(data, c.training);
  train(st, data, c.training);
  return {c, selected_model(st), st.report, seconds_since(t0)};
}

Outcome system_identification() {
  std::ostringstream d;
  bool ok = true;
  {
    const Matrix a{{0.9, 0.2}, {-0.1, 0.8}};
    const Matrix b{{0.5}, {-0.3}};
    Rng rng(909);
    TrainingData data;
    const std::array<std::size_t, 3> lengths{400, 100, 100};
    for (std::size_t s = 0; s < 3; ++s) {
      Vector x = uniform_vector(2, -0.5, 0.5, rng);
      for (std::size_t t = 0; t < lengths[s]; ++t) {
        const Vector u = uniform_vector(1, -1.0, 1.0, rng);
        data.states[s].push_back(x);
        data.inputs[s].push_back(u);
        x = add(matvec(a, x), matvec(b, u));
      }
    }
    TrainConfig tc;
    tc.hidden_depth = 0;
    tc.bias = false;
    tc.horizon = 8;
    tc.batch = 32;
    tc.epochs = 200;
    tc.learning_rate = 1e-2;
    TrainState st = init_train_state(data, tc);
    train(st, data, tc);
    const BlockSSM m = selected_model(st);
    double err = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) err = std::max(err, std::abs(m.f_net.layer(0).weight(i, j) - a(i, j)));
      err = std::max(err, std::abs(m.g_net.layer(0).weight(i, 0) - b(i, 0)));
    }
    ok = ok && err <= kLinearMapTol;
    d << "(a) linear max error " << fmt(err) << "; ";
  }
  for (const std::string name : {"cstr", "two-tank"}) {
    const TrainedPlant tp = train_plant(name);
    const double ratio = tp.report.initial_test_loss / tp.report.test_loss;
    ok = ok && ratio >= kTrainImprovement && tp.seconds < kTrainBudgetS;
    // The grid command on the saved f-net, over the configured analysis region.
    const std::string dir = work_dir("grid-" + name);
    const std::string f_path = join_path(dir, "f_net.json");
    save_network(tp.model.f_net, f_path);
    ExperimentConfig gc = tp.config;
    gc.network_file = f_path;
    const nlohmann::json g = run_command(gc, "grid", dir, kSweepThreads).summary;
    const std::size_t diss = g["dissipative_cells"].get<std::size_t>();
    const std::size_t non = g["non_dissipative_cells"].get<std::size_t>();
    if (name == "cstr") ok = ok && diss > 0 && non > 0;
    // Reported only: the normalised operating range [-1, 1]^2.
    const GridAnalysis local = certify_region(tp.model.f_net, GridSpec{-1.0, 1.0, -1.0, 1.0, 120, 120},
                                              kSweepThreads);
    std::size_t local_diss = 0;
    for (const PointVerdict& p : local.cells) local_diss += !p.error && p.dissipative;
    d << "(b) " << name << " test MSE " << fmt(tp.report.initial_test_loss) << " -> "
      << fmt(tp.report.test_loss) << " (" << fmt(ratio) << "x, " << fmt(tp.seconds) << " s); (c) grid "
      << diss << " dissipative, " << non << " not ("
      << fmt(100.0 * g["dissipative_fraction"].get<double>()) << "%), on [-1, 1]^2 "
      << fmt(100.0 * static_cast<double>(local_diss) / static_cast<double>(local.cells.size())) << "%; ";
  }
  std::string s = d.str();
  s.resize(s.size() - 2);
  return {ok, s};
}

Outcome sweep_run() {
  const ExperimentConfig c = load_config(preset("sweep"));
  const std::size_t count = enumerate_sweep(c.sweep, c.network.state_dim).size();
  const auto t0 = std::chrono::steady_clock::now();
  const std::string out = work_dir("sweep");
  const CommandResult r = run_command(c, "sweep", out, kSweepThreads);
  const double secs = seconds_since(t0);
  const std::string csv = read_text_file(join_path(out, "aggregate.csv"));
  const std::size_t rows = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) - 1;
  const std::size_t failures = r.summary["failures"].get<std::size_t>();
  return {count == kSweepCount && rows == count && failures == 0 && secs < kSweepBudgetS,
          std::to_string(count) + " configurations, " + std::to_string(rows) + " rows, " +
              std::to_string(failures) + " failures, " + fmt(secs) + " s with " +
              std::to_string(kSweepThreads) + " threads"};
}

Outcome dissipation_inequality() {
  ExperimentConfig c = load_config(preset("sweep"));
  struct Tally {
    std::size_t nets = 0, steps = 0, violations = 0, contractive_violations = 0;
    double worst = -INFINITY;
  };
  Tally global, regional;
  for (const SweepEntry& e : enumerate_sweep(c.sweep, c.network.state_dim)) {
    const MlpNetwork net = build_network(e.network, e.map, c.seed);
    const CertificateReport cert = certify_network(net, c, kSweepThreads, false);
    if (cert.verdict == CertificateVerdict::kNotCertified) continue;
    Tally& tally = cert.verdict == CertificateVerdict::kGlobal ? global : regional;
    ++tally.nets;
    for (const Vector& start : {Vector{1.0, 1.0}, Vector{-6.0, 6.0}, Vector{6.0, -3.0}}) {
      Vector x = start;
      for (std::size_t t = 0; t < kDissipationSteps; ++t) {
        const PwaForm form = extract_pwa(net, x);
        const Vector next = oracle_forward(net, x);
        const double lhs = oracle_norm2(next.values()) - oracle_norm2(x.values());
        const double rhs = oracle_norm2(form.b_star.values());
        const bool violated = !(lhs <= rhs + kDissipationSlack);
        tally.worst = std::max(tally.worst, lhs - rhs);
        tally.violations += violated;
        tally.contractive_violations += violated && oracle_spectral_norm(form.a_star) < 1.0;
        ++tally.steps;
        x = next;
        if (!std::isfinite(oracle_norm2(x.values()))) break;
      }
    }
  }
  auto text = [](const char* name, const Tally& t) {
    return std::string(name) + " " + std::to_string(t.nets) + " nets, " + std::to_string(t.steps) +
           " steps, " + std::to_string(t.violations) + " violations (" +
           std::to_string(t.contractive_violations) + " where ||A*|| < 1), max excess " + fmt(t.worst);
  };
  // A sampled certificate only covers steps where ||A*(x_t)|| < 1.
  return {global.violations == 0 && regional.contractive_violations == 0 && global.nets + regional.nets > 0,
          text("GLOBAL", global) + "; REGIONAL " + text("", regional).substr(1)};
}

std::set<int> parse_only(const std::string& s) {
  std::set<int> ids;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) ids.insert(std::stoi(tok));
  return ids;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  work_root = (fs::temp_directory_path() / "neurodissip_acceptance").string();
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc)
      only = parse_only(argv[++i]);
    else if (a == "--work" && i + 1 < argc)
      work_root = argv[++i];
    else {
      std::fprintf(stderr, "usage: acceptance [--only N[,N...]] [--work DIR]\n");
      return 1;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "pwa equivalence", pwa_equivalence},
      {2, "contraction soundness", contraction_soundness},
      {3, "equilibrium bounds", equilibrium_bound_check},
      {4, "structured map guarantees", structured_guarantees},
      {5, "dissipative regions", region_maps},
      {6, "depth trend of spectra", depth_trend},
      {7, "bias effect on equilibria", bias_effect},
      {8, "gradient check", gradient_check},
      {9, "system identification", system_identification},
      {10, "hyperparameter sweep", sweep_run},
      {11, "dissipation inequality", dissipation_inequality},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.passed;
    std::printf("%s [%d] %s: %s\n", o.passed ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
