// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#include <doctest.h>

#include <cmath>

#include "neurodissip/errors.hpp"
#include "neurodissip/structured_maps.hpp"

using namespace neurodissip;

namespace {

double max_abs_eig_offset(const Matrix& w, double c) {
  double m = 0.0;
  for (const Complex& e : eigenvalues(w)) m = std::max(m, std::abs(e - c));
  return m;
}

double loss(const StructuredLinearMap& map, const Matrix& probe) {
  const Matrix w = map.realize();
  double s = 0.0;
  for (std::size_t i = 0; i < w.entries().size(); ++i)
    s += probe.entries()[i] * w.entries()[i] + 0.5 * w.entries()[i] * w.entries()[i];
  return s;
}

void check_pullback(StructuredLinearMap map, Rng& rng) {
  Matrix probe(map.rows, map.cols);
  for (double& v : probe.entries()) v = uniform(rng, -1.0, 1.0);
  const Matrix w = map.realize();
  Matrix g = probe;
  for (std::size_t i = 0; i < g.entries().size(); ++i) g.entries()[i] += w.entries()[i];
  const std::vector<Matrix> grads = map.pullback(g);
  REQUIRE(grads.size() == map.params.size());
  const double h = 1e-6;
  for (std::size_t p = 0; p < map.params.size(); ++p) {
    REQUIRE(grads[p].rows() == map.params[p].rows());
    REQUIRE(grads[p].cols() == map.params[p].cols());
    for (std::size_t k = 0; k < map.params[p].entries().size(); ++k) {
      StructuredLinearMap plus = map, minus = map;
      plus.params[p].entries()[k] += h;
      minus.params[p].entries()[k] -= h;
      const double fd = (loss(plus, probe) - loss(minus, probe)) / (2 * h);
      const double an = grads[p].entries()[k];
      CHECK_MESSAGE(std::abs(an - fd) <= 1e-5 * (std::abs(fd) + 1.0),
                    map_kind_name(map.kind), " param ", p, " entry ", k, " analytic ", an,
                    " fd ", fd);
    }
  }
}

}  // namespace

TEST_CASE("Perron-Frobenius weights") {
  Rng rng(1);
  const Matrix stoch = realize_pf(5, 1.0, 1.0, rng);
  for (std::size_t i = 0; i < 5; ++i) {
    double s = 0.0;
    for (double v : stoch.row(i)) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(spectral_radius(stoch) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(frobenius_norm(realize_pf(4, 0.0, 0.0, rng)) == 0.0);
  for (int seed = 0; seed < 100; ++seed) {
    Rng r(seed);
    const StructuredLinearMap map = sample_map(MapKind::kPerronFrobenius, 6, 6, 0.0, 1.0, r);
    const Matrix w = map.realize();
    for (double v : w.entries()) CHECK(v >= 0.0);
    CHECK(spectral_radius(w) <= 1.0 + 1e-10);
    CHECK(check_guarantee(map, w).passed);
  }
  CHECK_THROWS_AS(realize_pf(3, -0.1, 1.0, rng), InvalidArgument);
  CHECK_THROWS_AS(realize_pf(3, 1.0, 0.5, rng), InvalidArgument);
}

TEST_CASE("spectral SVD weights") {
  Rng rng(2);
  const Matrix c = realize_spectral(5, 5, 0.7, 0.7, rng);
  for (double s : svd_bounded(c).s) CHECK(s == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(spectral_norm(c) == doctest::Approx(0.7).epsilon(1e-10));
  for (int seed = 0; seed < 50; ++seed) {
    Rng r(seed);
    const StructuredLinearMap map = sample_map(MapKind::kSpectralSvd, 6, 6, 0.99, 1.10, r);
    const Matrix w = map.realize();
    for (double s : svd_bounded(w).s) {
      CHECK(s >= 0.99 - 1e-8);
      CHECK(s <= 1.10 + 1e-8);
    }
  }
  const Matrix tall = realize_spectral(4, 2, 0.2, 0.5, rng);
  const auto s = svd_bounded(tall).s;
  REQUIRE(s.size() == 2);
  for (double v : s) CHECK((v >= 0.2 - 1e-8 && v <= 0.5 + 1e-8));
  // Negative bounds yield magnitudes.
  Rng r(3);
  const StructuredLinearMap neg = sample_map(MapKind::kSpectralSvd, 4, 4, -1.5, -1.1, r);
  const GuaranteeReport rep = check_guarantee(neg, neg.realize());
  CHECK(rep.passed);
  for (double v : rep.singular_values) CHECK((v >= 1.1 - 1e-8 && v <= 1.5 + 1e-8));
}

TEST_CASE("spectral SVD factors are orthogonal") {
  Rng rng(4);
  const StructuredLinearMap map = sample_map(MapKind::kSpectralSvd, 5, 3, 0.0, 1.0, rng);
  // Unit singular values expose U V directly.
  StructuredLinearMap unit = map;
  unit.lambda_min = unit.lambda_max = 1.0;
  const Matrix w = unit.realize();
  const Matrix wtw = matmul(w.transposed(), w);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(wtw(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-8).scale(1.0));
}

TEST_CASE("Gershgorin weights") {
  Rng rng(5);
  CHECK(realize_gershgorin(4, 0.5, 0.5, false, rng) == scale(Matrix::identity(4), 0.5));
  const Matrix one = realize_gershgorin(1, 0.0, 1.0, false, rng);
  CHECK(one(0, 0) == 0.5);
  for (bool cplx : {false, true}) {
    for (int seed = 0; seed < 100; ++seed) {
      Rng r(seed);
      const Matrix w = realize_gershgorin(8, 0.0, 1.0, cplx, r);
      CHECK(max_abs_eig_offset(w, 0.5) <= 0.5 + 1e-10);
    }
  }
  // Antisymmetric off-diagonal mass produces complex pairs.
  Rng r(6);
  bool has_complex = false;
  for (const Complex& e : eigenvalues(realize_gershgorin(6, 0.0, 1.0, true, r)))
    has_complex |= std::abs(e.imag()) > 1e-6;
  CHECK(has_complex);
  Rng r2(7);
  const Matrix unstable = realize_gershgorin(6, 1.1, 1.5, false, r2);
  CHECK(spectral_radius(unstable) > 1.0);
}

TEST_CASE("generators are deterministic given the seed") {
  for (MapKind k : {MapKind::kUnstructured, MapKind::kPerronFrobenius, MapKind::kSpectralSvd,
                    MapKind::kGershgorinReal, MapKind::kGershgorinComplex}) {
    Rng a(42), b(42);
    CHECK(sample_map(k, 4, 4, 0.0, 1.0, a).realize() == sample_map(k, 4, 4, 0.0, 1.0, b).realize());
  }
}

TEST_CASE("square-only kinds reject rectangular shapes") {
  Rng rng(8);
  CHECK_THROWS_AS(sample_map(MapKind::kGershgorinReal, 3, 2, 0.0, 1.0, rng), DimensionError);
  CHECK_THROWS_AS(sample_map(MapKind::kPerronFrobenius, 3, 2, 0.0, 1.0, rng), DimensionError);
  CHECK_NOTHROW(sample_map(MapKind::kSpectralSvd, 3, 2, 0.0, 1.0, rng));
}

TEST_CASE("norm penalties") {
  const NormPenalties z = weight_norm_penalties(Matrix(3, 3));
  CHECK(z.l1 == 0.0);
  CHECK(z.l2 == 0.0);
  CHECK(z.spectral == 0.0);
  const NormPenalties id = weight_norm_penalties(Matrix::identity(3));
  CHECK(id.l1 == 3.0);
  CHECK(id.l2 == doctest::Approx(std::sqrt(3.0)));
  CHECK(id.spectral == doctest::Approx(1.0));
  Rng rng(9);
  const Matrix w = realize_unstructured(5, 4, rng);
  CHECK(weight_norm_penalties(w).spectral == doctest::Approx(svd_bounded(w).s[0]).epsilon(1e-9));
}

TEST_CASE("pullbacks match finite differences") {
  Rng rng(10);
  check_pullback(sample_map(MapKind::kUnstructured, 3, 4, 0.0, 1.0, rng), rng);
  check_pullback(sample_map(MapKind::kPerronFrobenius, 4, 4, 0.2, 1.3, rng), rng);
  check_pullback(sample_map(MapKind::kSpectralSvd, 4, 3, 0.3, 1.2, rng), rng);
  check_pullback(sample_map(MapKind::kSpectralSvd, 2, 5, -0.4, 0.9, rng), rng);
  check_pullback(sample_map(MapKind::kGershgorinReal, 5, 5, 0.0, 1.0, rng), rng);
  check_pullback(sample_map(MapKind::kGershgorinComplex, 5, 5, 0.1, 0.9, rng), rng);
}

TEST_CASE("map kind names parse") {
  CHECK(parse_map_kind("perron_frobenius") == MapKind::kPerronFrobenius);
  CHECK(parse_map_kind("Spectral") == MapKind::kSpectralSvd);
  CHECK(parse_map_kind("gershgorin-complex") == MapKind::kGershgorinComplex);
  CHECK_THROWS_AS(parse_map_kind("banana"), InvalidArgument);
}
