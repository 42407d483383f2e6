// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "neurodissip/linalg.hpp"
#include "neurodissip/random.hpp"

namespace neurodissip {

enum class MapKind {
  kUnstructured,
  kPerronFrobenius,
  kSpectralSvd,
  kGershgorinReal,
  kGershgorinComplex,
};

std::string_view map_kind_name(MapKind k);
MapKind parse_map_kind(std::string_view name);
bool map_kind_is_square_only(MapKind k);

/// A weight parametrisation. `params` hold the raw (trainable) parameters and
/// `realize()` maps them to a weight that satisfies the kind's spectral
/// guarantee for any parameter values.
///
///   unstructured       {W}
///   perron_frobenius   {A' (n x n), M' (n x n)}
///   spectral_svd       {U reflectors (rows x rows), V reflectors (cols x cols), Sigma (1 x k)}
///   gershgorin_*       {M (n x n)}, diagonal ignored
struct StructuredLinearMap {
  MapKind kind = MapKind::kUnstructured;
  std::size_t rows = 0;
  std::size_t cols = 0;
  double lambda_min = 0.0;
  double lambda_max = 1.0;
  std::uint64_t seed = 0;
  std::vector<Matrix> params;

  Matrix realize() const;
  /// Chain rule through realize(): dL/dparams given dL/dW.
  std::vector<Matrix> pullback(const Matrix& grad_weight) const;
};

/// Draws raw parameters. Throws InvalidArgument on bounds the kind cannot honour.
StructuredLinearMap sample_map(MapKind kind, std::size_t rows, std::size_t cols, double lambda_min,
                               double lambda_max, Rng& rng);

/// W_ij = softmax_row(A')_ij * M_ij, M = hi - (hi - lo) * sigmoid(M').
/// Requires 0 <= lo <= hi. Entries are non-negative, row sums lie in [lo, hi].
Matrix realize_pf(std::size_t n, double lambda_min, double lambda_max, Rng& rng);

/// W = U diag(hi - (hi - lo) * sigmoid(Sigma)) V with U, V products of
/// Householder reflectors. Non-square shapes are allowed. Bounds of either
/// sign are accepted; singular values are the magnitudes of the clamped diagonal.
Matrix realize_spectral(std::size_t rows, std::size_t cols, double lambda_min, double lambda_max,
                        Rng& rng);

/// W = diag(r / s) M + lambda I with lambda = (lo + hi) / 2, r = (hi - lo) / 2,
/// M ~ U(0,1) off the diagonal and s the absolute row sums of M. The complex
/// variant antisymmetrises M first, which favours complex eigenpairs.
/// Every eigenvalue lies in the disc |z - lambda| <= r.
Matrix realize_gershgorin(std::size_t n, double lambda_min, double lambda_max,
                          bool complex_conjugate, Rng& rng);

/// PyTorch-style U(-1/sqrt(cols), 1/sqrt(cols)) entries.
Matrix realize_unstructured(std::size_t rows, std::size_t cols, Rng& rng);

/// Singular-value interval implied by spectral bounds (magnitudes of [lo, hi]).
std::pair<double, double> singular_value_interval(double lambda_min, double lambda_max);

struct NormPenalties {
  double l1 = 0.0;
  double l2 = 0.0;  // Frobenius
  double spectral = 0.0;
};
NormPenalties weight_norm_penalties(const Matrix& w);

struct GuaranteeReport {
  bool passed = true;
  std::string guarantee;
  std::vector<Complex> eigenvalues;  // empty for non-square weights
  std::vector<double> singular_values;
  double max_violation = 0.0;
};

/// Checks the realised weight against the kind's guarantee:
/// PF non-negativity, row sums and spectral radius (tol 1e-10); spectral-SVD
/// singular values (tol 1e-8); Gershgorin disc (tol 1e-10).
GuaranteeReport check_guarantee(const StructuredLinearMap& map, const Matrix& w);

nlohmann::json guarantee_to_json(const GuaranteeReport& report);

}  // namespace neurodissip
