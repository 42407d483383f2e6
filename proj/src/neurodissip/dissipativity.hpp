// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "neurodissip/linalg.hpp"
#include "neurodissip/network.hpp"
#include "neurodissip/pwa.hpp"
#include "neurodissip/random.hpp"

namespace neurodissip {

/// Norm verdict at one anchor. `contractive_affine` is absent at the origin;
/// `error` marks a cell whose analysis failed (other fields are then unset).
struct PointVerdict {
  Vector anchor;
  double a_norm = 0.0;
  double b_norm = 0.0;
  std::vector<Complex> eigenvalues;
  bool dissipative = false;
  std::optional<bool> contractive_affine;
  std::optional<std::string> error;
};

/// Throws DimensionError for non-square networks.
PointVerdict point_verdict(const MlpNetwork& net, const Vector& x);

/// ||A*(x)||_2 only, for bulk checks.
double a_norm_at(const MlpNetwork& net, const Vector& x);

/// Uniform grid of cell centres over [x_lo, x_hi] x [y_lo, y_hi].
struct GridSpec {
  double x_lo = -6.0;
  double x_hi = 6.0;
  double y_lo = -6.0;
  double y_hi = 6.0;
  std::size_t nx = 120;
  std::size_t ny = 120;

  std::size_t size() const noexcept { return nx * ny; }
  /// Cell index k = iy * nx + ix.
  Vector anchor(std::size_t k) const;
  void validate() const;
};

struct GridAnalysis {
  GridSpec spec;
  std::vector<PointVerdict> cells;  // row-major in y, see GridSpec::anchor
  std::size_t dissipative = 0;
  std::size_t non_dissipative = 0;
  std::size_t errors = 0;

  double dissipative_fraction() const;
  /// Largest a_norm among analysed cells; nullptr if none.
  const PointVerdict* worst_cell() const;
};

/// Analyses every cell; per-cell numerical failures become error markers.
GridAnalysis certify_region(const MlpNetwork& net, const GridSpec& spec, std::size_t threads = 1);

/// Same verdicts over arbitrary anchors (for state dimension above two).
std::vector<PointVerdict> certify_anchors(const MlpNetwork& net, const std::vector<Vector>& anchors,
                                          std::size_t threads = 1);

/// Latin-hypercube sample of `count` points in [lo, hi]^dim.
std::vector<Vector> latin_hypercube(std::size_t count, std::size_t dim, double lo, double hi,
                                    Rng& rng);

/// Sufficient global condition: every ||W_l||_2 < 1 with activation gains
/// bounded by one. Gains are accepted only analytically (stable class); for
/// other activations the sampled supremum is reported but never certifies.
/// `relaxed` allows all but one layer norm to equal one.
struct LayerwiseCertificate {
  bool certified = false;
  bool relaxed = false;
  std::vector<double> w_norms;
  double lambda_bound = 0.0;      // 1 when analytic, else the sampled supremum or +inf
  bool lambda_analytic = true;    // false if any activation needed sampling
  std::optional<double> sampled_lambda_sup;
  double norm_product = 0.0;      // upper bound on ||A*(x)||_2 when gains <= 1
};

LayerwiseCertificate layerwise_certificate(const MlpNetwork& net,
                                           const std::vector<Vector>& z_samples = {});

/// Bounds on the norm of an equilibrium near the anchor:
/// lower = ||b*|| / ||I - A*||, upper = ||b*|| / (1 - ||A*||) or +inf.
struct EquilibriumBounds {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
};

/// Throws DegenerateError when ||I - A*||_2 < 1e-12.
EquilibriumBounds equilibrium_bounds(const PwaForm& form);

/// Mean over anchors of max(1, ||A*(x)||_2).
double dissipativity_penalty(const MlpNetwork& net, const std::vector<Vector>& anchors);

nlohmann::json verdict_to_json(const PointVerdict& v);
nlohmann::json layerwise_to_json(const LayerwiseCertificate& c);
nlohmann::json bounds_to_json(const EquilibriumBounds& b);
nlohmann::json grid_spec_to_json(const GridSpec& g);
GridSpec grid_spec_from_json(const nlohmann::json& j);

/// CSV: x1,x2,a_norm,b_norm,dissipative,contractive_affine,max_eig_re,max_eig_im,eig_moduli
std::string grid_to_csv(const GridAnalysis& grid);
std::string verdicts_to_csv(const std::vector<PointVerdict>& verdicts);
nlohmann::json grid_to_json(const GridAnalysis& grid);

}  // namespace neurodissip
