// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "neurodissip/dissipativity.hpp"
#include "neurodissip/linalg.hpp"
#include "neurodissip/network.hpp"

namespace neurodissip {

enum class AttractorClass { kConvergedPoint, kLimitCycle, kDiverged, kUndetermined };

std::string_view attractor_name(AttractorClass c);

inline constexpr double kDivergenceNorm = 1e6;
inline constexpr double kConvergenceTol = 1e-9;
inline constexpr std::size_t kConvergenceCount = 5;
inline constexpr double kCycleTol = 1e-6;
inline constexpr std::size_t kMaxPeriod = 512;
inline constexpr std::size_t kDefaultRolloutSteps = 2000;

struct AttractorReport {
  AttractorClass kind = AttractorClass::kUndetermined;
  std::optional<Vector> limit;   // final point, or a canonical state of the cycle
  std::size_t period = 0;        // limit cycles only
  std::vector<Vector> cycle;     // limit cycles only, in time order
  Vector tail_lo;                // bounding box of the last max_period states
  Vector tail_hi;
};

struct Trajectory {
  std::vector<Vector> states;    // states[0] = x0
  bool converged_halt = false;
  bool diverged_halt = false;
  AttractorReport attractor;
};

/// Iterates x_{t+1} = f(x_t) for up to `steps` steps. Halts on divergence
/// (||x|| > 1e6 or non-finite) or after 5 consecutive steps with
/// ||x_{t+1} - x_t|| < 1e-9. The attractor is classified with defaults.
Trajectory rollout(const MlpNetwork& net, const Vector& x0, std::size_t steps);

/// converged_point / diverged follow the halts. Otherwise the smallest period
/// p in [2, max_period] for which the last p states each recur within
/// cycle_tol, provided the final step itself moved at least cycle_tol.
/// Everything else (line, quasi-periodic, slow transients) is undetermined.
AttractorReport classify_attractor(const Trajectory& traj, double cycle_tol = kCycleTol,
                                   std::size_t max_period = kMaxPeriod);

struct BasinMap {
  GridSpec spec;
  std::vector<AttractorClass> kind;  // per cell, GridSpec indexing
  std::vector<int> limit_id;         // -1 for diverged/undetermined
  std::vector<Vector> limits;        // cluster representatives
  std::vector<std::size_t> limit_counts;
};

/// Rolls out from every cell centre. Limits (fixed points and canonical cycle
/// states) are clustered within `cluster_radius` in cell order.
BasinMap basin_map(const MlpNetwork& net, const GridSpec& spec, std::size_t steps,
                   std::size_t threads = 1, double cluster_radius = 1e-4);

struct SpectraStudy {
  std::size_t depth = 0;
  std::vector<double> moduli;       // pooled over anchors
  double max_modulus = 0.0;
  double median_modulus = 0.0;
  std::vector<std::size_t> histogram;  // 50 bins over [0, max_modulus]
  double bin_width = 0.0;
};

inline constexpr std::size_t kSpectraBins = 50;

/// Pools eigenvalue moduli of A*(x) of `net` over the anchors; `depth` labels the study.
SpectraStudy spectra_study(const MlpNetwork& net, std::size_t depth,
                           const std::vector<Vector>& anchors, std::size_t threads = 1);

/// The weight-shared net of depth L applies (W, b, s) L times. Builds it for
/// each depth and pools eigenvalue moduli of A*(x) over the anchors.
std::vector<SpectraStudy> depth_spectra(const Layer& layer, const std::vector<std::size_t>& depths,
                                        const std::vector<Vector>& anchors,
                                        std::size_t threads = 1);

MlpNetwork weight_shared_network(const Layer& layer, std::size_t depth);

double median(std::vector<double> values);

std::string trajectory_to_csv(const Trajectory& traj);
std::string basin_to_csv(const BasinMap& map);
std::string spectra_to_csv(const std::vector<SpectraStudy>& studies);
/// Raw pooled moduli: depth,modulus.
std::string spectra_moduli_to_csv(const std::vector<SpectraStudy>& studies);

nlohmann::json attractor_to_json(const AttractorReport& r);
nlohmann::json basin_summary_json(const BasinMap& map);
nlohmann::json spectra_summary_json(const std::vector<SpectraStudy>& studies);

}  // namespace neurodissip
