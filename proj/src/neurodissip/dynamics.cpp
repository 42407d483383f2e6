// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#include "neurodissip/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "neurodissip/errors.hpp"
#include "neurodissip/io.hpp"
#include "neurodissip/parallel.hpp"
#include "neurodissip/pwa.hpp"

namespace neurodissip {
namespace {

double distance(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

bool lex_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

std::string_view attractor_name(AttractorClass c) {
  switch (c) {
    case AttractorClass::kConvergedPoint: return "converged_point";
    case AttractorClass::kLimitCycle: return "limit_cycle";
    case AttractorClass::kDiverged: return "diverged";
    case AttractorClass::kUndetermined: return "undetermined";
  }
  return "undetermined";
}

Trajectory rollout(const MlpNetwork& net, const Vector& x0, std::size_t steps) {
  if (!net.is_square())
    throw DimensionError("rollout: network maps dim " + std::to_string(net.input_dim()) + " to " +
                         std::to_string(net.output_dim()));
  if (steps == 0) throw InvalidArgument("rollout: steps must be at least 1");
  Trajectory traj;
  traj.states.reserve(std::min<std::size_t>(steps + 1, 4096));
  traj.states.push_back(x0);
  std::size_t still = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    Vector next = net.evaluate(traj.states.back());
    if (!all_finite(next.span()) || norm2(next) > kDivergenceNorm) {
      if (all_finite(next.span())) traj.states.push_back(std::move(next));
      traj.diverged_halt = true;
      break;
    }
    const double step = distance(next, traj.states.back());
    traj.states.push_back(std::move(next));
    still = step < kConvergenceTol ? still + 1 : 0;
    if (still >= kConvergenceCount) {
      traj.converged_halt = true;
      break;
    }
  }
  traj.attractor = classify_attractor(traj);
  return traj;
}

AttractorReport classify_attractor(const Trajectory& traj, double cycle_tol,
                                   std::size_t max_period) {
  if (traj.states.empty()) throw InvalidArgument("classify_attractor: empty trajectory");
  AttractorReport r;
  const std::vector<Vector>& s = traj.states;
  const std::size_t n = s.size();
  const std::size_t dim = s.front().size();
  const std::size_t tail = std::min(n, max_period);
  r.tail_lo = s.back();
  r.tail_hi = s.back();
  for (std::size_t k = n - tail; k < n; ++k)
    for (std::size_t i = 0; i < dim; ++i) {
      r.tail_lo[i] = std::min(r.tail_lo[i], s[k][i]);
      r.tail_hi[i] = std::max(r.tail_hi[i], s[k][i]);
    }

  if (traj.diverged_halt) {
    r.kind = AttractorClass::kDiverged;
    return r;
  }
  if (traj.converged_halt) {
    r.kind = AttractorClass::kConvergedPoint;
    r.limit = s.back();
    return r;
  }
  if (n >= 2 && distance(s[n - 1], s[n - 2]) >= cycle_tol) {
    for (std::size_t p = 2; p <= max_period && 2 * p <= n; ++p) {
      bool recurs = true;
      for (std::size_t k = 0; k < p && recurs; ++k)
        recurs = distance(s[n - 1 - k], s[n - 1 - k - p]) < cycle_tol;
      if (!recurs) continue;
      r.kind = AttractorClass::kLimitCycle;
      r.period = p;
      r.cycle.assign(s.end() - static_cast<std::ptrdiff_t>(p), s.end());
      r.limit = *std::min_element(r.cycle.begin(), r.cycle.end(), lex_less);
      return r;
    }
  }
  r.kind = AttractorClass::kUndetermined;
  return r;
}

BasinMap basin_map(const MlpNetwork& net, const GridSpec& spec, std::size_t steps,
                   std::size_t threads, double cluster_radius) {
  spec.validate();
  if (!net.is_square() || net.input_dim() != 2)
    throw DimensionError("basin_map: needs a 2-D autonomous network");
  std::vector<AttractorReport> reports(spec.size());
  parallel_for(spec.size(), threads,
               [&](std::size_t k) { reports[k] = rollout(net, spec.anchor(k), steps).attractor; });
  BasinMap map;
  map.spec = spec;
  map.kind.resize(spec.size());
  map.limit_id.assign(spec.size(), -1);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const AttractorReport& r = reports[k];
    map.kind[k] = r.kind;
    if (!r.limit) continue;
    int id = -1;
    for (std::size_t c = 0; c < map.limits.size(); ++c)
      if (distance(map.limits[c], *r.limit) <= cluster_radius) {
        id = static_cast<int>(c);
        break;
      }
    if (id < 0) {
      id = static_cast<int>(map.limits.size());
      map.limits.push_back(*r.limit);
      map.limit_counts.push_back(0);
    }
    map.limit_id[k] = id;
    ++map.limit_counts[static_cast<std::size_t>(id)];
  }
  return map;
}

MlpNetwork weight_shared_network(const Layer& layer, std::size_t depth) {
  if (depth == 0) throw InvalidArgument("weight_shared_network: depth must be at least 1");
  if (!layer.weight.is_square())
    throw DimensionError("weight_shared_network: shared weight " + layer.weight.shape() +
                         " is not square");
  return MlpNetwork(std::vector<Layer>(depth, layer));
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

SpectraStudy spectra_study(const MlpNetwork& net, std::size_t depth,
                           const std::vector<Vector>& anchors, std::size_t threads) {
  std::vector<std::vector<double>> per_anchor(anchors.size());
  parallel_for(anchors.size(), threads, [&](std::size_t k) {
    for (const Complex& e : eigenvalues(extract_pwa(net, anchors[k]).a_star))
      per_anchor[k].push_back(std::abs(e));
  });
  SpectraStudy s;
  s.depth = depth;
  for (const auto& m : per_anchor) s.moduli.insert(s.moduli.end(), m.begin(), m.end());
  for (double m : s.moduli) s.max_modulus = std::max(s.max_modulus, m);
  s.median_modulus = median(s.moduli);
  s.histogram.assign(kSpectraBins, 0);
  s.bin_width = s.max_modulus / static_cast<double>(kSpectraBins);
  for (double m : s.moduli) {
    std::size_t b = s.bin_width > 0.0 ? static_cast<std::size_t>(m / s.bin_width) : 0;
    ++s.histogram[std::min(b, kSpectraBins - 1)];
  }
  return s;
}

std::vector<SpectraStudy> depth_spectra(const Layer& layer, const std::vector<std::size_t>& depths,
                                        const std::vector<Vector>& anchors, std::size_t threads) {
  std::vector<SpectraStudy> out;
  for (std::size_t depth : depths)
    out.push_back(spectra_study(weight_shared_network(layer, depth), depth, anchors, threads));
  return out;
}

std::string trajectory_to_csv(const Trajectory& traj) {
  const std::size_t dim = traj.states.empty() ? 0 : traj.states.front().size();
  std::string out = "t";
  for (std::size_t i = 0; i < dim; ++i) out += ",x" + std::to_string(i + 1);
  out += "\n";
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    out += std::to_string(t);
    for (double v : traj.states[t]) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

std::string basin_to_csv(const BasinMap& map) {
  std::string out = "x1,x2,class,limit_id\n";
  for (std::size_t k = 0; k < map.kind.size(); ++k) {
    const Vector a = map.spec.anchor(k);
    out += format_double(a[0]) + "," + format_double(a[1]) + "," +
           std::string(attractor_name(map.kind[k])) + "," + std::to_string(map.limit_id[k]) + "\n";
  }
  return out;
}

std::string spectra_to_csv(const std::vector<SpectraStudy>& studies) {
  std::string out = "bin_lo,bin_hi,count,depth\n";
  for (const SpectraStudy& s : studies)
    for (std::size_t b = 0; b < s.histogram.size(); ++b)
      out += format_double(s.bin_width * static_cast<double>(b)) + "," +
             format_double(s.bin_width * static_cast<double>(b + 1)) + "," +
             std::to_string(s.histogram[b]) + "," + std::to_string(s.depth) + "\n";
  return out;
}

std::string spectra_moduli_to_csv(const std::vector<SpectraStudy>& studies) {
  std::string out = "depth,modulus\n";
  for (const SpectraStudy& s : studies)
    for (double m : s.moduli) out += std::to_string(s.depth) + "," + format_double(m) + "\n";
  return out;
}

nlohmann::json attractor_to_json(const AttractorReport& r) {
  nlohmann::json j{{"class", attractor_name(r.kind)},
                   {"tail_lo", r.tail_lo.values()},
                   {"tail_hi", r.tail_hi.values()}};
  j["limit"] = r.limit ? nlohmann::json(r.limit->values()) : nullptr;
  if (r.kind == AttractorClass::kLimitCycle) {
    j["period"] = r.period;
    nlohmann::json cyc = nlohmann::json::array();
    for (const Vector& v : r.cycle) cyc.push_back(v.values());
    j["cycle"] = std::move(cyc);
  }
  return j;
}

nlohmann::json basin_summary_json(const BasinMap& map) {
  nlohmann::json counts = nlohmann::json::object();
  for (AttractorClass c : {AttractorClass::kConvergedPoint, AttractorClass::kLimitCycle,
                           AttractorClass::kDiverged, AttractorClass::kUndetermined})
    counts[std::string(attractor_name(c))] =
        std::count(map.kind.begin(), map.kind.end(), c);
  nlohmann::json limits = nlohmann::json::array();
  for (std::size_t i = 0; i < map.limits.size(); ++i)
    limits.push_back({{"id", i}, {"state", map.limits[i].values()}, {"cells", map.limit_counts[i]}});
  return {{"grid", grid_spec_to_json(map.spec)},
          {"class_counts", std::move(counts)},
          {"limit_clusters", map.limits.size()},
          {"limits", std::move(limits)}};
}

nlohmann::json spectra_summary_json(const std::vector<SpectraStudy>& studies) {
  nlohmann::json arr = nlohmann::json::array();
  for (const SpectraStudy& s : studies)
    arr.push_back({{"depth", s.depth},
                   {"count", s.moduli.size()},
                   {"median_modulus", s.median_modulus},
                   {"max_modulus", s.max_modulus},
                   {"bin_width", s.bin_width},
                   {"histogram", s.histogram}});
  return {{"studies", std::move(arr)}};
}

}  // namespace neurodissip
