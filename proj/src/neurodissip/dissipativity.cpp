// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#include "neurodissip/dissipativity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "neurodissip/errors.hpp"
#include "neurodissip/io.hpp"
#include "neurodissip/parallel.hpp"

namespace neurodissip {
namespace {

constexpr double kOriginTol = 1e-12;
constexpr double kDegenerateTol = 1e-12;

void require_square(const MlpNetwork& net, const char* what) {
  if (!net.is_square())
    throw DimensionError(std::string(what) + ": network maps dim " +
                         std::to_string(net.input_dim()) + " to " +
                         std::to_string(net.output_dim()) + "; dynamics need a square map");
}

PointVerdict safe_verdict(const MlpNetwork& net, const Vector& x) {
  try {
    return point_verdict(net, x);
  } catch (const Error& e) {
    PointVerdict v;
    v.anchor = x;
    v.error = e.what();
    return v;
  }
}

std::string verdict_row(const PointVerdict& v) {
  std::string row;
  for (double c : v.anchor) row += format_double(c) + ",";
  if (v.error) return row + ",,error,,,,[]";
  row += format_double(v.a_norm) + "," + format_double(v.b_norm) + ",";
  row += v.dissipative ? "true," : "false,";
  if (v.contractive_affine) row += *v.contractive_affine ? "true" : "false";
  row += ",";
  if (v.eigenvalues.empty()) {
    row += ",,[]";
  } else {
    row += format_double(v.eigenvalues.front().real()) + "," +
           format_double(v.eigenvalues.front().imag()) + ",";
    std::vector<double> mods;
    for (const Complex& e : v.eigenvalues) mods.push_back(std::abs(e));
    row += "\"" + format_array(mods) + "\"";
  }
  return row;
}

std::string csv_header(std::size_t dim) {
  std::string h;
  for (std::size_t i = 0; i < dim; ++i) h += "x" + std::to_string(i + 1) + ",";
  return h + "a_norm,b_norm,dissipative,contractive_affine,max_eig_re,max_eig_im,eig_moduli\n";
}

}  // namespace

PointVerdict point_verdict(const MlpNetwork& net, const Vector& x) {
  require_square(net, "point_verdict");
  const PwaForm form = extract_pwa(net, x);
  PointVerdict v;
  v.anchor = x;
  v.a_norm = spectral_norm(form.a_star);
  v.b_norm = norm2(form.b_star);
  v.eigenvalues = eigenvalues(form.a_star);
  v.dissipative = v.a_norm < 1.0;
  const double xn = norm2(x);
  if (xn >= kOriginTol) v.contractive_affine = v.a_norm < 1.0 - v.b_norm / xn;
  return v;
}

double a_norm_at(const MlpNetwork& net, const Vector& x) {
  require_square(net, "a_norm_at");
  return spectral_norm(extract_pwa(net, x).a_star);
}

Vector GridSpec::anchor(std::size_t k) const {
  const std::size_t ix = k % nx;
  const std::size_t iy = k / nx;
  const double dx = (x_hi - x_lo) / static_cast<double>(nx);
  const double dy = (y_hi - y_lo) / static_cast<double>(ny);
  return Vector{x_lo + (static_cast<double>(ix) + 0.5) * dx,
                y_lo + (static_cast<double>(iy) + 0.5) * dy};
}

void GridSpec::validate() const {
  if (nx == 0 || ny == 0) throw InvalidArgument("grid: resolution must be positive");
  if (!(x_lo < x_hi) || !(y_lo < y_hi))
    throw InvalidArgument("grid: ranges must satisfy lo < hi");
}

double GridAnalysis::dissipative_fraction() const {
  const std::size_t analysed = dissipative + non_dissipative;
  return analysed ? static_cast<double>(dissipative) / static_cast<double>(analysed) : 0.0;
}

const PointVerdict* GridAnalysis::worst_cell() const {
  const PointVerdict* worst = nullptr;
  for (const PointVerdict& c : cells)
    if (!c.error && (!worst || c.a_norm > worst->a_norm)) worst = &c;
  return worst;
}

GridAnalysis certify_region(const MlpNetwork& net, const GridSpec& spec, std::size_t threads) {
  spec.validate();
  require_square(net, "certify_region");
  if (net.input_dim() != 2)
    throw DimensionError("certify_region: grids need a 2-D state, got dim " +
                         std::to_string(net.input_dim()) + "; use sampled anchors instead");
  GridAnalysis g;
  g.spec = spec;
  g.cells.resize(spec.size());
  parallel_for(spec.size(), threads,
               [&](std::size_t k) { g.cells[k] = safe_verdict(net, spec.anchor(k)); });
  for (const PointVerdict& c : g.cells) {
    if (c.error)
      ++g.errors;
    else if (c.dissipative)
      ++g.dissipative;
    else
      ++g.non_dissipative;
  }
  return g;
}

std::vector<PointVerdict> certify_anchors(const MlpNetwork& net, const std::vector<Vector>& anchors,
                                          std::size_t threads) {
  require_square(net, "certify_anchors");
  std::vector<PointVerdict> out(anchors.size());
  parallel_for(anchors.size(), threads,
               [&](std::size_t k) { out[k] = safe_verdict(net, anchors[k]); });
  return out;
}

std::vector<Vector> latin_hypercube(std::size_t count, std::size_t dim, double lo, double hi,
                                    Rng& rng) {
  if (!(lo < hi)) throw InvalidArgument("latin_hypercube: need lo < hi");
  std::vector<Vector> pts(count, Vector(dim));
  std::vector<std::size_t> perm(count);
  const double width = (hi - lo) / static_cast<double>(count);
  for (std::size_t d = 0; d < dim; ++d) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < count; ++i)
      pts[i][d] = lo + (static_cast<double>(perm[i]) + uniform(rng, 0.0, 1.0)) * width;
  }
  return pts;
}

LayerwiseCertificate layerwise_certificate(const MlpNetwork& net,
                                           const std::vector<Vector>& z_samples) {
  LayerwiseCertificate c;
  c.norm_product = 1.0;
  std::size_t strict = 0;
  bool all_leq_one = true;
  for (const Layer& layer : net.layers()) {
    const double w = spectral_norm(layer.weight);
    c.w_norms.push_back(w);
    c.norm_product *= w;
    if (w < 1.0) ++strict;
    if (w > 1.0) all_leq_one = false;
    if (!layer.activation) continue;
    const Activation act = *layer.activation;
    if (stability_class(act) == StabilityClass::kStable) continue;
    c.lambda_analytic = false;
    double sup = 0.0;
    for (const Vector& z : z_samples)
      for (double zi : z) sup = std::max(sup, std::abs(lambda_entry(act, zi)));
    if (!z_samples.empty())
      c.sampled_lambda_sup = std::max(c.sampled_lambda_sup.value_or(0.0), sup);
  }
  c.lambda_bound = c.lambda_analytic
                       ? 1.0
                       : c.sampled_lambda_sup.value_or(std::numeric_limits<double>::infinity());
  c.certified = c.lambda_analytic && strict == c.w_norms.size();
  c.relaxed = c.lambda_analytic && all_leq_one && strict >= 1;
  return c;
}

EquilibriumBounds equilibrium_bounds(const PwaForm& form) {
  const Matrix& a = form.a_star;
  if (!a.is_square())
    throw DimensionError("equilibrium_bounds: A* " + a.shape() + " is not square");
  const Matrix i_minus_a = subtract(Matrix::identity(a.rows()), a);
  const double denom = spectral_norm(i_minus_a);
  if (denom < kDegenerateTol)
    throw DegenerateError("equilibrium_bounds: ||I - A*||_2 = " + format_double(denom) +
                          " (A* is numerically the identity)");
  const double bn = norm2(form.b_star);
  const double an = spectral_norm(a);
  EquilibriumBounds b;
  b.lower = bn / denom;
  if (an < 1.0) b.upper = bn / (1.0 - an);
  return b;
}

double dissipativity_penalty(const MlpNetwork& net, const std::vector<Vector>& anchors) {
  if (anchors.empty()) throw InvalidArgument("dissipativity_penalty: no anchors");
  double s = 0.0;
  for (const Vector& x : anchors) s += std::max(1.0, a_norm_at(net, x));
  return s / static_cast<double>(anchors.size());
}

nlohmann::json verdict_to_json(const PointVerdict& v) {
  nlohmann::json j;
  j["anchor"] = v.anchor.values();
  if (v.error) {
    j["error"] = *v.error;
    return j;
  }
  j["a_norm"] = v.a_norm;
  j["b_norm"] = v.b_norm;
  j["dissipative"] = v.dissipative;
  j["contractive_affine"] = v.contractive_affine ? nlohmann::json(*v.contractive_affine) : nullptr;
  nlohmann::json eig = nlohmann::json::array();
  for (const Complex& e : v.eigenvalues) eig.push_back({e.real(), e.imag()});
  j["eigenvalues"] = std::move(eig);
  return j;
}

nlohmann::json layerwise_to_json(const LayerwiseCertificate& c) {
  return {{"certified", c.certified},
          {"relaxed", c.relaxed},
          {"w_norms", c.w_norms},
          {"norm_product", c.norm_product},
          {"lambda_bound", std::isfinite(c.lambda_bound) ? nlohmann::json(c.lambda_bound) : nullptr},
          {"lambda_analytic", c.lambda_analytic},
          {"sampled_lambda_sup",
           c.sampled_lambda_sup ? nlohmann::json(*c.sampled_lambda_sup) : nullptr}};
}

nlohmann::json bounds_to_json(const EquilibriumBounds& b) {
  return {{"lower", b.lower}, {"upper", std::isfinite(b.upper) ? nlohmann::json(b.upper) : nullptr}};
}

nlohmann::json grid_spec_to_json(const GridSpec& g) {
  return {{"x_range", {g.x_lo, g.x_hi}}, {"y_range", {g.y_lo, g.y_hi}}, {"resolution", {g.nx, g.ny}}};
}

GridSpec grid_spec_from_json(const nlohmann::json& j) {
  GridSpec g;
  try {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (it.key() != "x_range" && it.key() != "y_range" && it.key() != "resolution")
        throw ConfigError("grid: unknown key '" + it.key() + "'");
    if (j.contains("x_range")) {
      g.x_lo = j["x_range"].at(0).get<double>();
      g.x_hi = j["x_range"].at(1).get<double>();
    }
    if (j.contains("y_range")) {
      g.y_lo = j["y_range"].at(0).get<double>();
      g.y_hi = j["y_range"].at(1).get<double>();
    }
    if (j.contains("resolution")) {
      g.nx = j["resolution"].at(0).get<std::size_t>();
      g.ny = j["resolution"].at(1).get<std::size_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  g.validate();
  return g;
}

std::string grid_to_csv(const GridAnalysis& grid) { return verdicts_to_csv(grid.cells); }

std::string verdicts_to_csv(const std::vector<PointVerdict>& verdicts) {
  const std::size_t dim = verdicts.empty() ? 2 : verdicts.front().anchor.size();
  std::string out = csv_header(dim);
  for (const PointVerdict& v : verdicts) out += verdict_row(v) + "\n";
  return out;
}

nlohmann::json grid_to_json(const GridAnalysis& grid) {
  nlohmann::json cells = nlohmann::json::array();
  for (const PointVerdict& c : grid.cells) cells.push_back(verdict_to_json(c));
  nlohmann::json j{{"grid", grid_spec_to_json(grid.spec)},
                   {"dissipative_cells", grid.dissipative},
                   {"non_dissipative_cells", grid.non_dissipative},
                   {"error_cells", grid.errors},
                   {"dissipative_fraction", grid.dissipative_fraction()},
                   {"cells", std::move(cells)}};
  if (const PointVerdict* w = grid.worst_cell())
    j["worst_cell"] = {{"anchor", w->anchor.values()}, {"a_norm", w->a_norm}};
  return j;
}

}  // namespace neurodissip
