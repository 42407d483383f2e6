// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#include "neurodissip/commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>

#include "neurodissip/dynamics.hpp"
#include "neurodissip/errors.hpp"
#include "neurodissip/io.hpp"
#include "neurodissip/parallel.hpp"
#include "neurodissip/plants.hpp"
#include "neurodissip/pwa.hpp"
#include "neurodissip/training.hpp"

namespace neurodissip {
namespace {

using nlohmann::json;

constexpr double kFixedPointMerge = 1e-6;

Vector config_x0(const ExperimentConfig& c, const MlpNetwork& net) {
  if (c.analysis.x0.size() != net.input_dim())
    throw DimensionError("analysis.x0 has " + std::to_string(c.analysis.x0.size()) +
                         " entries, network input dim is " + std::to_string(net.input_dim()));
  return Vector(c.analysis.x0);
}

// Anchors over the grid box: a resolution^2 lattice in 2-D, a Latin hypercube otherwise.
std::vector<Vector> analysis_anchors(const ExperimentConfig& c, std::size_t dim,
                                     std::size_t resolution, std::size_t count) {
  const GridSpec& g = c.analysis.grid;
  if (dim == 2) {
    GridSpec lattice = g;
    lattice.nx = lattice.ny = resolution;
    std::vector<Vector> out;
    for (std::size_t k = 0; k < lattice.size(); ++k) out.push_back(lattice.anchor(k));
    return out;
  }
  Rng rng(stable_hash("anchors", c.seed));
  return latin_hypercube(count, dim, g.x_lo, g.x_hi, rng);
}

json verdict_counts(const std::vector<PointVerdict>& v) {
  std::size_t diss = 0, non = 0, err = 0;
  for (const PointVerdict& p : v) {
    if (p.error)
      ++err;
    else if (p.dissipative)
      ++diss;
    else
      ++non;
  }
  const std::size_t ok = diss + non;
  return {{"dissipative_cells", diss},
          {"non_dissipative_cells", non},
          {"error_cells", err},
          {"dissipative_fraction", ok ? static_cast<double>(diss) / static_cast<double>(ok) : 0.0}};
}

const PointVerdict* worst_of(const std::vector<PointVerdict>& v) {
  const PointVerdict* w = nullptr;
  for (const PointVerdict& p : v)
    if (!p.error && (!w || p.a_norm > w->a_norm)) w = &p;
  return w;
}

json grid_summary(const CertificateReport& r) {
  const std::vector<PointVerdict>& cells = r.anchors.empty() ? r.grid.cells : r.anchors;
  json j = verdict_counts(cells);
  if (r.anchors.empty())
    j["grid"] = grid_spec_to_json(r.grid.spec);
  else
    j["anchors"] = r.anchors.size();
  if (const PointVerdict* w = worst_of(cells))
    j["worst_cell"] = {{"anchor", w->anchor.values()}, {"a_norm", w->a_norm}};
  return j;
}

std::string anchor_text(const Vector& x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + format_double(x[i]);
  return s + ")";
}

std::string verdict_message(const CertificateReport& r) {
  std::string msg(verdict_label(r.verdict));
  if (r.verdict == CertificateVerdict::kNotCertified) {
    const std::vector<PointVerdict>& cells = r.anchors.empty() ? r.grid.cells : r.anchors;
    if (const PointVerdict* w = worst_of(cells))
      msg += ": worst cell " + anchor_text(w->anchor) + " with ||A*||_2 = " + format_double(w->a_norm);
  }
  return msg;
}

json detect_fixed_points(const MlpNetwork& net, const ExperimentConfig& c) {
  std::vector<Vector> starts;
  if (c.analysis.x0.size() == net.input_dim()) starts.emplace_back(c.analysis.x0);
  if (net.input_dim() == 2) {
    const GridSpec lattice{c.analysis.grid.x_lo, c.analysis.grid.x_hi, c.analysis.grid.y_lo,
                           c.analysis.grid.y_hi, 3, 3};
    for (std::size_t k = 0; k < lattice.size(); ++k) starts.push_back(lattice.anchor(k));
  } else {
    Rng rng(stable_hash("fixed_points", c.seed));
    for (Vector& v : latin_hypercube(8, net.input_dim(), c.analysis.grid.x_lo, c.analysis.grid.x_hi, rng))
      starts.push_back(std::move(v));
  }
  std::vector<Vector> found;
  for (const Vector& s : starts) {
    const Trajectory t = rollout(net, s, c.analysis.rollout_steps);
    if (t.attractor.kind != AttractorClass::kConvergedPoint) continue;
    const Vector& p = *t.attractor.limit;
    const bool seen = std::any_of(found.begin(), found.end(), [&](const Vector& q) {
      return norm2(subtract(p, q)) <= kFixedPointMerge;
    });
    if (!seen) found.push_back(p);
  }
  json out = json::array();
  for (const Vector& p : found) {
    json e{{"state", p.values()}, {"norm", norm2(p)}};
    try {
      const EquilibriumBounds b = equilibrium_bounds(extract_pwa(net, p));
      e["bounds"] = bounds_to_json(b);
      e["within_bounds"] = b.lower <= norm2(p) + 1e-9 && norm2(p) <= b.upper + 1e-9;
    } catch (const DegenerateError& err) {
      e["bounds"] = nullptr;
      e["degenerate"] = err.what();
    }
    out.push_back(std::move(e));
  }
  return out;
}

json network_summary(const MlpNetwork& net) {
  return {{"input_dim", net.input_dim()}, {"output_dim", net.output_dim()}, {"layers", net.depth()}};
}

void save_config(const ExperimentConfig& c, const std::string& out) {
  write_json_file(join_path(out, "config.json"), config_to_json(c));
}

// ---- commands -----------------------------------------------------------

CommandResult cmd_pwa(const ExperimentConfig& c, const std::string& out) {
  const MlpNetwork net = config_network(c);
  const Vector x = config_x0(c, net);
  const PwaForm form = extract_pwa(net, x);
  const double res = verify_equivalence(net, form);
  const double rel = relative_residual(net, form);
  json j = pwa_to_json(form);
  j["output"] = net.evaluate(x).values();
  j["residual"] = res;
  j["relative_residual"] = rel;
  j["passed"] = rel <= kPwaResidualLimit;
  write_json_file(join_path(out, "pwa.json"), j);
  save_network(net, join_path(out, "network.json"));
  if (rel > kPwaResidualLimit)
    throw NumericError("pwa: relative residual " + format_double(rel) + " exceeds " +
                       format_double(kPwaResidualLimit));
  return {0, {{"residual", res}, {"relative_residual", rel}},
          "pwa: relative residual " + format_double(rel)};
}

CommandResult cmd_grid(const ExperimentConfig& c, const std::string& out, std::size_t threads) {
  const MlpNetwork net = config_network(c);
  const CertificateReport r = certify_network(net, c, threads, false);
  const std::vector<PointVerdict>& cells = r.anchors.empty() ? r.grid.cells : r.anchors;
  write_text_file(join_path(out, "grid.csv"), verdicts_to_csv(cells));
  const json summary = grid_summary(r);
  write_json_file(join_path(out, "grid.json"), summary);
  save_network(net, join_path(out, "network.json"));
  return {0, summary,
          "grid: " + std::to_string(summary["dissipative_cells"].get<std::size_t>()) + " of " +
              std::to_string(cells.size()) + " cells dissipative"};
}

CommandResult cmd_spectra(const ExperimentConfig& c, const std::string& out, std::size_t threads) {
  const MlpNetwork net = config_network(c);
  if (!net.is_square()) throw DimensionError("spectra: needs a square network");
  const std::vector<Vector> anchors =
      analysis_anchors(c, net.input_dim(), c.analysis.spectra_resolution, c.analysis.anchors);
  std::vector<SpectraStudy> studies;
  if (c.analysis.spectra_mode == SpectraMode::kWeightShared)
    studies = depth_spectra(net.layer(0), c.analysis.depths, anchors, threads);
  else
    studies.push_back(spectra_study(net, net.depth(), anchors, threads));
  write_text_file(join_path(out, "eigenvalues.csv"), spectra_moduli_to_csv(studies));
  write_text_file(join_path(out, "histogram.csv"), spectra_to_csv(studies));
  json j = spectra_summary_json(studies);
  j["mode"] = spectra_mode_name(c.analysis.spectra_mode);
  j["anchors"] = anchors.size();
  write_json_file(join_path(out, "spectra.json"), j);
  save_network(net, join_path(out, "network.json"));
  std::string msg = "spectra: median modulus";
  for (const SpectraStudy& s : studies)
    msg += " depth " + std::to_string(s.depth) + ": " + format_double(s.median_modulus);
  return {0, j, msg};
}

CommandResult cmd_rollout(const ExperimentConfig& c, const std::string& out) {
  const MlpNetwork net = config_network(c);
  const Vector x0 = config_x0(c, net);
  const Trajectory t = rollout(net, x0, c.analysis.rollout_steps);
  write_text_file(join_path(out, "trajectory.csv"), trajectory_to_csv(t));
  json j{{"x0", x0.values()},
         {"steps_taken", t.states.size() - 1},
         {"final_state", t.states.back().values()},
         {"attractor", attractor_to_json(t.attractor)}};
  write_json_file(join_path(out, "rollout.json"), j);
  save_network(net, join_path(out, "network.json"));
  return {0, j, "rollout: " + std::string(attractor_name(t.attractor.kind))};
}

CommandResult cmd_basin(const ExperimentConfig& c, const std::string& out, std::size_t threads) {
  const MlpNetwork net = config_network(c);
  const BasinMap m = basin_map(net, c.analysis.basin, c.analysis.rollout_steps, threads);
  write_text_file(join_path(out, "basin.csv"), basin_to_csv(m));
  const json j = basin_summary_json(m);
  write_json_file(join_path(out, "basin.json"), j);
  save_network(net, join_path(out, "network.json"));
  return {0, j, "basin: " + std::to_string(m.limits.size()) + " limit clusters"};
}

CommandResult cmd_simulate(const ExperimentConfig& c, const std::string& out) {
  const PlantDataset d = simulate(c.plant);
  save_dataset(d, join_path(out, "data.csv"), join_path(out, "data.json"));
  return {0, dataset_sidecar(d),
          "simulate: " + std::to_string(d.states.size()) + " samples of " +
              std::string(plant_name(d.plant))};
}

CommandResult cmd_train(const ExperimentConfig& c, const std::string& out) {
  PlantDataset d;
  if (c.dataset) {
    d = load_dataset(join_path(*c.dataset, "data.csv"), join_path(*c.dataset, "data.json"));
  } else {
    d = simulate(c.plant);
    save_dataset(d, join_path(out, "data.csv"), join_path(out, "data.json"));
  }
  const TrainingData data = training_data(d);
  const std::string state_path = join_path(out, "state.json");
  TrainState st = c.resume && std::filesystem::exists(state_path)
                      ? train_state_from_json(read_json_file(state_path))
                      : init_train_state(data, c.training);
  train(st, data, c.training,
        [&](const TrainState& s) { write_json_file(state_path, train_state_to_json(s)); });
  write_json_file(state_path, train_state_to_json(st));
  const BlockSSM model = selected_model(st);
  save_network(model.f_net, join_path(out, "f_net.json"));
  save_network(model.g_net, join_path(out, "g_net.json"));
  const TrainReport& r = st.report;
  json report = train_report_to_json(r);
  report["training"] = train_config_to_json(c.training);
  report["plant"] = plant_name(d.plant);
  report["state_normalization"] = {{"lo", d.state_norm.lo}, {"hi", d.state_norm.hi}};
  report["input_normalization"] = {{"lo", d.input_norm.lo}, {"hi", d.input_norm.hi}};
  const double ratio = r.test_loss > 0.0 ? r.initial_test_loss / r.test_loss : 0.0;
  report["test_improvement"] = std::isfinite(ratio) ? json(ratio) : json(nullptr);
  write_json_file(join_path(out, "report.json"), report);
  json summary{{"initial_test_loss", report["initial_test_loss"]},
               {"test_loss", report["test_loss"]},
               {"best_epoch", r.best_epoch},
               {"test_improvement", report["test_improvement"]}};
  return {0, summary,
          "train: test MSE " + format_double(r.initial_test_loss) + " -> " +
              format_double(r.test_loss) + " (best epoch " + std::to_string(r.best_epoch) + ")"};
}

CommandResult cmd_certify(const ExperimentConfig& c, const std::string& out, std::size_t threads) {
  const MlpNetwork net = config_network(c);
  const CertificateReport r = certify_network(net, c, threads);
  json j = certificate_to_json(r);
  j["network"] = network_summary(net);
  write_json_file(join_path(out, "certificate.json"), j);
  save_network(net, join_path(out, "network.json"));
  const int code = c.certify_assert && r.verdict == CertificateVerdict::kNotCertified ? 2 : 0;
  return {code, j, "certify: " + verdict_message(r)};
}

CommandResult cmd_sweep(const ExperimentConfig& c, const std::string& out, std::size_t threads) {
  const std::vector<SweepEntry> entries = enumerate_sweep(c.sweep, c.network.state_dim);
  struct Row {
    std::string csv;
    json report;
    CertificateVerdict verdict = CertificateVerdict::kNotCertified;
    bool failed = false;
  };
  std::vector<Row> rows(entries.size());
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    const SweepEntry& e = entries[i];
    Row& row = rows[i];
    std::string prefix = std::to_string(e.index) + "," + e.key + "," +
                         std::string(map_kind_name(e.map.kind)) + "," +
                         format_double(e.map.lambda_min) + "," + format_double(e.map.lambda_max) +
                         "," + std::to_string(e.network.depth) + "," +
                         std::string(activation_name(e.network.activation)) + "," +
                         (e.network.bias ? "true" : "false") + ",";
    json meta{{"index", e.index},
              {"key", e.key},
              {"network", {{"depth", e.network.depth},
                           {"activation", activation_name(e.network.activation)},
                           {"bias", e.network.bias}}},
              {"map", {{"kind", map_kind_name(e.map.kind)},
                       {"lambda_min", e.map.lambda_min},
                       {"lambda_max", e.map.lambda_max}}}};
    try {
      const MlpNetwork net = build_network(e.network, e.map, c.seed);
      const CertificateReport r = certify_network(net, c, 1, false);
      json rep = certificate_to_json(r);
      rep.update(meta);
      const std::vector<PointVerdict>& cells = r.anchors.empty() ? r.grid.cells : r.anchors;
      const json counts = verdict_counts(cells);
      const PointVerdict* w = worst_of(cells);
      row.verdict = r.verdict;
      row.csv = prefix + std::string(verdict_label(r.verdict)) + "," +
                (r.layerwise.certified ? "true" : "false") + "," +
                format_double(counts["dissipative_fraction"].get<double>()) + "," +
                (w ? format_double(w->a_norm) + ",\"" + format_array(w->anchor.span()) + "\"" : ",") +
                ",ok,\n";
      row.report = std::move(rep);
    } catch (const std::exception& ex) {
      std::string what = ex.what();
      std::replace(what.begin(), what.end(), '"', '\'');
      row.failed = true;
      row.csv = prefix + ",,,,,error,\"" + what + "\"\n";
      meta["error"] = ex.what();
      row.report = std::move(meta);
    }
  });
  std::string csv =
      "index,key,map,lambda_min,lambda_max,depth,activation,bias,verdict,layerwise_certified,"
      "dissipative_fraction,max_a_norm,worst_anchor,status,error\n";
  std::map<std::string, std::size_t> verdicts;
  std::size_t failures = 0;
  const std::string reports = join_path(out, "reports");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv += rows[i].csv;
    char name[16];
    std::snprintf(name, sizeof name, "%04zu_", i);
    write_json_file(join_path(reports, name + entries[i].key + ".json"), rows[i].report);
    if (rows[i].failed)
      ++failures;
    else
      ++verdicts[std::string(verdict_label(rows[i].verdict))];
  }
  write_text_file(join_path(out, "aggregate.csv"), csv);
  json summary{{"configurations", entries.size()}, {"failures", failures}, {"verdicts", verdicts}};
  write_json_file(join_path(out, "sweep.json"), summary);
  return {0, summary,
          "sweep: " + std::to_string(entries.size()) + " configurations, " +
              std::to_string(failures) + " failed"};
}

CommandResult cmd_gen_weights(const ExperimentConfig& c, const std::string& out) {
  const std::size_t n = c.network.state_dim;
  Rng rng(weight_seed(c.map, c.network.depth, c.seed));
  const StructuredLinearMap map = sample_map(c.map.kind, n, n, c.map.lambda_min, c.map.lambda_max, rng);
  const Matrix w = map.realize();
  const GuaranteeReport g = check_guarantee(map, w);
  write_json_file(join_path(out, "weights.json"), matrix_to_json(w));
  json rep = guarantee_to_json(g);
  rep["map"] = {{"kind", map_kind_name(map.kind)},
                {"lambda_min", map.lambda_min},
                {"lambda_max", map.lambda_max},
                {"rows", n},
                {"cols", n}};
  rep["spectral_norm"] = spectral_norm(w);
  write_json_file(join_path(out, "weights_report.json"), rep);
  return {g.passed ? 0 : 1, rep,
          std::string("gen-weights: guarantee ") + (g.passed ? "holds" : "VIOLATED")};
}

constexpr std::array<std::string_view, 10> kCommands{
    "pwa", "grid", "spectra", "rollout", "basin", "simulate", "train", "certify", "sweep", "gen-weights"};

}  // namespace

std::span<const std::string_view> command_names() { return kCommands; }

std::string_view verdict_label(CertificateVerdict v) {
  switch (v) {
    case CertificateVerdict::kGlobal: return "GLOBAL (layerwise)";
    case CertificateVerdict::kRegional: return "REGIONAL (sampled)";
    case CertificateVerdict::kNotCertified: return "NOT CERTIFIED";
  }
  return "NOT CERTIFIED";
}

CertificateReport certify_network(const MlpNetwork& net, const ExperimentConfig& c,
                                  std::size_t threads, bool with_fixed_points) {
  if (!net.is_square())
    throw DimensionError("certify: network maps dim " + std::to_string(net.input_dim()) + " to " +
                         std::to_string(net.output_dim()));
  CertificateReport r;
  // Pre-activation samples for non-analytic gain bounds.
  std::vector<Vector> z_samples;
  {
    const std::vector<Vector> xs =
        analysis_anchors(c, net.input_dim(), 8, std::min<std::size_t>(c.analysis.anchors, 64));
    for (const Vector& x : xs)
      for (Vector& z : net.forward(x).pre_activations) z_samples.push_back(std::move(z));
  }
  r.layerwise = layerwise_certificate(net, z_samples);
  std::vector<PointVerdict>* cells = nullptr;
  if (net.input_dim() == 2) {
    r.grid = certify_region(net, c.analysis.grid, threads);
    cells = &r.grid.cells;
  } else {
    Rng rng(stable_hash("anchors", c.seed));
    r.anchors = certify_anchors(
        net, latin_hypercube(c.analysis.anchors, net.input_dim(), c.analysis.grid.x_lo,
                             c.analysis.grid.x_hi, rng),
        threads);
    cells = &r.anchors;
  }
  const bool all_dissipative =
      !cells->empty() && std::all_of(cells->begin(), cells->end(), [](const PointVerdict& v) {
        return !v.error && v.dissipative;
      });
  if (r.layerwise.certified)
    r.verdict = CertificateVerdict::kGlobal;
  else if (all_dissipative)
    r.verdict = CertificateVerdict::kRegional;
  else
    r.verdict = CertificateVerdict::kNotCertified;
  r.fixed_points = with_fixed_points ? detect_fixed_points(net, c) : json::array();
  return r;
}

json certificate_to_json(const CertificateReport& r, bool with_cells) {
  json j{{"verdict", verdict_label(r.verdict)},
         {"message", verdict_message(r)},
         {"layerwise", layerwise_to_json(r.layerwise)},
         {"grid", grid_summary(r)},
         {"fixed_points", r.fixed_points}};
  if (with_cells) {
    json cells = json::array();
    for (const PointVerdict& v : r.anchors.empty() ? r.grid.cells : r.anchors)
      cells.push_back(verdict_to_json(v));
    j["cells"] = std::move(cells);
  }
  return j;
}

CommandResult run_command(const ExperimentConfig& config, std::string_view command,
                          const std::string& out_dir, std::size_t threads) {
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
    throw InvalidArgument("unknown command '" + std::string(command) + "'");
  const std::size_t t = resolve_threads(static_cast<long>(threads));
  ensure_directory(out_dir);
  save_config(config, out_dir);
  if (command == "pwa") return cmd_pwa(config, out_dir);
  if (command == "grid") return cmd_grid(config, out_dir, t);
  if (command == "spectra") return cmd_spectra(config, out_dir, t);
  if (command == "rollout") return cmd_rollout(config, out_dir);
  if (command == "basin") return cmd_basin(config, out_dir, t);
  if (command == "simulate") return cmd_simulate(config, out_dir);
  if (command == "train") return cmd_train(config, out_dir);
  if (command == "certify") return cmd_certify(config, out_dir, t);
  if (command == "sweep") return cmd_sweep(config, out_dir, t);
  return cmd_gen_weights(config, out_dir);
}

}  // namespace neurodissip
