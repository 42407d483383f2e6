// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#include "neurodissip/experiment.hpp"

#include <cmath>

#include "neurodissip/errors.hpp"
#include "neurodissip/io.hpp"

namespace neurodissip {
namespace {

using nlohmann::json;

// Compact bound label: 0.99 -> "0.99", -1.5 -> "m1.5".
std::string bound_label(double v) {
  std::string s = format_double(v);
  if (!s.empty() && s[0] == '-') s = "m" + s.substr(1);
  return s;
}

std::string map_key(const WeightSpec& m) {
  std::string key(map_kind_name(m.kind));
  if (m.kind != MapKind::kUnstructured)
    key += "_" + bound_label(m.lambda_min) + "_" + bound_label(m.lambda_max);
  return key;
}

MapKind map_kind_from(const json& j, const std::string& ctx) {
  try {
    return parse_map_kind(j.get<std::string>());
  } catch (const InvalidArgument& e) {
    throw ConfigError(ctx + ": " + e.what());
  }
}

json network_to_json_spec(const NetworkSpec& n) {
  return {{"state_dim", n.state_dim},
          {"depth", n.depth},
          {"activation", activation_name(n.activation)},
          {"bias", n.bias}};
}

NetworkSpec network_spec_from_json(const json& j) {
  require_known_keys(j, {"state_dim", "depth", "activation", "bias"}, "network");
  NetworkSpec n;
  if (j.contains("state_dim")) n.state_dim = j["state_dim"].get<std::size_t>();
  if (j.contains("depth")) n.depth = j["depth"].get<std::size_t>();
  if (j.contains("activation")) n.activation = parse_activation(j["activation"].get<std::string>());
  if (j.contains("bias")) n.bias = j["bias"].get<bool>();
  if (n.state_dim == 0) throw ConfigError("network.state_dim must be at least 1");
  return n;
}

json weight_to_json(const WeightSpec& m) {
  return {{"kind", map_kind_name(m.kind)}, {"lambda_min", m.lambda_min}, {"lambda_max", m.lambda_max}};
}

WeightSpec weight_from_json(const json& j) {
  require_known_keys(j, {"kind", "lambda_min", "lambda_max"}, "map");
  WeightSpec m;
  if (j.contains("kind")) m.kind = map_kind_from(j["kind"], "map.kind");
  if (j.contains("lambda_min")) m.lambda_min = j["lambda_min"].get<double>();
  if (j.contains("lambda_max")) m.lambda_max = j["lambda_max"].get<double>();
  if (!std::isfinite(m.lambda_min) || !std::isfinite(m.lambda_max) || m.lambda_min > m.lambda_max)
    throw ConfigError("map: need finite lambda_min <= lambda_max");
  if (m.kind == MapKind::kPerronFrobenius && m.lambda_min < 0.0)
    throw ConfigError("map: perron_frobenius needs lambda_min >= 0");
  return m;
}

json analysis_to_json(const AnalysisSpec& a) {
  return {{"grid", grid_spec_to_json(a.grid)},
          {"basin", grid_spec_to_json(a.basin)},
          {"x0", a.x0},
          {"rollout_steps", a.rollout_steps},
          {"anchors", a.anchors},
          {"spectra_mode", spectra_mode_name(a.spectra_mode)},
          {"depths", a.depths},
          {"spectra_resolution", a.spectra_resolution}};
}

AnalysisSpec analysis_from_json(const json& j) {
  require_known_keys(j,
                     {"grid", "basin", "x0", "rollout_steps", "anchors", "spectra_mode", "depths",
                      "spectra_resolution"},
                     "analysis");
  AnalysisSpec a;
  if (j.contains("grid")) a.grid = grid_spec_from_json(j["grid"]);
  if (j.contains("basin")) a.basin = grid_spec_from_json(j["basin"]);
  if (j.contains("x0")) a.x0 = j["x0"].get<std::vector<double>>();
  if (j.contains("rollout_steps")) a.rollout_steps = j["rollout_steps"].get<std::size_t>();
  if (j.contains("anchors")) a.anchors = j["anchors"].get<std::size_t>();
  if (j.contains("spectra_mode"))
    a.spectra_mode = parse_spectra_mode(j["spectra_mode"].get<std::string>());
  if (j.contains("depths")) a.depths = j["depths"].get<std::vector<std::size_t>>();
  if (j.contains("spectra_resolution"))
    a.spectra_resolution = j["spectra_resolution"].get<std::size_t>();
  if (a.rollout_steps == 0) throw ConfigError("analysis.rollout_steps must be at least 1");
  if (a.spectra_resolution == 0) throw ConfigError("analysis.spectra_resolution must be at least 1");
  for (std::size_t d : a.depths)
    if (d == 0) throw ConfigError("analysis.depths entries must be at least 1");
  return a;
}

json sweep_to_json(const SweepSpec& s) {
  json maps = json::array();
  for (const SweepMapAxis& m : s.maps) {
    json b = json::array();
    for (auto [lo, hi] : m.bounds) b.push_back({lo, hi});
    maps.push_back({{"kind", map_kind_name(m.kind)}, {"bounds", std::move(b)}});
  }
  json acts = json::array();
  for (Activation a : s.activations) acts.push_back(activation_name(a));
  return {{"maps", std::move(maps)},
          {"depths", s.depths},
          {"activations", std::move(acts)},
          {"bias", s.bias}};
}

SweepSpec sweep_from_json(const json& j) {
  require_known_keys(j, {"maps", "depths", "activations", "bias"}, "sweep");
  SweepSpec s = default_sweep();
  if (j.contains("maps")) {
    s.maps.clear();
    for (const json& m : j["maps"]) {
      require_known_keys(m, {"kind", "bounds"}, "sweep.maps");
      SweepMapAxis axis;
      axis.kind = map_kind_from(m.at("kind"), "sweep.maps.kind");
      if (m.contains("bounds"))
        for (const json& b : m["bounds"]) axis.bounds.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
      if (axis.bounds.empty()) axis.bounds.emplace_back(0.0, 1.0);
      s.maps.push_back(std::move(axis));
    }
  }
  if (j.contains("depths")) s.depths = j["depths"].get<std::vector<std::size_t>>();
  if (j.contains("activations")) {
    s.activations.clear();
    for (const json& a : j["activations"]) s.activations.push_back(parse_activation(a.get<std::string>()));
  }
  if (j.contains("bias")) s.bias = j["bias"].get<std::vector<bool>>();
  return s;
}

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> optional_string_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

}  // namespace

SweepSpec default_sweep() {
  const std::vector<std::pair<double, double>> bounds{{-1.50, -1.10}, {0.00, 1.00}, {0.99, 1.00},
                                                      {0.99, 1.01},   {0.99, 1.10}, {1.00, 1.01},
                                                      {1.10, 1.50}};
  SweepSpec s;
  s.maps = {{MapKind::kGershgorinReal, bounds},
            {MapKind::kGershgorinComplex, bounds},
            {MapKind::kSpectralSvd, bounds},
            {MapKind::kPerronFrobenius, {{1.00, 1.00}}},
            {MapKind::kUnstructured, {{0.0, 0.0}}}};
  s.depths = {1, 4, 8};
  s.activations = {Activation::kRelu, Activation::kSelu,    Activation::kGelu,
                   Activation::kTanh, Activation::kSigmoid, Activation::kSoftplus};
  s.bias = {true, false};
  return s;
}

std::string_view spectra_mode_name(SpectraMode m) {
  return m == SpectraMode::kNetwork ? "network" : "weight_shared";
}

SpectraMode parse_spectra_mode(std::string_view name) {
  if (name == "network") return SpectraMode::kNetwork;
  if (name == "weight_shared") return SpectraMode::kWeightShared;
  throw ConfigError("unknown spectra_mode '" + std::string(name) +
                    "' (expected network or weight_shared)");
}

json config_to_json(const ExperimentConfig& c) {
  return {{"seed", c.seed},
          {"network", network_to_json_spec(c.network)},
          {"map", weight_to_json(c.map)},
          {"network_file", optional_string(c.network_file)},
          {"analysis", analysis_to_json(c.analysis)},
          {"plant", simulation_to_json(c.plant)},
          {"dataset", optional_string(c.dataset)},
          {"training", train_config_to_json(c.training)},
          {"resume", c.resume},
          {"sweep", sweep_to_json(c.sweep)},
          {"certify", {{"assert", c.certify_assert}}}};
}

ExperimentConfig config_from_json(const json& j) {
  require_known_keys(j,
                     {"seed", "network", "map", "network_file", "analysis", "plant", "dataset",
                      "training", "resume", "sweep", "certify"},
                     "config");
  ExperimentConfig c;
  try {
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("network")) c.network = network_spec_from_json(j["network"]);
    if (j.contains("map")) c.map = weight_from_json(j["map"]);
    if (j.contains("network_file")) c.network_file = optional_string_from(j["network_file"]);
    if (j.contains("analysis")) c.analysis = analysis_from_json(j["analysis"]);
    if (j.contains("plant")) c.plant = simulation_from_json(j["plant"]);
    if (j.contains("dataset")) c.dataset = optional_string_from(j["dataset"]);
    if (j.contains("training")) c.training = train_config_from_json(j["training"]);
    if (j.contains("resume")) c.resume = j["resume"].get<bool>();
    if (j.contains("sweep")) c.sweep = sweep_from_json(j["sweep"]);
    if (j.contains("certify")) {
      require_known_keys(j["certify"], {"assert"}, "certify");
      if (j["certify"].contains("assert")) c.certify_assert = j["certify"]["assert"].get<bool>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  try {
    return config_from_json(read_json_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

void apply_override(json& doc, std::string_view key, std::string_view value) {
  if (key.empty()) throw ConfigError("--set: empty key");
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part(key.substr(start, dot == std::string_view::npos ? key.npos : dot - start));
    if (part.empty()) throw ConfigError("--set: malformed key '" + std::string(key) + "'");
    if (!node->is_object()) {
      if (!node->is_null())
        throw ConfigError("--set: '" + std::string(key.substr(0, start ? start - 1 : 0)) +
                          "' is not an object");
      *node = json::object();
    }
    node = &(*node)[part];
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  json parsed = json::parse(value, nullptr, false);
  *node = parsed.is_discarded() ? json(std::string(value)) : std::move(parsed);
}

void apply_assignment(json& doc, std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("--set expects key=value, got '" + std::string(assignment) + "'");
  apply_override(doc, assignment.substr(0, eq), assignment.substr(eq + 1));
}

std::uint64_t weight_seed(const WeightSpec& map, std::size_t depth, std::uint64_t base) {
  return stable_hash(map_key(map) + "_d" + std::to_string(depth)) + base;
}

MlpNetwork build_network(const NetworkSpec& net, const WeightSpec& map, std::uint64_t seed) {
  const std::uint64_t ws = weight_seed(map, net.depth, seed);
  Rng w_rng(ws);
  Rng b_rng(stable_hash("bias", ws));
  const std::size_t n = net.state_dim;
  const double a = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<Layer> layers;
  for (std::size_t l = 0; l <= net.depth; ++l) {
    Layer layer;
    layer.weight = sample_map(map.kind, n, n, map.lambda_min, map.lambda_max, w_rng).realize();
    Vector b(n);
    for (double& v : b) v = uniform(b_rng, -a, a);
    if (net.bias) layer.bias = std::move(b);
    if (l < net.depth) layer.activation = net.activation;
    layers.push_back(std::move(layer));
  }
  return MlpNetwork(std::move(layers));
}

MlpNetwork config_network(const ExperimentConfig& c) {
  if (c.network_file) return load_network(*c.network_file);
  return build_network(c.network, c.map, c.seed);
}

std::vector<SweepEntry> enumerate_sweep(const SweepSpec& spec, std::size_t state_dim) {
  std::vector<SweepEntry> out;
  for (const SweepMapAxis& axis : spec.maps)
    for (auto [lo, hi] : axis.bounds)
      for (std::size_t depth : spec.depths)
        for (Activation act : spec.activations)
          for (bool bias : spec.bias) {
            SweepEntry e;
            e.index = out.size();
            e.map = {axis.kind, lo, hi};
            e.network = {state_dim, depth, act, bias};
            e.key = map_key(e.map) + "_d" + std::to_string(depth) + "_" +
                    std::string(activation_name(act)) + (bias ? "_bias" : "_nobias");
            out.push_back(std::move(e));
          }
  return out;
}

}  // namespace neurodissip
