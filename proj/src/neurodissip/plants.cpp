// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#include "neurodissip/plants.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "neurodissip/errors.hpp"
#include "neurodissip/io.hpp"

namespace neurodissip {
namespace {

const std::vector<std::string>& required_params(PlantKind kind) {
  static const std::vector<std::string> cstr{"q", "V", "rho", "cp", "dH", "ER", "k0", "UA", "Tf", "Caf"};
  static const std::vector<std::string> tank{"c1", "c2"};
  return kind == PlantKind::kCstr ? cstr : tank;
}

std::string normalise_key(std::string_view s) {
  std::string k;
  for (char c : s)
    if (c != '_' && c != '-' && c != ' ')
      k.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return k;
}

double param(const ParameterMap& p, const char* name) {
  const auto it = p.find(name);
  if (it == p.end()) throw ConfigError(std::string("plant parameter '") + name + "' is missing");
  return it->second;
}

Vector axpy(const Vector& x, double a, const Vector& k) {
  Vector out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * k[i];
  return out;
}

void check_dims(const PlantModel& plant, const Vector& x, const Vector& u) {
  if (x.size() != plant.state_dim || u.size() != plant.input_dim)
    throw DimensionError(std::string(plant_name(plant.kind)) + ": state dim " +
                         std::to_string(x.size()) + " / input dim " + std::to_string(u.size()) +
                         ", expected " + std::to_string(plant.state_dim) + " / " +
                         std::to_string(plant.input_dim));
}

}  // namespace

std::string_view plant_name(PlantKind k) { return k == PlantKind::kCstr ? "cstr" : "two_tank"; }

PlantKind parse_plant(std::string_view name) {
  const std::string k = normalise_key(name);
  if (k == "cstr") return PlantKind::kCstr;
  if (k == "twotank" || k == "2tank" || k == "tank") return PlantKind::kTwoTank;
  throw ConfigError("unknown plant '" + std::string(name) + "'");
}

std::string_view integrator_name(Integrator m) { return m == Integrator::kRk4 ? "rk4" : "euler"; }

Integrator parse_integrator(std::string_view name) {
  const std::string k = normalise_key(name);
  if (k == "rk4") return Integrator::kRk4;
  if (k == "euler") return Integrator::kEuler;
  throw ConfigError("unknown integrator '" + std::string(name) + "'");
}

std::string_view signal_name(SignalKind k) { return k == SignalKind::kSteps ? "steps" : "prbs"; }

SignalKind parse_signal(std::string_view name) {
  const std::string k = normalise_key(name);
  if (k == "steps" || k == "step") return SignalKind::kSteps;
  if (k == "prbs") return SignalKind::kPrbs;
  throw ConfigError("unknown excitation signal '" + std::string(name) + "'");
}

PlantModel cstr_model() {
  PlantModel m;
  m.kind = PlantKind::kCstr;
  m.params = {{"q", 100.0},  {"V", 100.0},  {"rho", 1000.0}, {"cp", 0.239}, {"dH", 5e4},
              {"ER", 8750.0}, {"k0", 7.2e10}, {"UA", 5e4},    {"Tf", 350.0}, {"Caf", 1.0}};
  m.state_dim = 2;
  m.input_dim = 1;
  m.state_lo = {0.0, 0.0};
  m.state_hi = {1.0, 1e4};
  m.input_lo = {297.0};
  m.input_hi = {303.0};
  return m;
}

PlantModel two_tank_model() {
  PlantModel m;
  m.kind = PlantKind::kTwoTank;
  m.params = {{"c1", 0.08}, {"c2", 0.04}};
  m.state_dim = 2;
  m.input_dim = 2;
  m.state_lo = {0.0, 0.0};
  m.state_hi = {1.0, 1.0};
  m.input_lo = {0.0, 0.0};
  m.input_hi = {1.0, 1.0};
  return m;
}

PlantModel plant_model(PlantKind kind) {
  return kind == PlantKind::kCstr ? cstr_model() : two_tank_model();
}

void validate_parameters(PlantKind kind, const ParameterMap& params) {
  const auto& req = required_params(kind);
  for (const std::string& name : req) {
    const auto it = params.find(name);
    if (it == params.end())
      throw ConfigError(std::string(plant_name(kind)) + ": parameter '" + name + "' is missing");
    if (!std::isfinite(it->second))
      throw ConfigError(std::string(plant_name(kind)) + ": parameter '" + name + "' is not finite");
  }
  for (const auto& [name, value] : params)
    if (std::find(req.begin(), req.end(), name) == req.end())
      throw ConfigError(std::string(plant_name(kind)) + ": unknown parameter '" + name + "'");
}

Vector cstr_derivative(const Vector& x, const Vector& u, const ParameterMap& p) {
  if (x.size() != 2 || u.size() != 1) throw DimensionError("cstr: expects x in R^2 and u in R^1");
  const double ca = x[0], t = x[1];
  if (!(t > 0.0))
    throw NumericError("cstr: non-physical temperature " + format_double(t) + " K");
  const double q = param(p, "q"), v = param(p, "V"), rho = param(p, "rho"), cp = param(p, "cp");
  const double r = param(p, "k0") * std::exp(-param(p, "ER") / t) * ca;
  const double dca = q / v * (param(p, "Caf") - ca) - r;
  const double dt = q / v * (param(p, "Tf") - t) + param(p, "dH") / (rho * cp) * r +
                    param(p, "UA") / (v * rho * cp) * (u[0] - t);
  return Vector{dca, dt};
}

Vector two_tank_derivative(const Vector& x, const Vector& u, const ParameterMap& p) {
  if (x.size() != 2 || u.size() != 2)
    throw DimensionError("two_tank: expects x in R^2 and u in R^2");
  const double c1 = param(p, "c1"), c2 = param(p, "c2");
  const double valve = u[0], pump = u[1];
  const double s1 = std::sqrt(std::max(x[0], 0.0));
  const double s2 = std::sqrt(std::max(x[1], 0.0));
  double d1 = (1.0 - valve) * c1 * pump - c2 * s1;
  double d2 = c1 * valve * pump + c2 * s1 - c2 * s2;
  if (x[0] > 1.0 && d1 > 0.0) d1 = 0.0;
  if (x[1] > 1.0 && d2 > 0.0) d2 = 0.0;
  return Vector{d1, d2};
}

Vector plant_derivative(const PlantModel& plant, const Vector& x, const Vector& u) {
  check_dims(plant, x, u);
  return plant.kind == PlantKind::kCstr ? cstr_derivative(x, u, plant.params)
                                        : two_tank_derivative(x, u, plant.params);
}

Vector integrate_step(const PlantModel& plant, const Vector& x, const Vector& u, double dt,
                      Integrator method) {
  Vector next;
  if (method == Integrator::kEuler) {
    next = axpy(x, dt, plant_derivative(plant, x, u));
  } else {
    const Vector k1 = plant_derivative(plant, x, u);
    const Vector k2 = plant_derivative(plant, axpy(x, 0.5 * dt, k1), u);
    const Vector k3 = plant_derivative(plant, axpy(x, 0.5 * dt, k2), u);
    const Vector k4 = plant_derivative(plant, axpy(x, dt, k3), u);
    next = x;
    for (std::size_t i = 0; i < next.size(); ++i)
      next[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  if (plant.kind == PlantKind::kTwoTank)
    for (std::size_t i = 0; i < next.size(); ++i)
      next[i] = std::clamp(next[i], plant.state_lo[i], plant.state_hi[i]);
  return next;
}

std::vector<Vector> integrate(const PlantModel& plant, const Vector& x0,
                              const std::vector<Vector>& inputs, double dt, Integrator method) {
  if (!(dt > 0.0)) throw InvalidArgument("integrate: dt must be positive");
  if (x0.size() != plant.state_dim)
    throw DimensionError("integrate: x0 has dim " + std::to_string(x0.size()) + ", plant needs " +
                         std::to_string(plant.state_dim));
  std::vector<Vector> states;
  if (inputs.empty()) return states;
  states.reserve(inputs.size());
  states.push_back(x0);
  for (std::size_t k = 0; k + 1 < inputs.size(); ++k) {
    Vector next;
    try {
      next = integrate_step(plant, states.back(), inputs[k], dt, method);
    } catch (const NumericError& e) {
      throw NumericError("integrate: step " + std::to_string(k) + ": " + e.what());
    }
    if (!all_finite(next.span()))
      throw NumericError("integrate: non-finite state at step " + std::to_string(k + 1));
    states.push_back(std::move(next));
  }
  return states;
}

std::vector<double> excitation_signal(SignalKind kind, std::size_t length, double lo, double hi,
                                      std::size_t hold, Rng& rng) {
  if (hold == 0) throw InvalidArgument("excitation_signal: hold must be at least 1");
  if (lo > hi) throw InvalidArgument("excitation_signal: lo exceeds hi");
  std::vector<double> out(length);
  double level = lo;
  for (std::size_t k = 0; k < length; ++k) {
    if (k % hold == 0) {
      if (kind == SignalKind::kSteps)
        level = lo == hi ? lo : uniform(rng, lo, hi);
      else
        level = (rng() & 1u) ? hi : lo;
    }
    out[k] = level;
  }
  return out;
}

SimulationSpec default_simulation(PlantKind kind) {
  SimulationSpec s;
  s.plant = kind;
  s.params = plant_model(kind).params;
  if (kind == PlantKind::kCstr) {
    s.dt = 0.1;
    s.x0 = {0.87725, 324.475};
    s.inputs = {{SignalKind::kSteps, 297.0, 303.0, 50}};
  } else {
    s.dt = 1.0;
    s.x0 = {0.0, 0.0};
    s.inputs = {{SignalKind::kPrbs, 0.0, 1.0, 200}, {SignalKind::kSteps, 0.0, 0.5, 50}};
  }
  return s;
}

Vector Normalization::apply(const Vector& v) const {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = 2.0 * (v[i] - lo[i]) / (hi[i] - lo[i]) - 1.0;
  return out;
}

Vector Normalization::invert(const Vector& v) const {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = lo[i] + 0.5 * (v[i] + 1.0) * (hi[i] - lo[i]);
  return out;
}

Normalization fit_normalization(const std::vector<Vector>& values) {
  Normalization n;
  if (values.empty()) return n;
  n.lo = values.front().values();
  n.hi = n.lo;
  for (const Vector& v : values)
    for (std::size_t i = 0; i < v.size(); ++i) {
      n.lo[i] = std::min(n.lo[i], v[i]);
      n.hi[i] = std::max(n.hi[i], v[i]);
    }
  // Constant channels map to -1 instead of dividing by zero.
  for (std::size_t i = 0; i < n.lo.size(); ++i)
    if (n.hi[i] - n.lo[i] < 1e-12) n.hi[i] = n.lo[i] + 1.0;
  return n;
}

std::vector<Vector> PlantDataset::split_states(std::size_t s) const {
  std::vector<Vector> out;
  for (std::size_t k = split_bounds.at(s); k < split_bounds.at(s + 1); ++k)
    out.push_back(state_norm.apply(states[k]));
  return out;
}

std::vector<Vector> PlantDataset::split_inputs(std::size_t s) const {
  std::vector<Vector> out;
  for (std::size_t k = split_bounds.at(s); k < split_bounds.at(s + 1); ++k)
    out.push_back(input_norm.apply(inputs[k]));
  return out;
}

PlantDataset simulate(const SimulationSpec& spec) {
  PlantModel plant = plant_model(spec.plant);
  if (!spec.params.empty()) {
    validate_parameters(spec.plant, spec.params);
    plant.params = spec.params;
  }
  const SimulationSpec defaults = default_simulation(spec.plant);
  const std::vector<double>& x0 = spec.x0.empty() ? defaults.x0 : spec.x0;
  const std::vector<InputChannelSpec>& channels = spec.inputs.empty() ? defaults.inputs : spec.inputs;
  if (channels.size() != plant.input_dim)
    throw ConfigError(std::string(plant_name(spec.plant)) + ": " + std::to_string(channels.size()) +
                      " input channels configured, plant has " + std::to_string(plant.input_dim));
  const std::size_t total = spec.splits[0] + spec.splits[1] + spec.splits[2];
  if (total != spec.steps)
    throw ConfigError("simulate: splits sum to " + std::to_string(total) + " but steps is " +
                      std::to_string(spec.steps));
  if (spec.splits[0] < 2 || spec.splits[1] < 2 || spec.splits[2] < 2)
    throw ConfigError("simulate: every split needs at least two samples");

  std::vector<std::vector<double>> signals;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    Rng rng(stable_hash("input" + std::to_string(c), spec.seed));
    signals.push_back(excitation_signal(channels[c].signal, spec.steps, channels[c].lo,
                                        channels[c].hi, channels[c].hold, rng));
  }
  std::vector<Vector> inputs(spec.steps, Vector(plant.input_dim));
  for (std::size_t k = 0; k < spec.steps; ++k)
    for (std::size_t c = 0; c < channels.size(); ++c) inputs[k][c] = signals[c][k];

  PlantDataset d;
  d.plant = spec.plant;
  d.params = plant.params;
  d.dt = spec.dt;
  d.seed = spec.seed;
  d.method = spec.method;
  d.states = integrate(plant, Vector(x0), inputs, spec.dt, spec.method);
  d.inputs = std::move(inputs);
  d.split_bounds = {0, spec.splits[0], spec.splits[0] + spec.splits[1], total};
  d.state_norm = fit_normalization(d.states);
  d.input_norm = fit_normalization(d.inputs);
  return d;
}

std::string dataset_to_csv(const PlantDataset& d) {
  std::string out = "t";
  for (std::size_t i = 0; i < d.state_dim(); ++i) out += ",x" + std::to_string(i + 1);
  for (std::size_t i = 0; i < d.input_dim(); ++i) out += ",u" + std::to_string(i + 1);
  out += "\n";
  for (std::size_t k = 0; k < d.states.size(); ++k) {
    out += format_double(static_cast<double>(k) * d.dt);
    for (double v : d.states[k]) out += "," + format_double(v);
    for (double v : d.inputs[k]) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

nlohmann::json dataset_sidecar(const PlantDataset& d) {
  return {{"plant", plant_name(d.plant)},
          {"parameters", d.params},
          {"dt", d.dt},
          {"seed", d.seed},
          {"method", integrator_name(d.method)},
          {"samples", d.states.size()},
          {"state_dim", d.state_dim()},
          {"input_dim", d.input_dim()},
          {"splits", {{"train", {d.split_bounds[0], d.split_bounds[1]}},
                      {"dev", {d.split_bounds[1], d.split_bounds[2]}},
                      {"test", {d.split_bounds[2], d.split_bounds[3]}}}},
          {"normalization", {{"state_lo", d.state_norm.lo}, {"state_hi", d.state_norm.hi},
                             {"input_lo", d.input_norm.lo}, {"input_hi", d.input_norm.hi},
                             {"range", {-1.0, 1.0}}}}};
}

void save_dataset(const PlantDataset& d, const std::string& csv_path, const std::string& json_path) {
  write_text_file(csv_path, dataset_to_csv(d));
  write_json_file(json_path, dataset_sidecar(d));
}

PlantDataset load_dataset(const std::string& csv_path, const std::string& json_path) {
  const nlohmann::json meta = read_json_file(json_path);
  PlantDataset d;
  try {
    d.plant = parse_plant(meta.at("plant").get<std::string>());
    d.params = meta.at("parameters").get<ParameterMap>();
    d.dt = meta.at("dt").get<double>();
    d.seed = meta.at("seed").get<std::uint64_t>();
    d.method = parse_integrator(meta.at("method").get<std::string>());
    const auto& sp = meta.at("splits");
    d.split_bounds = {sp.at("train").at(0).get<std::size_t>(), sp.at("dev").at(0).get<std::size_t>(),
                      sp.at("test").at(0).get<std::size_t>(), sp.at("test").at(1).get<std::size_t>()};
    const auto& nm = meta.at("normalization");
    d.state_norm = {nm.at("state_lo").get<std::vector<double>>(),
                    nm.at("state_hi").get<std::vector<double>>()};
    d.input_norm = {nm.at("input_lo").get<std::vector<double>>(),
                    nm.at("input_hi").get<std::vector<double>>()};
    const std::size_t nx = meta.at("state_dim").get<std::size_t>();
    const std::size_t nu = meta.at("input_dim").get<std::size_t>();
    std::istringstream in(read_text_file(csv_path));
    std::string line;
    std::getline(in, line);  // header
    std::size_t row = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ++row;
      std::vector<double> vals;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
      if (vals.size() != 1 + nx + nu)
        throw ConfigError("dataset '" + csv_path + "' row " + std::to_string(row) + " has " +
                          std::to_string(vals.size()) + " fields, expected " +
                          std::to_string(1 + nx + nu));
      d.states.emplace_back(std::vector<double>(vals.begin() + 1, vals.begin() + 1 + nx));
      d.inputs.emplace_back(std::vector<double>(vals.begin() + 1 + nx, vals.end()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("dataset sidecar '" + json_path + "': " + e.what());
  } catch (const std::invalid_argument&) {
    throw ConfigError("dataset '" + csv_path + "' contains a non-numeric field");
  }
  if (d.split_bounds[3] != d.states.size())
    throw ConfigError("dataset '" + csv_path + "' has " + std::to_string(d.states.size()) +
                      " rows but the sidecar declares " + std::to_string(d.split_bounds[3]));
  return d;
}

nlohmann::json simulation_to_json(const SimulationSpec& s) {
  nlohmann::json inputs = nlohmann::json::array();
  for (const InputChannelSpec& c : s.inputs)
    inputs.push_back({{"signal", signal_name(c.signal)}, {"lo", c.lo}, {"hi", c.hi}, {"hold", c.hold}});
  return {{"plant", plant_name(s.plant)},
          {"params", s.params},
          {"dt", s.dt},
          {"steps", s.steps},
          {"x0", s.x0},
          {"inputs", std::move(inputs)},
          {"method", integrator_name(s.method)},
          {"splits", s.splits},
          {"seed", s.seed}};
}

SimulationSpec simulation_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> keys{"plant", "params", "dt", "steps", "x0",
                                             "inputs", "method", "splits", "seed"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
      throw ConfigError("plant: unknown key '" + it.key() + "'");
  try {
    const PlantKind kind = j.contains("plant") ? parse_plant(j["plant"].get<std::string>())
                                               : PlantKind::kCstr;
    SimulationSpec s = default_simulation(kind);
    if (j.contains("params")) {
      ParameterMap p = s.params;
      for (auto it = j["params"].begin(); it != j["params"].end(); ++it)
        p[it.key()] = it.value().get<double>();
      validate_parameters(kind, p);
      s.params = std::move(p);
    }
    if (j.contains("dt")) s.dt = j["dt"].get<double>();
    if (j.contains("steps")) s.steps = j["steps"].get<std::size_t>();
    if (j.contains("x0")) s.x0 = j["x0"].get<std::vector<double>>();
    if (j.contains("inputs")) {
      s.inputs.clear();
      for (const auto& c : j["inputs"]) {
        for (auto it = c.begin(); it != c.end(); ++it)
          if (it.key() != "signal" && it.key() != "lo" && it.key() != "hi" && it.key() != "hold")
            throw ConfigError("plant.inputs: unknown key '" + it.key() + "'");
        InputChannelSpec ch;
        if (c.contains("signal")) ch.signal = parse_signal(c["signal"].get<std::string>());
        if (c.contains("lo")) ch.lo = c["lo"].get<double>();
        if (c.contains("hi")) ch.hi = c["hi"].get<double>();
        if (c.contains("hold")) ch.hold = c["hold"].get<std::size_t>();
        s.inputs.push_back(ch);
      }
    }
    if (j.contains("method")) s.method = parse_integrator(j["method"].get<std::string>());
    if (j.contains("splits")) s.splits = j["splits"].get<std::array<std::size_t, 3>>();
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (!(s.dt > 0.0)) throw ConfigError("plant.dt must be positive");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("plant: ") + e.what());
  }
}

}  // namespace neurodissip
