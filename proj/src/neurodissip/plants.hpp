// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "neurodissip/linalg.hpp"
#include "neurodissip/random.hpp"

namespace neurodissip {

enum class PlantKind { kCstr, kTwoTank };
enum class Integrator { kRk4, kEuler };
enum class SignalKind { kSteps, kPrbs };

std::string_view plant_name(PlantKind k);
PlantKind parse_plant(std::string_view name);
std::string_view integrator_name(Integrator m);
Integrator parse_integrator(std::string_view name);
std::string_view signal_name(SignalKind k);
SignalKind parse_signal(std::string_view name);

using ParameterMap = std::map<std::string, double>;

struct PlantModel {
  PlantKind kind = PlantKind::kCstr;
  ParameterMap params;
  std::size_t state_dim = 2;
  std::size_t input_dim = 1;
  std::vector<double> state_lo, state_hi;  // physical box; used for clamping two-tank levels
  std::vector<double> input_lo, input_hi;
};

/// Exothermic CSTR benchmark: q=100, V=100, rho=1000, cp=0.239, dH=5e4,
/// ER=8750, k0=7.2e10, UA=5e4, Tf=350, Caf=1. State (Ca, T), input Tc.
PlantModel cstr_model();
/// Two tanks in series with c1=0.08, c2=0.04. State (h1, h2), input (valve, pump).
PlantModel two_tank_model();
PlantModel plant_model(PlantKind kind);

/// Checks that every required parameter is present and finite and nothing extra is.
void validate_parameters(PlantKind kind, const ParameterMap& params);

/// r = k0 exp(-ER / T) Ca
/// dCa = q/V (Caf - Ca) - r
/// dT  = q/V (Tf - T) + dH/(rho cp) r + UA/(V rho cp) (Tc - T)
/// Throws NumericError for T <= 0.
Vector cstr_derivative(const Vector& x, const Vector& u, const ParameterMap& p);

/// dh1 = (1 - valve) c1 pump - c2 sqrt(h1)                 if h1 <= 1
/// dh2 = c1 valve pump + c2 sqrt(h1) - c2 sqrt(h2)          if h2 <= 1
/// Above the rim the derivative is clamped to zero while it points upward,
/// so overflowing tanks can still drain. Square roots use max(h, 0).
Vector two_tank_derivative(const Vector& x, const Vector& u, const ParameterMap& p);

Vector plant_derivative(const PlantModel& plant, const Vector& x, const Vector& u);

/// One zero-order-hold step. Two-tank levels are clamped to [0, 1].
Vector integrate_step(const PlantModel& plant, const Vector& x, const Vector& u, double dt,
                      Integrator method);

/// states[0] = x0, states[k+1] = step(states[k], inputs[k]); returns
/// inputs.size() states (the last input drives no further step).
/// Throws NumericError naming the step on non-finite states.
std::vector<Vector> integrate(const PlantModel& plant, const Vector& x0,
                              const std::vector<Vector>& inputs, double dt, Integrator method);

/// Piecewise-constant levels held for `hold` samples. Steps draw uniform
/// levels in [lo, hi]; PRBS draws lo or hi with equal probability.
std::vector<double> excitation_signal(SignalKind kind, std::size_t length, double lo, double hi,
                                      std::size_t hold, Rng& rng);

struct InputChannelSpec {
  SignalKind signal = SignalKind::kSteps;
  double lo = 0.0;
  double hi = 1.0;
  std::size_t hold = 50;
};

struct SimulationSpec {
  PlantKind plant = PlantKind::kCstr;
  ParameterMap params;              // empty = defaults
  double dt = 0.1;
  std::size_t steps = 3000;
  std::vector<double> x0;           // empty = plant default
  std::vector<InputChannelSpec> inputs;  // empty = plant default
  Integrator method = Integrator::kRk4;
  std::array<std::size_t, 3> splits{1000, 1000, 1000};
  std::uint64_t seed = 0;
};

/// Default simulation protocol per plant (dt, x0, excitation).
SimulationSpec default_simulation(PlantKind kind);

struct Normalization {
  std::vector<double> lo, hi;
  Vector apply(const Vector& v) const;   // to [-1, 1]
  Vector invert(const Vector& v) const;
};

Normalization fit_normalization(const std::vector<Vector>& values);

struct PlantDataset {
  PlantKind plant = PlantKind::kCstr;
  ParameterMap params;
  double dt = 0.1;
  std::uint64_t seed = 0;
  Integrator method = Integrator::kRk4;
  std::vector<Vector> states;   // raw units
  std::vector<Vector> inputs;
  std::array<std::size_t, 4> split_bounds{0, 1000, 2000, 3000};  // [train, dev, test) edges
  Normalization state_norm;
  Normalization input_norm;

  std::size_t state_dim() const { return states.empty() ? 0 : states.front().size(); }
  std::size_t input_dim() const { return inputs.empty() ? 0 : inputs.front().size(); }
  /// Normalised states/inputs of split s (0 train, 1 dev, 2 test).
  std::vector<Vector> split_states(std::size_t s) const;
  std::vector<Vector> split_inputs(std::size_t s) const;
};

PlantDataset simulate(const SimulationSpec& spec);

/// CSV t,x1..xn,u1..um in raw units plus a JSON sidecar with the metadata.
std::string dataset_to_csv(const PlantDataset& d);
nlohmann::json dataset_sidecar(const PlantDataset& d);
void save_dataset(const PlantDataset& d, const std::string& csv_path, const std::string& json_path);
PlantDataset load_dataset(const std::string& csv_path, const std::string& json_path);

nlohmann::json simulation_to_json(const SimulationSpec& s);
SimulationSpec simulation_from_json(const nlohmann::json& j);

}  // namespace neurodissip
