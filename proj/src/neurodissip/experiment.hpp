// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "neurodissip/activation.hpp"
#include "neurodissip/dissipativity.hpp"
#include "neurodissip/network.hpp"
#include "neurodissip/plants.hpp"
#include "neurodissip/structured_maps.hpp"
#include "neurodissip/training.hpp"

namespace neurodissip {

struct NetworkSpec {
  std::size_t state_dim = 2;
  std::size_t depth = 4;  // activated layers; a linear output layer follows
  Activation activation = Activation::kTanh;
  bool bias = false;
};

struct WeightSpec {
  MapKind kind = MapKind::kGershgorinComplex;
  double lambda_min = 0.0;
  double lambda_max = 1.0;
};

enum class SpectraMode { kNetwork, kWeightShared };

struct AnalysisSpec {
  GridSpec grid;                     // state-space grid for grid/certify
  GridSpec basin{-6, 6, -6, 6, 60, 60};
  std::vector<double> x0{1.0, 1.0};  // pwa anchor and rollout start
  std::size_t rollout_steps = 2000;
  std::size_t anchors = 1000;        // Latin-hypercube anchors when state_dim != 2
  SpectraMode spectra_mode = SpectraMode::kNetwork;
  std::vector<std::size_t> depths{1, 4, 8};  // weight-shared spectra
  std::size_t spectra_resolution = 30;       // anchors per axis over `grid`
};

struct SweepMapAxis {
  MapKind kind = MapKind::kUnstructured;
  std::vector<std::pair<double, double>> bounds;
};

struct SweepSpec {
  std::vector<SweepMapAxis> maps;
  std::vector<std::size_t> depths;
  std::vector<Activation> activations;
  std::vector<bool> bias;
};

/// Factorisation x bounds x depth x activation x bias grid of 828 models.
SweepSpec default_sweep();

struct ExperimentConfig {
  std::uint64_t seed = 0;
  NetworkSpec network;
  WeightSpec map;
  std::optional<std::string> network_file;  // overrides network/map when set
  AnalysisSpec analysis;
  SimulationSpec plant = default_simulation(PlantKind::kCstr);
  std::optional<std::string> dataset;       // directory holding data.csv/data.json
  TrainConfig training;
  bool resume = false;
  SweepSpec sweep = default_sweep();
  bool certify_assert = false;
};

nlohmann::json config_to_json(const ExperimentConfig& c);
/// Missing keys take defaults; unknown keys raise ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Sets a dotted path (e.g. "analysis.grid.resolution") in a config document.
/// The value is parsed as JSON when possible and taken as a string otherwise.
/// Intermediate objects are created; the result is validated by config_from_json.
void apply_override(nlohmann::json& doc, std::string_view key, std::string_view value);
/// Parses "key=value" and applies it.
void apply_assignment(nlohmann::json& doc, std::string_view assignment);

/// Seed for the weights of a (factorisation, bounds, depth) combination, so
/// that activation and bias swaps reuse the same weights.
std::uint64_t weight_seed(const WeightSpec& map, std::size_t depth, std::uint64_t base);

/// depth activated n x n layers followed by a linear n x n output layer, all
/// realised from `map`. Biases come from a separate stream.
MlpNetwork build_network(const NetworkSpec& net, const WeightSpec& map, std::uint64_t seed);
/// Loads network_file when set, otherwise build_network.
MlpNetwork config_network(const ExperimentConfig& c);

struct SweepEntry {
  std::size_t index = 0;
  WeightSpec map;
  NetworkSpec network;
  std::string key;  // e.g. gershgorin_real_0_1_d4_relu_bias
};

/// Cross product in the order map, bounds, depth, activation, bias.
std::vector<SweepEntry> enumerate_sweep(const SweepSpec& spec, std::size_t state_dim);

std::string_view spectra_mode_name(SpectraMode m);
SpectraMode parse_spectra_mode(std::string_view name);

}  // namespace neurodissip
