// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "neurodissip/linalg.hpp"
#include "neurodissip/network.hpp"
#include "neurodissip/plants.hpp"
#include "neurodissip/random.hpp"
#include "neurodissip/structured_maps.hpp"

namespace neurodissip {

/// x_{t+1} = f(x_t) + g(u_t).
struct BlockSSM {
  MlpNetwork f_net;
  MlpNetwork g_net;

  void validate() const;
  std::size_t state_dim() const { return f_net.output_dim(); }
  std::size_t input_dim() const { return g_net.input_dim(); }
};

Vector ssm_step(const BlockSSM& model, const Vector& x, const Vector& u);

/// Open-loop prediction from states[0] using the true inputs; returns
/// horizon + 1 states.
std::vector<Vector> ssm_rollout(const BlockSSM& model, const Vector& x0,
                                std::span<const Vector> inputs, std::size_t horizon);

/// Mean over the horizon and state dims of (xhat_k - x_k)^2, k = 1..horizon.
/// Needs states.size() >= horizon + 1 and inputs.size() >= horizon.
double rollout_loss(const BlockSSM& model, std::span<const Vector> states,
                    std::span<const Vector> inputs, std::size_t horizon);

/// Open-loop MSE over a whole split (horizon = states.size() - 1).
double open_loop_mse(const BlockSSM& model, std::span<const Vector> states,
                     std::span<const Vector> inputs);

struct LayerGradient {
  Matrix weight;
  Vector bias;  // empty when the layer has no bias
};

/// Loss and its gradient with respect to every weight and bias of both
/// networks, laid out like MlpNetwork::layers().
struct GradientTape {
  double loss = 0.0;
  std::vector<LayerGradient> f;
  std::vector<LayerGradient> g;

  static GradientTape zeros_like(const BlockSSM& model);
  void accumulate(const GradientTape& other, double scale = 1.0);
};

/// Backpropagation through time over one window.
GradientTape backward(const BlockSSM& model, std::span<const Vector> states,
                      std::span<const Vector> inputs, std::size_t horizon);

/// Gradient of ||A*_f(x)||_2 with respect to f's weights, holding the
/// activation pattern at x fixed; uses d||A||/dA = u1 v1^T.
std::vector<Matrix> spectral_norm_gradient(const MlpNetwork& f, const Vector& x, double* a_norm);

enum class OptimizerKind { kAdam, kSgd };
std::string_view optimizer_name(OptimizerKind k);
OptimizerKind parse_optimizer(std::string_view name);

struct MapSpec {
  MapKind kind = MapKind::kUnstructured;
  double lambda_min = 0.0;
  double lambda_max = 1.0;
};

struct Regularizers {
  double l1 = 0.0;            // sum |W_ij|
  double l2 = 0.0;            // Frobenius norm
  double orthogonality = 0.0; // softplus penalty on W^T W - I
  double dissipativity = 0.0; // weight on mean max(1, ||A*_f||)
  std::size_t dissipativity_anchors = 16;
};

/// Norm penalties of one weight; adds their gradient to `grad` when given.
/// Orthogonality uses E = W^T W - I (W W^T - I for wide W) and
/// sum softplus(E) + softplus(-E) - 2 ln 2.
double weight_regularizers(const Matrix& w, const Regularizers& reg, Matrix* grad);

struct TrainConfig {
  std::size_t horizon = 32;
  std::size_t batch = 64;
  std::size_t epochs = 300;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  Regularizers regularizers;
  std::uint64_t seed = 0;
  std::size_t hidden_depth = 2;
  std::size_t hidden_width = 32;
  Activation activation = Activation::kGelu;
  bool bias = true;
  MapSpec f_map;  // applied to each f layer whose shape the kind admits

  void validate() const;
};

nlohmann::json train_config_to_json(const TrainConfig& c);
/// Overlays keys of j onto `base`; unknown keys raise ConfigError.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

/// A layer whose weight is re-realised from raw parameters every step.
struct TrainableLayer {
  StructuredLinearMap map;
  std::optional<Vector> bias;
  std::optional<Activation> activation;
};

struct TrainableNetwork {
  std::vector<TrainableLayer> layers;

  MlpNetwork realize() const;
  std::size_t parameter_count() const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> values);
  /// Flattened dL/dparams from realised-weight gradients.
  std::vector<double> pullback(const std::vector<LayerGradient>& grads) const;
};

/// hidden_depth activated layers of width `width`, then a linear output layer.
/// hidden_depth = 0 gives a single linear layer. Unstructured weights and all
/// biases are U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
TrainableNetwork make_trainable(std::size_t in, std::size_t out, std::size_t hidden_depth,
                                std::size_t width, Activation act, bool bias, const MapSpec& map,
                                Rng& rng);

nlohmann::json trainable_to_json(const TrainableNetwork& net);
TrainableNetwork trainable_from_json(const nlohmann::json& j);

/// Normalised (train, dev, test) sequences.
struct TrainingData {
  std::array<std::vector<Vector>, 3> states;
  std::array<std::vector<Vector>, 3> inputs;
};

TrainingData training_data(const PlantDataset& d);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
  std::optional<double> penalty;  // mean dissipativity penalty, when enabled
};

struct TrainReport {
  std::vector<EpochRecord> history;
  double initial_train_loss = 0.0;
  double initial_dev_loss = 0.0;
  double initial_test_loss = 0.0;
  std::size_t best_epoch = 0;  // 0 = initial parameters
  double best_dev_loss = 0.0;
  double test_loss = 0.0;      // of the selected model
  std::size_t parameter_count = 0;
};

nlohmann::json train_report_to_json(const TrainReport& r);

struct TrainState {
  TrainableNetwork f;
  TrainableNetwork g;
  TrainableNetwork best_f;
  TrainableNetwork best_g;
  std::vector<double> m, v;  // optimiser moments
  std::size_t step = 0;
  std::size_t epoch = 0;     // completed epochs
  std::string rng_state;
  TrainReport report;
};

nlohmann::json train_state_to_json(const TrainState& s);
TrainState train_state_from_json(const nlohmann::json& j);

/// Fresh state with networks initialised from config.seed.
TrainState init_train_state(const TrainingData& data, const TrainConfig& config);

/// Runs the remaining epochs of `state` (all of them for a fresh state).
/// `on_epoch` is called after every epoch, e.g. for checkpointing. Throws
/// NumericError naming the epoch and batch on a non-finite loss.
void train(TrainState& state, const TrainingData& data, const TrainConfig& config,
           const std::function<void(const TrainState&)>& on_epoch = {});

BlockSSM selected_model(const TrainState& state);

}  // namespace neurodissip
