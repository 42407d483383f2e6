// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "neurodissip/activation.hpp"
#include "neurodissip/linalg.hpp"

namespace neurodissip {

/// One affine map followed by an optional elementwise activation. A missing
/// bias is kept distinct from a zero bias.
struct Layer {
  Matrix weight;                        // n_out x n_in
  std::optional<Vector> bias;           // n_out
  std::optional<Activation> activation; // none for a linear output layer

  std::size_t input_dim() const noexcept { return weight.cols(); }
  std::size_t output_dim() const noexcept { return weight.rows(); }
};

struct ForwardResult {
  Vector output;
  /// z_l = W_l h_l + b_l for every layer, in order.
  std::vector<Vector> pre_activations;
};

/// Immutable feed-forward network h_{l+1} = s(W_l h_l + b_l).
class MlpNetwork {
 public:
  /// Validates that layer dimensions chain and that there is at least one layer.
  explicit MlpNetwork(std::vector<Layer> layers);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return output_dim_; }
  std::size_t depth() const noexcept { return layers_.size(); }
  bool is_square() const noexcept { return input_dim_ == output_dim_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  const Layer& layer(std::size_t i) const { return layers_.at(i); }

  /// f(x) and every pre-activation. Throws DimensionError on a wrong input size.
  ForwardResult forward(const Vector& x) const;
  /// f(x) without recording intermediates.
  Vector evaluate(const Vector& x) const;

 private:
  std::vector<Layer> layers_;
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
};

// JSON: {"layers":[{"rows","cols","weight":[row-major],"bias":[..]|null,"activation":name|null}]}
nlohmann::json network_to_json(const MlpNetwork& net);
MlpNetwork network_from_json(const nlohmann::json& j);
MlpNetwork load_network(const std::string& path);
void save_network(const MlpNetwork& net, const std::string& path);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

}  // namespace neurodissip
