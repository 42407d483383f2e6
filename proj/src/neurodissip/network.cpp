// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#include "neurodissip/network.hpp"

#include <fstream>

#include <json.hpp>

#include "neurodissip/errors.hpp"

namespace neurodissip {

using nlohmann::json;

MlpNetwork::MlpNetwork(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InvalidArgument("MlpNetwork: at least one layer is required");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (layer.weight.empty())
      throw DimensionError("MlpNetwork: layer " + std::to_string(l) + " has an empty weight");
    if (layer.bias && layer.bias->size() != layer.output_dim())
      throw DimensionError("MlpNetwork: layer " + std::to_string(l) + " bias of dim " +
                           std::to_string(layer.bias->size()) + " for weight " +
                           layer.weight.shape());
    if (l > 0 && layer.input_dim() != layers_[l - 1].output_dim())
      throw DimensionError("MlpNetwork: layer " + std::to_string(l) + " weight " +
                           layer.weight.shape() + " does not chain with layer " +
                           std::to_string(l - 1) + " weight " + layers_[l - 1].weight.shape());
  }
  input_dim_ = layers_.front().input_dim();
  output_dim_ = layers_.back().output_dim();
}

ForwardResult MlpNetwork::forward(const Vector& x) const {
  if (x.size() != input_dim_)
    throw DimensionError("forward: input of dim " + std::to_string(x.size()) +
                         " for network with input dim " + std::to_string(input_dim_));
  ForwardResult out;
  out.pre_activations.reserve(layers_.size());
  Vector h = x;
  for (const Layer& layer : layers_) {
    Vector z = matvec(layer.weight, h);
    if (layer.bias)
      for (std::size_t i = 0; i < z.size(); ++i) z[i] += (*layer.bias)[i];
    h = z;
    if (layer.activation)
      for (double& v : h) v = activation_value(*layer.activation, v);
    out.pre_activations.push_back(std::move(z));
  }
  out.output = std::move(h);
  return out;
}

Vector MlpNetwork::evaluate(const Vector& x) const {
  if (x.size() != input_dim_)
    throw DimensionError("evaluate: input of dim " + std::to_string(x.size()) +
                         " for network with input dim " + std::to_string(input_dim_));
  Vector h = x;
  for (const Layer& layer : layers_) {
    Vector z = matvec(layer.weight, h);
    if (layer.bias)
      for (std::size_t i = 0; i < z.size(); ++i) z[i] += (*layer.bias)[i];
    if (layer.activation)
      for (double& v : z) v = activation_value(*layer.activation, v);
    h = std::move(z);
  }
  return h;
}

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()},
              {"data", std::vector<double>(m.entries().begin(), m.entries().end())}};
}

Matrix matrix_from_json(const json& j) {
  try {
    return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                  j.at("data").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("matrix JSON: ") + e.what());
  }
}

json network_to_json(const MlpNetwork& net) {
  json layers = json::array();
  for (const Layer& layer : net.layers()) {
    json l;
    l["rows"] = layer.weight.rows();
    l["cols"] = layer.weight.cols();
    l["weight"] = std::vector<double>(layer.weight.entries().begin(), layer.weight.entries().end());
    l["bias"] = layer.bias ? json(layer.bias->values()) : json(nullptr);
    l["activation"] = layer.activation ? json(activation_name(*layer.activation)) : json(nullptr);
    layers.push_back(std::move(l));
  }
  return json{{"layers", std::move(layers)}};
}

MlpNetwork network_from_json(const json& j) {
  try {
    std::vector<Layer> layers;
    for (const json& l : j.at("layers")) {
      for (auto it = l.begin(); it != l.end(); ++it) {
        const std::string& k = it.key();
        if (k != "rows" && k != "cols" && k != "weight" && k != "bias" && k != "activation")
          throw ConfigError("network JSON: unknown layer key '" + k + "'");
      }
      Layer layer;
      layer.weight = Matrix(l.at("rows").get<std::size_t>(), l.at("cols").get<std::size_t>(),
                            l.at("weight").get<std::vector<double>>());
      if (l.contains("bias") && !l["bias"].is_null())
        layer.bias = Vector(l["bias"].get<std::vector<double>>());
      if (l.contains("activation") && !l["activation"].is_null())
        layer.activation = parse_activation(l["activation"].get<std::string>());
      layers.push_back(std::move(layer));
    }
    return MlpNetwork(std::move(layers));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("network JSON: ") + e.what());
  }
}

MlpNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open network file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("network file '" + path + "': " + e.what());
  }
  return network_from_json(j);
}

void save_network(const MlpNetwork& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write network file '" + path + "'");
  out << network_to_json(net).dump(2) << '\n';
}

}  // namespace neurodissip
