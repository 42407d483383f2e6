// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#include "neurodissip/activation.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>

#include "neurodissip/errors.hpp"

namespace neurodissip {

namespace {

constexpr std::array kAll = {
    Activation::kIdentity, Activation::kRelu,     Activation::kLeakyRelu, Activation::kElu,
    Activation::kSelu,     Activation::kGelu,     Activation::kTanh,      Activation::kSigmoid,
    Activation::kSoftplus, Activation::kSoftsign, Activation::kHardtanh,
};

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

std::span<const Activation> all_activations() { return kAll; }

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kLeakyRelu: return "leakyrelu";
    case Activation::kElu: return "elu";
    case Activation::kSelu: return "selu";
    case Activation::kGelu: return "gelu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kSoftplus: return "softplus";
    case Activation::kSoftsign: return "softsign";
    case Activation::kHardtanh: return "hardtanh";
  }
  return "unknown";
}

std::optional<Activation> try_parse_activation(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  lower.erase(std::remove(lower.begin(), lower.end(), '_'), lower.end());
  if (lower == "logistic") return Activation::kSigmoid;
  if (lower == "linear") return Activation::kIdentity;
  for (Activation a : kAll)
    if (activation_name(a) == lower) return a;
  return std::nullopt;
}

Activation parse_activation(std::string_view name) {
  if (auto a = try_parse_activation(name)) return *a;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

StabilityClass stability_class(Activation a) {
  switch (a) {
    case Activation::kSelu:
    case Activation::kSoftplus: return StabilityClass::kUnstableRegions;
    case Activation::kSigmoid: return StabilityClass::kClampedUnstableCenter;
    default: return StabilityClass::kStable;
  }
}

std::string_view stability_class_name(StabilityClass c) {
  switch (c) {
    case StabilityClass::kStable: return "stable";
    case StabilityClass::kUnstableRegions: return "unstable_regions";
    case StabilityClass::kClampedUnstableCenter: return "clamped_unstable_center";
  }
  return "unknown";
}

double activation_value(Activation a, double z) {
  switch (a) {
    case Activation::kIdentity: return z;
    case Activation::kRelu: return z > 0.0 ? z : 0.0;
    case Activation::kLeakyRelu: return z > 0.0 ? z : kLeakyReluSlope * z;
    case Activation::kElu: return z > 0.0 ? z : kEluAlpha * std::expm1(z);
    case Activation::kSelu: return kSeluScale * (z > 0.0 ? z : kSeluAlpha * std::expm1(z));
    case Activation::kGelu: return z * normal_cdf(z);
    case Activation::kTanh: return std::tanh(z);
    case Activation::kSigmoid: return sigmoid(z);
    case Activation::kSoftplus: return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    case Activation::kSoftsign: return z / (1.0 + std::abs(z));
    case Activation::kHardtanh: return std::clamp(z, -1.0, 1.0);
  }
  return z;
}

double activation_derivative(Activation a, double z) {
  switch (a) {
    case Activation::kIdentity: return 1.0;
    case Activation::kRelu: return z >= 0.0 ? 1.0 : 0.0;
    case Activation::kLeakyRelu: return z >= 0.0 ? 1.0 : kLeakyReluSlope;
    case Activation::kElu: return z >= 0.0 ? 1.0 : kEluAlpha * std::exp(z);
    case Activation::kSelu: return kSeluScale * (z >= 0.0 ? 1.0 : kSeluAlpha * std::exp(z));
    case Activation::kGelu: return normal_cdf(z) + z * normal_pdf(z);
    case Activation::kTanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::kSigmoid: {
      const double s = sigmoid(z);
      return s * (1.0 - s);
    }
    case Activation::kSoftplus: return sigmoid(z);
    case Activation::kSoftsign: {
      const double d = 1.0 + std::abs(z);
      return 1.0 / (d * d);
    }
    case Activation::kHardtanh: return (z >= -1.0 && z < 1.0) ? 1.0 : 0.0;
  }
  return 1.0;
}

double activation_right_derivative_at_zero(Activation a) { return activation_derivative(a, 0.0); }

double lambda_entry(Activation a, double z) {
  if (std::abs(z) < kLambdaEpsilon) {
    if (z == 0.0 && a == Activation::kRelu) return 0.0;
    if (z == 0.0 && a == Activation::kLeakyRelu) return kLeakyReluSlope;
    return activation_right_derivative_at_zero(a);
  }
  switch (a) {
    case Activation::kIdentity: return 1.0;
    case Activation::kRelu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::kLeakyRelu: return z > 0.0 ? 1.0 : kLeakyReluSlope;
    default: return (activation_value(a, z) - activation_value(a, 0.0)) / z;
  }
}

}  // namespace neurodissip
