// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace neurodissip {

enum class Activation {
  kIdentity,
  kRelu,
  kLeakyRelu,
  kElu,
  kSelu,
  kGelu,
  kTanh,
  kSigmoid,
  kSoftplus,
  kSoftsign,
  kHardtanh,
};

/// Lipschitz classification of an activation's secant gains.
///  kStable: |(s(z)-s(0))/z| <= 1 everywhere.
///  kUnstableRegions: gains exceed one somewhere.
///  kClampedUnstableCenter: unstable centre, contracting clamped tails.
enum class StabilityClass { kStable, kUnstableRegions, kClampedUnstableCenter };

// Canonical constants, pinned here only.
inline constexpr double kSeluScale = 1.0507009873554804934193349852946;
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;
inline constexpr double kLeakyReluSlope = 0.01;
inline constexpr double kEluAlpha = 1.0;
/// Below this magnitude the secant gain is replaced by the right derivative at 0.
inline constexpr double kLambdaEpsilon = 1e-9;

std::span<const Activation> all_activations();
std::string_view activation_name(Activation a);
/// Case-insensitive; accepts "logistic" for sigmoid. Throws ConfigError on unknown names.
Activation parse_activation(std::string_view name);
std::optional<Activation> try_parse_activation(std::string_view name);
StabilityClass stability_class(Activation a);
std::string_view stability_class_name(StabilityClass c);

/// s(z). GELU is the exact erf form.
double activation_value(Activation a, double z);

/// s'(z); at kinks the right derivative.
double activation_derivative(Activation a, double z);

/// Right derivative s'(0+).
double activation_right_derivative_at_zero(Activation a);

/// Diagonal activation-pattern gain (s(z) - s(0)) / z, so that
/// s(z) = lambda_entry(z) * z + s(0). For |z| < kLambdaEpsilon the limit
/// s'(0+) is returned, except that ReLU and LeakyReLU at exactly z == 0 take
/// the inactive branch (0 and the leak slope respectively).
double lambda_entry(Activation a, double z);

}  // namespace neurodissip
