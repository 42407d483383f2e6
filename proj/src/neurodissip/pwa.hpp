// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#pragma once

#include <vector>

#include <json.hpp>

#include "neurodissip/linalg.hpp"
#include "neurodissip/network.hpp"

namespace neurodissip {

/// Exact local affine form f(x) = a_star * x + b_star at a fixed anchor x.
struct PwaForm {
  Vector anchor;
  Matrix a_star;               // output_dim x input_dim
  Vector b_star;               // output_dim
  std::vector<Vector> lambdas; // activation-pattern diagonals, one per activated layer
};

/// Builds the pointwise-affine form from a single forward pass.
///
/// With h_l = A_l x + c_l the affine form of the l-th hidden state, each layer
/// maps z_l = W_l A_l x + (W_l c_l + b_l) and an activated layer then applies
/// the diagonal gains Lambda_l = (s(z_l) - s(0)) / z_l:
///   A_{l+1} = Lambda_l W_l A_l,   c_{l+1} = Lambda_l (W_l c_l + b_l) + s(0).
/// The offset recursion uses the current layer's weight W_l; that is the only
/// indexing under which f(x) = A* x + b* holds. Lambda is applied as a row
/// scaling and never materialised.
PwaForm extract_pwa(const MlpNetwork& net, const Vector& x);

/// ||f(anchor) - (a_star anchor + b_star)||_2.
double verify_equivalence(const MlpNetwork& net, const PwaForm& form);

/// Residual divided by (1 + ||f(anchor)||_2).
double relative_residual(const MlpNetwork& net, const PwaForm& form);

nlohmann::json pwa_to_json(const PwaForm& form);

}  // namespace neurodissip
