// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#include "neurodissip/pwa.hpp"

#include "neurodissip/errors.hpp"

namespace neurodissip {

PwaForm extract_pwa(const MlpNetwork& net, const Vector& x) {
  const ForwardResult fwd = net.forward(x);
  PwaForm form;
  form.anchor = x;

  Matrix a;  // affine part of the current hidden state; identity before layer 0
  Vector c(x.size());
  bool first = true;
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const Layer& layer = net.layer(l);
    Matrix next = first ? layer.weight : matmul(layer.weight, a);
    Vector offset = first ? Vector(layer.output_dim()) : matvec(layer.weight, c);
    if (layer.bias)
      for (std::size_t i = 0; i < offset.size(); ++i) offset[i] += (*layer.bias)[i];
    first = false;

    if (layer.activation) {
      const Activation act = *layer.activation;
      const double s0 = activation_value(act, 0.0);
      const Vector& z = fwd.pre_activations[l];
      Vector lam(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) {
        lam[i] = lambda_entry(act, z[i]);
        auto row = next.row(i);
        for (double& v : row) v *= lam[i];
        offset[i] = lam[i] * offset[i] + s0;
      }
      form.lambdas.push_back(std::move(lam));
    }
    a = std::move(next);
    c = std::move(offset);
  }
  form.a_star = std::move(a);
  form.b_star = std::move(c);
  return form;
}

double verify_equivalence(const MlpNetwork& net, const PwaForm& form) {
  if (form.a_star.rows() != net.output_dim() || form.a_star.cols() != net.input_dim() ||
      form.b_star.size() != net.output_dim() || form.anchor.size() != net.input_dim())
    throw DimensionError("verify_equivalence: PWA form " + form.a_star.shape() +
                         " does not match network dims");
  const Vector y = net.evaluate(form.anchor);
  const Vector affine = add(matvec(form.a_star, form.anchor), form.b_star);
  return norm2(subtract(y, affine));
}

double relative_residual(const MlpNetwork& net, const PwaForm& form) {
  const double r = verify_equivalence(net, form);
  return r / (1.0 + norm2(net.evaluate(form.anchor)));
}

nlohmann::json pwa_to_json(const PwaForm& form) {
  nlohmann::json lambdas = nlohmann::json::array();
  for (const Vector& l : form.lambdas) lambdas.push_back(l.values());
  return {{"anchor", form.anchor.values()},
          {"a_star", matrix_to_json(form.a_star)},
          {"b_star", form.b_star.values()},
          {"lambdas", std::move(lambdas)}};
}

}  // namespace neurodissip
