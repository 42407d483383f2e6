// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#include <doctest.h>

#include <cmath>

#include "neurodissip/errors.hpp"
#include "neurodissip/network.hpp"
#include "neurodissip/pwa.hpp"
#include "neurodissip/random.hpp"

using namespace neurodissip;

namespace {

MlpNetwork random_net(std::size_t width, std::size_t depth, Activation act, bool bias, Rng& rng,
                      std::size_t in = 2, std::size_t out = 2) {
  std::vector<Layer> layers;
  std::size_t prev = in;
  for (std::size_t l = 0; l <= depth; ++l) {
    const bool last = l == depth;
    const std::size_t next = last ? out : width;
    Matrix w(next, prev);
    const double a = 1.5 / std::sqrt(static_cast<double>(prev));
    for (double& v : w.entries()) v = uniform(rng, -a, a);
    Layer layer{std::move(w), std::nullopt, std::nullopt};
    if (bias) {
      Vector b(next);
      for (double& v : b) v = uniform(rng, -0.5, 0.5);
      layer.bias = std::move(b);
    }
    if (!last) layer.activation = act;
    layers.push_back(std::move(layer));
    prev = next;
  }
  return MlpNetwork(std::move(layers));
}

// Direct evaluator written against the raw layer data.
std::vector<double> naive_eval(const MlpNetwork& net, std::vector<double> h) {
  for (const Layer& layer : net.layers()) {
    std::vector<double> z(layer.weight.rows(), 0.0);
    for (std::size_t i = 0; i < z.size(); ++i) {
      for (std::size_t j = 0; j < h.size(); ++j) z[i] += layer.weight(i, j) * h[j];
      if (layer.bias) z[i] += (*layer.bias)[i];
      if (layer.activation) z[i] = activation_value(*layer.activation, z[i]);
    }
    h = z;
  }
  return h;
}

Vector random_point(std::size_t n, Rng& rng, double scale = 3.0) {
  Vector x(n);
  for (double& v : x) v = uniform(rng, -scale, scale);
  return x;
}

}  // namespace

TEST_CASE("network construction validates layer chaining") {
  CHECK_THROWS_AS(MlpNetwork(std::vector<Layer>{}), InvalidArgument);
  std::vector<Layer> bad;
  bad.push_back({Matrix(3, 2), std::nullopt, Activation::kRelu});
  bad.push_back({Matrix(2, 2), std::nullopt, std::nullopt});
  CHECK_THROWS_AS(MlpNetwork{bad}, DimensionError);
  std::vector<Layer> bad_bias;
  bad_bias.push_back({Matrix(2, 2), Vector{1.0}, std::nullopt});
  CHECK_THROWS_AS(MlpNetwork{bad_bias}, DimensionError);
}

TEST_CASE("forward on hand-computed networks") {
  MlpNetwork id({Layer{Matrix::identity(3), std::nullopt, Activation::kIdentity}});
  CHECK(id.evaluate(Vector{1.0, -2.0, 3.0}) == Vector{1.0, -2.0, 3.0});

  MlpNetwork net({Layer{Matrix{{1}}, Vector{-1.0}, Activation::kRelu},
                  Layer{Matrix{{3}}, std::nullopt, std::nullopt}});
  const ForwardResult r = net.forward(Vector{2.0});
  CHECK(r.output[0] == 3.0);
  CHECK(r.pre_activations[0][0] == 1.0);
  CHECK_THROWS_AS(net.forward(Vector{1.0, 2.0}), DimensionError);
}

TEST_CASE("forward matches a naive evaluator") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const MlpNetwork net = random_net(6, 2, Activation::kTanh, true, rng);
    const Vector x = random_point(2, rng);
    const Vector y = net.evaluate(x);
    const auto ref = naive_eval(net, x.values());
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(ref[i]).epsilon(1e-14));
    CHECK(net.forward(x).output == y);
  }
}

TEST_CASE("network JSON round-trips exactly") {
  Rng rng(9);
  const MlpNetwork net = random_net(4, 3, Activation::kGelu, true, rng);
  const MlpNetwork back = network_from_json(nlohmann::json::parse(network_to_json(net).dump()));
  REQUIRE(back.depth() == net.depth());
  for (std::size_t l = 0; l < net.depth(); ++l) {
    CHECK(back.layer(l).weight == net.layer(l).weight);
    CHECK(back.layer(l).bias == net.layer(l).bias);
    CHECK(back.layer(l).activation == net.layer(l).activation);
  }
  nlohmann::json j = network_to_json(net);
  j["layers"][0]["extra"] = 1;
  CHECK_THROWS_AS(network_from_json(j), ConfigError);
}

TEST_CASE("PWA of linear and active-region networks") {
  const Matrix w0{{1, 2}, {3, 4}};
  const Matrix w1{{0.5, -1}, {2, 0}};
  MlpNetwork lin({Layer{w0, std::nullopt, Activation::kIdentity}, Layer{w1, std::nullopt, std::nullopt}});
  const Matrix prod = matmul(w1, w0);
  for (const Vector& x : {Vector{1.0, 1.0}, Vector{-3.0, 0.2}}) {
    const PwaForm f = extract_pwa(lin, x);
    CHECK(f.a_star == prod);
    CHECK(f.b_star == Vector(2));
  }
  MlpNetwork relu({Layer{w0, std::nullopt, Activation::kRelu}, Layer{w1, std::nullopt, std::nullopt}});
  const PwaForm f = extract_pwa(relu, Vector{1.0, 1.0});
  CHECK(f.a_star == prod);
  CHECK(f.lambdas.size() == 1);
}

TEST_CASE("PWA equivalence across activations, depths, widths and bias") {
  Rng rng(2024);
  for (Activation act : all_activations()) {
    for (std::size_t depth : {1, 4, 8}) {
      for (std::size_t width : {2, 8, 64}) {
        for (bool bias : {false, true}) {
          const MlpNetwork net = random_net(width, depth, act, bias, rng);
          const bool zero_centered = activation_value(act, 0.0) == 0.0;
          for (int k = 0; k < 100; ++k) {
            const Vector x = random_point(2, rng);
            const PwaForm f = extract_pwa(net, x);
            CHECK_MESSAGE(relative_residual(net, f) <= 1e-6, activation_name(act), " depth=",
                          depth, " width=", width, " bias=", bias);
            if (!bias && zero_centered) CHECK(norm2(f.b_star) == 0.0);
          }
        }
      }
    }
  }
}

TEST_CASE("piecewise-linear activations give locally constant A*") {
  // Only kinks through the origin give constant secant gains; saturating
  // pieces such as Hardtanh's have gain 1/|z|, which varies within a region.
  Rng rng(77);
  for (Activation act : {Activation::kRelu, Activation::kLeakyRelu}) {
    const MlpNetwork net = random_net(8, 3, act, true, rng);
    const Vector x = random_point(2, rng);
    const PwaForm f = extract_pwa(net, x);
    Vector y = x;
    y[0] += 1e-9;
    const PwaForm g = extract_pwa(net, y);
    bool same_pattern = true;
    for (std::size_t l = 0; l < f.lambdas.size(); ++l) same_pattern &= f.lambdas[l] == g.lambdas[l];
    REQUIRE(same_pattern);
    CHECK(f.a_star == g.a_star);
  }
}

TEST_CASE("verify_equivalence detects an injected offset") {
  Rng rng(1);
  const MlpNetwork net = random_net(5, 2, Activation::kGelu, true, rng);
  PwaForm f = extract_pwa(net, Vector{0.3, -0.4});
  f.b_star[0] += 1e-3;
  CHECK(verify_equivalence(net, f) == doctest::Approx(1e-3).epsilon(1e-6));

  MlpNetwork zero({Layer{Matrix(2, 2), std::nullopt, Activation::kTanh}, Layer{Matrix(2, 2), std::nullopt, std::nullopt}});
  CHECK(verify_equivalence(zero, extract_pwa(zero, Vector{1.0, 2.0})) == 0.0);
}
