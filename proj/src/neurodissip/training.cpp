// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#include "neurodissip/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "neurodissip/errors.hpp"
#include "neurodissip/io.hpp"
#include "neurodissip/pwa.hpp"

namespace neurodissip {
namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

struct NetTrace {
  std::vector<Vector> inputs;  // h_l fed to layer l
  std::vector<Vector> pre;     // z_l
  Vector output;
};

NetTrace trace(const MlpNetwork& net, const Vector& x) {
  NetTrace t;
  Vector h = x;
  for (const Layer& layer : net.layers()) {
    t.inputs.push_back(h);
    Vector z = matvec(layer.weight, h);
    if (layer.bias)
      for (std::size_t i = 0; i < z.size(); ++i) z[i] += (*layer.bias)[i];
    h = z;
    if (layer.activation)
      for (double& v : h) v = activation_value(*layer.activation, v);
    t.pre.push_back(std::move(z));
  }
  t.output = std::move(h);
  return t;
}

// Accumulates weight/bias gradients for output gradient dy; returns dL/dx.
Vector backprop(const MlpNetwork& net, const NetTrace& t, Vector dy,
                std::vector<LayerGradient>& grads) {
  for (std::size_t l = net.depth(); l-- > 0;) {
    const Layer& layer = net.layer(l);
    if (layer.activation)
      for (std::size_t i = 0; i < dy.size(); ++i)
        dy[i] *= activation_derivative(*layer.activation, t.pre[l][i]);
    Matrix& gw = grads[l].weight;
    const Vector& h = t.inputs[l];
    for (std::size_t r = 0; r < gw.rows(); ++r) {
      std::span<double> row = gw.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] += dy[r] * h[c];
    }
    if (layer.bias)
      for (std::size_t r = 0; r < dy.size(); ++r) grads[l].bias[r] += dy[r];
    dy = matvec_transposed(layer.weight, dy);
  }
  return dy;
}

std::vector<LayerGradient> zero_grads(const MlpNetwork& net) {
  std::vector<LayerGradient> g;
  for (const Layer& layer : net.layers())
    g.push_back({Matrix(layer.output_dim(), layer.input_dim()),
                 layer.bias ? Vector(layer.output_dim()) : Vector()});
  return g;
}

void check_window(const BlockSSM& model, std::span<const Vector> states,
                  std::span<const Vector> inputs, std::size_t horizon) {
  if (horizon == 0) throw InvalidArgument("horizon must be at least 1");
  if (states.size() < horizon + 1 || inputs.size() < horizon)
    throw DimensionError("window of " + std::to_string(states.size()) + " states and " +
                         std::to_string(inputs.size()) + " inputs is shorter than horizon " +
                         std::to_string(horizon));
  if (states.front().size() != model.state_dim())
    throw DimensionError("state dim " + std::to_string(states.front().size()) +
                         " does not match model state dim " + std::to_string(model.state_dim()));
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

bool map_admits(MapKind kind, std::size_t rows, std::size_t cols) {
  return !map_kind_is_square_only(kind) || rows == cols;
}

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double finite_or_inf(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

std::string rng_to_string(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng rng_from_string(const std::string& s) {
  Rng rng;
  std::istringstream is(s);
  is >> rng;
  if (!is) throw ConfigError("train state: corrupt RNG state");
  return rng;
}

void adam_or_sgd(const TrainConfig& config, TrainState& st, std::vector<double>& params,
                 const std::vector<double>& grad) {
  ++st.step;
  if (config.optimizer == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= config.learning_rate * grad[i];
    return;
  }
  const double t = static_cast<double>(st.step);
  const double c1 = 1.0 - std::pow(kAdamBeta1, t);
  const double c2 = 1.0 - std::pow(kAdamBeta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    st.m[i] = kAdamBeta1 * st.m[i] + (1.0 - kAdamBeta1) * grad[i];
    st.v[i] = kAdamBeta2 * st.v[i] + (1.0 - kAdamBeta2) * grad[i] * grad[i];
    params[i] -= config.learning_rate * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + kAdamEps);
  }
}

}  // namespace

double weight_regularizers(const Matrix& w, const Regularizers& reg, Matrix* grad) {
  double penalty = 0.0;
  if (reg.l1 > 0.0) {
    for (std::size_t i = 0; i < w.entries().size(); ++i) {
      const double v = w.entries()[i];
      penalty += reg.l1 * std::abs(v);
      if (grad) grad->entries()[i] += reg.l1 * (v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0));
    }
  }
  if (reg.l2 > 0.0) {
    const double f = frobenius_norm(w);
    penalty += reg.l2 * f;
    if (grad && f > 0.0)
      for (std::size_t i = 0; i < w.entries().size(); ++i)
        grad->entries()[i] += reg.l2 * w.entries()[i] / f;
  }
  if (reg.orthogonality > 0.0) {
    const bool wide = w.rows() < w.cols();
    const Matrix e = wide ? matmul(w, w.transposed()) : matmul(w.transposed(), w);
    Matrix d(e.rows(), e.cols());
    for (std::size_t i = 0; i < e.rows(); ++i)
      for (std::size_t j = 0; j < e.cols(); ++j) {
        const double v = e(i, j) - (i == j ? 1.0 : 0.0);
        penalty += reg.orthogonality * (softplus(v) + softplus(-v) - 2.0 * std::log(2.0));
        d(i, j) = std::tanh(0.5 * v);
      }
    const Matrix sym = add(d, d.transposed());
    const Matrix gw = wide ? matmul(sym, w) : matmul(w, sym);
    if (grad)
      for (std::size_t i = 0; i < gw.entries().size(); ++i)
        grad->entries()[i] += reg.orthogonality * gw.entries()[i];
  }
  return penalty;
}

void BlockSSM::validate() const {
  if (!f_net.is_square())
    throw DimensionError("f_net must map the state to itself, got " +
                         std::to_string(f_net.input_dim()) + " -> " +
                         std::to_string(f_net.output_dim()));
  if (g_net.output_dim() != f_net.output_dim())
    throw DimensionError("g_net output dim " + std::to_string(g_net.output_dim()) +
                         " does not match state dim " + std::to_string(f_net.output_dim()));
}

Vector ssm_step(const BlockSSM& model, const Vector& x, const Vector& u) {
  return add(model.f_net.evaluate(x), model.g_net.evaluate(u));
}

std::vector<Vector> ssm_rollout(const BlockSSM& model, const Vector& x0,
                                std::span<const Vector> inputs, std::size_t horizon) {
  if (inputs.size() < horizon)
    throw DimensionError("ssm_rollout: " + std::to_string(inputs.size()) +
                         " inputs for horizon " + std::to_string(horizon));
  std::vector<Vector> xs{x0};
  xs.reserve(horizon + 1);
  for (std::size_t k = 0; k < horizon; ++k) xs.push_back(ssm_step(model, xs.back(), inputs[k]));
  return xs;
}

double rollout_loss(const BlockSSM& model, std::span<const Vector> states,
                    std::span<const Vector> inputs, std::size_t horizon) {
  check_window(model, states, inputs, horizon);
  const std::vector<Vector> xs = ssm_rollout(model, states[0], inputs, horizon);
  double s = 0.0;
  for (std::size_t k = 1; k <= horizon; ++k)
    for (std::size_t i = 0; i < xs[k].size(); ++i) {
      const double e = xs[k][i] - states[k][i];
      s += e * e;
    }
  return s / static_cast<double>(horizon * model.state_dim());
}

double open_loop_mse(const BlockSSM& model, std::span<const Vector> states,
                     std::span<const Vector> inputs) {
  if (states.size() < 2) throw InvalidArgument("open_loop_mse: need at least two states");
  return rollout_loss(model, states, inputs, states.size() - 1);
}

GradientTape GradientTape::zeros_like(const BlockSSM& model) {
  GradientTape t;
  t.f = zero_grads(model.f_net);
  t.g = zero_grads(model.g_net);
  return t;
}

void GradientTape::accumulate(const GradientTape& other, double scale) {
  loss += scale * other.loss;
  auto acc = [scale](std::vector<LayerGradient>& dst, const std::vector<LayerGradient>& src) {
    if (dst.size() != src.size()) throw DimensionError("GradientTape: layer count mismatch");
    for (std::size_t l = 0; l < dst.size(); ++l) {
      for (std::size_t i = 0; i < dst[l].weight.entries().size(); ++i)
        dst[l].weight.entries()[i] += scale * src[l].weight.entries()[i];
      for (std::size_t i = 0; i < dst[l].bias.size(); ++i) dst[l].bias[i] += scale * src[l].bias[i];
    }
  };
  acc(f, other.f);
  acc(g, other.g);
}

GradientTape backward(const BlockSSM& model, std::span<const Vector> states,
                      std::span<const Vector> inputs, std::size_t horizon) {
  check_window(model, states, inputs, horizon);
  const std::size_t n = model.state_dim();
  const double scale = 1.0 / static_cast<double>(horizon * n);
  std::vector<NetTrace> ft, gt;
  std::vector<Vector> xs{states[0]};
  for (std::size_t k = 0; k < horizon; ++k) {
    ft.push_back(trace(model.f_net, xs.back()));
    gt.push_back(trace(model.g_net, inputs[k]));
    xs.push_back(add(ft.back().output, gt.back().output));
  }
  GradientTape tape = GradientTape::zeros_like(model);
  Vector lam(n);
  for (std::size_t k = horizon; k >= 1; --k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double e = xs[k][i] - states[k][i];
      tape.loss += scale * e * e;
      lam[i] += 2.0 * scale * e;
    }
    backprop(model.g_net, gt[k - 1], lam, tape.g);
    lam = backprop(model.f_net, ft[k - 1], lam, tape.f);
  }
  return tape;
}

std::vector<Matrix> spectral_norm_gradient(const MlpNetwork& f, const Vector& x, double* a_norm) {
  const PwaForm form = extract_pwa(f, x);
  const SingularPair top = leading_singular_pair(form.a_star);
  if (a_norm) *a_norm = top.sigma;
  // Diagonal gains per layer (empty for linear layers).
  std::vector<const Vector*> gains(f.depth(), nullptr);
  for (std::size_t l = 0, a = 0; l < f.depth(); ++l)
    if (f.layer(l).activation) gains[l] = &form.lambdas[a++];
  // right_l = (D W)_{l-1..0} v and left_l = D_l (W D)^T_{l+1..} u.
  std::vector<Vector> right(f.depth());
  Vector alpha = top.v;
  for (std::size_t l = 0; l < f.depth(); ++l) {
    right[l] = alpha;
    alpha = matvec(f.layer(l).weight, alpha);
    if (gains[l])
      for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] *= (*gains[l])[i];
  }
  std::vector<Matrix> grads(f.depth());
  Vector beta = top.u;
  for (std::size_t l = f.depth(); l-- > 0;) {
    if (gains[l])
      for (std::size_t i = 0; i < beta.size(); ++i) beta[i] *= (*gains[l])[i];
    grads[l] = outer(beta, right[l]);
    beta = matvec_transposed(f.layer(l).weight, beta);
  }
  return grads;
}

std::string_view optimizer_name(OptimizerKind k) {
  return k == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw ConfigError("unknown optimizer '" + std::string(name) + "' (expected adam or sgd)");
}

void TrainConfig::validate() const {
  if (horizon == 0) throw ConfigError("training.horizon must be at least 1");
  if (batch == 0) throw ConfigError("training.batch must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("training.learning_rate must be positive and finite");
  if (hidden_depth > 0 && hidden_width == 0)
    throw ConfigError("training.hidden_width must be at least 1");
  for (double w : {regularizers.l1, regularizers.l2, regularizers.orthogonality,
                   regularizers.dissipativity})
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ConfigError("training.regularizers weights must be non-negative and finite");
  if (regularizers.dissipativity > 0.0 && regularizers.dissipativity_anchors == 0)
    throw ConfigError("training.regularizers.dissipativity_anchors must be at least 1");
  if (!(f_map.lambda_min <= f_map.lambda_max))
    throw ConfigError("training.f_map: lambda_min exceeds lambda_max");
  if (f_map.kind == MapKind::kPerronFrobenius && f_map.lambda_min < 0.0)
    throw ConfigError("training.f_map: perron_frobenius needs lambda_min >= 0");
}

nlohmann::json train_config_to_json(const TrainConfig& c) {
  return {{"horizon", c.horizon},
          {"batch", c.batch},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"optimizer", optimizer_name(c.optimizer)},
          {"seed", c.seed},
          {"hidden_depth", c.hidden_depth},
          {"hidden_width", c.hidden_width},
          {"activation", activation_name(c.activation)},
          {"bias", c.bias},
          {"regularizers",
           {{"l1", c.regularizers.l1},
            {"l2", c.regularizers.l2},
            {"orthogonality", c.regularizers.orthogonality},
            {"dissipativity", c.regularizers.dissipativity},
            {"dissipativity_anchors", c.regularizers.dissipativity_anchors}}},
          {"f_map",
           {{"kind", map_kind_name(c.f_map.kind)},
            {"lambda_min", c.f_map.lambda_min},
            {"lambda_max", c.f_map.lambda_max}}}};
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
  require_known_keys(j,
                     {"horizon", "batch", "epochs", "learning_rate", "optimizer", "seed",
                      "hidden_depth", "hidden_width", "activation", "bias", "regularizers",
                      "f_map"},
                     "training");
  try {
    if (j.contains("horizon")) c.horizon = j["horizon"].get<std::size_t>();
    if (j.contains("batch")) c.batch = j["batch"].get<std::size_t>();
    if (j.contains("epochs")) c.epochs = j["epochs"].get<std::size_t>();
    if (j.contains("learning_rate")) c.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("optimizer")) c.optimizer = parse_optimizer(j["optimizer"].get<std::string>());
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("hidden_depth")) c.hidden_depth = j["hidden_depth"].get<std::size_t>();
    if (j.contains("hidden_width")) c.hidden_width = j["hidden_width"].get<std::size_t>();
    if (j.contains("activation")) c.activation = parse_activation(j["activation"].get<std::string>());
    if (j.contains("bias")) c.bias = j["bias"].get<bool>();
    if (j.contains("regularizers")) {
      const nlohmann::json& r = j["regularizers"];
      require_known_keys(r, {"l1", "l2", "orthogonality", "dissipativity", "dissipativity_anchors"},
                         "training.regularizers");
      if (r.contains("l1")) c.regularizers.l1 = r["l1"].get<double>();
      if (r.contains("l2")) c.regularizers.l2 = r["l2"].get<double>();
      if (r.contains("orthogonality")) c.regularizers.orthogonality = r["orthogonality"].get<double>();
      if (r.contains("dissipativity")) c.regularizers.dissipativity = r["dissipativity"].get<double>();
      if (r.contains("dissipativity_anchors"))
        c.regularizers.dissipativity_anchors = r["dissipativity_anchors"].get<std::size_t>();
    }
    if (j.contains("f_map")) {
      const nlohmann::json& m = j["f_map"];
      require_known_keys(m, {"kind", "lambda_min", "lambda_max"}, "training.f_map");
      if (m.contains("kind")) {
        try {
          c.f_map.kind = parse_map_kind(m["kind"].get<std::string>());
        } catch (const InvalidArgument& e) {
          throw ConfigError(std::string("training.f_map: ") + e.what());
        }
      }
      if (m.contains("lambda_min")) c.f_map.lambda_min = m["lambda_min"].get<double>();
      if (m.contains("lambda_max")) c.f_map.lambda_max = m["lambda_max"].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("training: ") + e.what());
  }
  c.validate();
  return c;
}

MlpNetwork TrainableNetwork::realize() const {
  std::vector<Layer> out;
  out.reserve(layers.size());
  for (const TrainableLayer& l : layers) out.push_back({l.map.realize(), l.bias, l.activation});
  return MlpNetwork(std::move(out));
}

std::size_t TrainableNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const TrainableLayer& l : layers) {
    for (const Matrix& p : l.map.params) n += p.entries().size();
    if (l.bias) n += l.bias->size();
  }
  return n;
}

std::vector<double> TrainableNetwork::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const TrainableLayer& l : layers) {
    for (const Matrix& p : l.map.params) out.insert(out.end(), p.entries().begin(), p.entries().end());
    if (l.bias) out.insert(out.end(), l.bias->begin(), l.bias->end());
  }
  return out;
}

void TrainableNetwork::assign(std::span<const double> values) {
  if (values.size() != parameter_count())
    throw DimensionError("assign: got " + std::to_string(values.size()) + " values for " +
                         std::to_string(parameter_count()) + " parameters");
  std::size_t k = 0;
  for (TrainableLayer& l : layers) {
    for (Matrix& p : l.map.params)
      for (double& v : p.entries()) v = values[k++];
    if (l.bias)
      for (double& v : *l.bias) v = values[k++];
  }
}

std::vector<double> TrainableNetwork::pullback(const std::vector<LayerGradient>& grads) const {
  if (grads.size() != layers.size()) throw DimensionError("pullback: layer count mismatch");
  std::vector<double> out;
  out.reserve(parameter_count());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    for (const Matrix& p : layers[i].map.pullback(grads[i].weight))
      out.insert(out.end(), p.entries().begin(), p.entries().end());
    if (layers[i].bias) out.insert(out.end(), grads[i].bias.begin(), grads[i].bias.end());
  }
  return out;
}

TrainableNetwork make_trainable(std::size_t in, std::size_t out, std::size_t hidden_depth,
                                std::size_t width, Activation act, bool bias, const MapSpec& map,
                                Rng& rng) {
  if (in == 0 || out == 0) throw InvalidArgument("make_trainable: dimensions must be positive");
  TrainableNetwork net;
  std::size_t fan_in = in;
  for (std::size_t l = 0; l <= hidden_depth; ++l) {
    const bool last = l == hidden_depth;
    const std::size_t rows = last ? out : width;
    const MapKind kind = map_admits(map.kind, rows, fan_in) ? map.kind : MapKind::kUnstructured;
    TrainableLayer layer;
    layer.map = sample_map(kind, rows, fan_in, map.lambda_min, map.lambda_max, rng);
    if (bias) {
      const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
      Vector b(rows);
      for (double& v : b) v = uniform(rng, -a, a);
      layer.bias = std::move(b);
    }
    if (!last) layer.activation = act;
    net.layers.push_back(std::move(layer));
    fan_in = rows;
  }
  return net;
}

nlohmann::json trainable_to_json(const TrainableNetwork& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const TrainableLayer& l : net.layers) {
    nlohmann::json params = nlohmann::json::array();
    for (const Matrix& p : l.map.params) params.push_back(matrix_to_json(p));
    layers.push_back({{"kind", map_kind_name(l.map.kind)},
                      {"rows", l.map.rows},
                      {"cols", l.map.cols},
                      {"lambda_min", l.map.lambda_min},
                      {"lambda_max", l.map.lambda_max},
                      {"params", std::move(params)},
                      {"bias", l.bias ? nlohmann::json(l.bias->values()) : nlohmann::json(nullptr)},
                      {"activation", l.activation ? nlohmann::json(activation_name(*l.activation))
                                                  : nlohmann::json(nullptr)}});
  }
  return {{"layers", std::move(layers)}};
}

TrainableNetwork trainable_from_json(const nlohmann::json& j) {
  require_known_keys(j, {"layers"}, "trainable network");
  TrainableNetwork net;
  try {
    for (const nlohmann::json& lj : j.at("layers")) {
      require_known_keys(
          lj, {"kind", "rows", "cols", "lambda_min", "lambda_max", "params", "bias", "activation"},
          "trainable layer");
      TrainableLayer l;
      l.map.kind = parse_map_kind(lj.at("kind").get<std::string>());
      l.map.rows = lj.at("rows").get<std::size_t>();
      l.map.cols = lj.at("cols").get<std::size_t>();
      l.map.lambda_min = lj.at("lambda_min").get<double>();
      l.map.lambda_max = lj.at("lambda_max").get<double>();
      for (const nlohmann::json& p : lj.at("params")) l.map.params.push_back(matrix_from_json(p));
      if (!lj.at("bias").is_null()) l.bias = Vector(lj["bias"].get<std::vector<double>>());
      if (!lj.at("activation").is_null())
        l.activation = parse_activation(lj["activation"].get<std::string>());
      net.layers.push_back(std::move(l));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("trainable network: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("trainable network: ") + e.what());
  }
  net.realize();  // validates shapes
  return net;
}

TrainingData training_data(const PlantDataset& d) {
  TrainingData t;
  for (std::size_t s = 0; s < 3; ++s) {
    t.states[s] = d.split_states(s);
    t.inputs[s] = d.split_inputs(s);
  }
  return t;
}

nlohmann::json train_report_to_json(const TrainReport& r) {
  nlohmann::json hist = nlohmann::json::array();
  for (const EpochRecord& e : r.history) {
    nlohmann::json row{{"epoch", e.epoch},
                       {"train_loss", finite_or_null(e.train_loss)},
                       {"dev_loss", finite_or_null(e.dev_loss)}};
    if (e.penalty) row["dissipativity_penalty"] = *e.penalty;
    hist.push_back(std::move(row));
  }
  return {{"initial_train_loss", finite_or_null(r.initial_train_loss)},
          {"initial_dev_loss", finite_or_null(r.initial_dev_loss)},
          {"initial_test_loss", finite_or_null(r.initial_test_loss)},
          {"best_epoch", r.best_epoch},
          {"best_dev_loss", finite_or_null(r.best_dev_loss)},
          {"test_loss", finite_or_null(r.test_loss)},
          {"parameter_count", r.parameter_count},
          {"history", std::move(hist)}};
}

namespace {

TrainReport train_report_from_json(const nlohmann::json& j) {
  TrainReport r;
  r.initial_train_loss = finite_or_inf(j.at("initial_train_loss"));
  r.initial_dev_loss = finite_or_inf(j.at("initial_dev_loss"));
  r.initial_test_loss = finite_or_inf(j.at("initial_test_loss"));
  r.best_epoch = j.at("best_epoch").get<std::size_t>();
  r.best_dev_loss = finite_or_inf(j.at("best_dev_loss"));
  r.test_loss = finite_or_inf(j.at("test_loss"));
  r.parameter_count = j.at("parameter_count").get<std::size_t>();
  for (const nlohmann::json& e : j.at("history")) {
    EpochRecord rec;
    rec.epoch = e.at("epoch").get<std::size_t>();
    rec.train_loss = finite_or_inf(e.at("train_loss"));
    rec.dev_loss = finite_or_inf(e.at("dev_loss"));
    if (e.contains("dissipativity_penalty")) rec.penalty = e["dissipativity_penalty"].get<double>();
    r.history.push_back(rec);
  }
  return r;
}

double safe_mse(const BlockSSM& model, const std::vector<Vector>& states,
                const std::vector<Vector>& inputs) {
  const double v = open_loop_mse(model, states, inputs);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

void check_data(const TrainingData& data, const TrainConfig& config) {
  static const char* names[3] = {"train", "dev", "test"};
  for (std::size_t s = 0; s < 3; ++s) {
    if (data.states[s].size() < 2 || data.inputs[s].size() < data.states[s].size() - 1)
      throw DimensionError(std::string(names[s]) + " split is too short");
  }
  if (data.states[0].size() < config.horizon + 1)
    throw ConfigError("training.horizon " + std::to_string(config.horizon) +
                      " exceeds the train split");
}

}  // namespace

nlohmann::json train_state_to_json(const TrainState& s) {
  return {{"f", trainable_to_json(s.f)},
          {"g", trainable_to_json(s.g)},
          {"best_f", trainable_to_json(s.best_f)},
          {"best_g", trainable_to_json(s.best_g)},
          {"m", s.m},
          {"v", s.v},
          {"step", s.step},
          {"epoch", s.epoch},
          {"rng", s.rng_state},
          {"report", train_report_to_json(s.report)}};
}

TrainState train_state_from_json(const nlohmann::json& j) {
  require_known_keys(j, {"f", "g", "best_f", "best_g", "m", "v", "step", "epoch", "rng", "report"},
                     "train state");
  TrainState s;
  try {
    s.f = trainable_from_json(j.at("f"));
    s.g = trainable_from_json(j.at("g"));
    s.best_f = trainable_from_json(j.at("best_f"));
    s.best_g = trainable_from_json(j.at("best_g"));
    s.m = j.at("m").get<std::vector<double>>();
    s.v = j.at("v").get<std::vector<double>>();
    s.step = j.at("step").get<std::size_t>();
    s.epoch = j.at("epoch").get<std::size_t>();
    s.rng_state = j.at("rng").get<std::string>();
    s.report = train_report_from_json(j.at("report"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train state: ") + e.what());
  }
  const std::size_t n = s.f.parameter_count() + s.g.parameter_count();
  if (s.m.size() != n || s.v.size() != n)
    throw ConfigError("train state: optimiser moments do not match the parameter count");
  rng_from_string(s.rng_state);
  return s;
}

TrainState init_train_state(const TrainingData& data, const TrainConfig& config) {
  config.validate();
  check_data(data, config);
  const std::size_t nx = data.states[0].front().size();
  const std::size_t nu = data.inputs[0].front().size();
  TrainState s;
  Rng f_rng(stable_hash("f_net", config.seed));
  Rng g_rng(stable_hash("g_net", config.seed));
  s.f = make_trainable(nx, nx, config.hidden_depth, config.hidden_width, config.activation,
                       config.bias, config.f_map, f_rng);
  s.g = make_trainable(nu, nx, config.hidden_depth, config.hidden_width, config.activation,
                       config.bias, MapSpec{}, g_rng);
  s.best_f = s.f;
  s.best_g = s.g;
  const std::size_t n = s.f.parameter_count() + s.g.parameter_count();
  s.m.assign(n, 0.0);
  s.v.assign(n, 0.0);
  s.rng_state = rng_to_string(Rng(stable_hash("shuffle", config.seed)));
  const BlockSSM model{s.f.realize(), s.g.realize()};
  model.validate();
  s.report.parameter_count = n;
  s.report.initial_train_loss = safe_mse(model, data.states[0], data.inputs[0]);
  s.report.initial_dev_loss = safe_mse(model, data.states[1], data.inputs[1]);
  s.report.initial_test_loss = safe_mse(model, data.states[2], data.inputs[2]);
  s.report.best_dev_loss = s.report.initial_dev_loss;
  s.report.test_loss = s.report.initial_test_loss;
  return s;
}

void train(TrainState& st, const TrainingData& data, const TrainConfig& config,
           const std::function<void(const TrainState&)>& on_epoch) {
  config.validate();
  check_data(data, config);
  Rng rng = rng_from_string(st.rng_state);
  const std::vector<Vector>& xs = data.states[0];
  const std::vector<Vector>& us = data.inputs[0];
  const std::size_t nx = xs.front().size();
  const std::size_t nf = st.f.parameter_count();
  std::vector<std::size_t> starts(xs.size() - config.horizon);
  const Regularizers& reg = config.regularizers;

  while (st.epoch < config.epochs) {
    // Each epoch permutes the identity so a resumed run reproduces the order.
    std::iota(starts.begin(), starts.end(), std::size_t{0});
    std::shuffle(starts.begin(), starts.end(), rng);
    double epoch_loss = 0.0;
    double epoch_penalty = 0.0;
    std::size_t batches = 0;
    for (std::size_t b0 = 0; b0 < starts.size(); b0 += config.batch, ++batches) {
      const std::size_t b1 = std::min(starts.size(), b0 + config.batch);
      const BlockSSM model{st.f.realize(), st.g.realize()};
      GradientTape tape = GradientTape::zeros_like(model);
      const double w = 1.0 / static_cast<double>(b1 - b0);
      for (std::size_t i = b0; i < b1; ++i) {
        const std::size_t s = starts[i];
        tape.accumulate(backward(model, std::span(xs).subspan(s, config.horizon + 1),
                                 std::span(us).subspan(s, config.horizon), config.horizon),
                        w);
      }
      if (!std::isfinite(tape.loss))
        throw NumericError("training loss became non-finite at epoch " +
                           std::to_string(st.epoch + 1) + ", batch " +
                           std::to_string(batches + 1) + " (window starts " +
                           std::to_string(starts[b0]) + ".." + std::to_string(starts[b1 - 1]) +
                           "); lower the learning rate or add regularisation");
      epoch_loss += tape.loss;

      for (std::size_t l = 0; l < model.f_net.depth(); ++l)
        weight_regularizers(model.f_net.layer(l).weight, reg, &tape.f[l].weight);
      if (reg.dissipativity > 0.0) {
        double pen = 0.0;
        const double k = static_cast<double>(reg.dissipativity_anchors);
        for (std::size_t a = 0; a < reg.dissipativity_anchors; ++a) {
          Vector x(nx);
          for (double& v : x) v = uniform(rng, -1.0, 1.0);
          double a_norm = 0.0;
          const std::vector<Matrix> g = spectral_norm_gradient(model.f_net, x, &a_norm);
          pen += std::max(1.0, a_norm) / k;
          if (a_norm > 1.0)
            for (std::size_t l = 0; l < g.size(); ++l)
              for (std::size_t i = 0; i < g[l].entries().size(); ++i)
                tape.f[l].weight.entries()[i] += reg.dissipativity / k * g[l].entries()[i];
        }
        epoch_penalty += pen;
      }

      std::vector<double> grad = st.f.pullback(tape.f);
      const std::vector<double> gg = st.g.pullback(tape.g);
      grad.insert(grad.end(), gg.begin(), gg.end());
      if (!all_finite(grad))
        throw NumericError("training gradient became non-finite at epoch " +
                           std::to_string(st.epoch + 1) + ", batch " + std::to_string(batches + 1));
      std::vector<double> params = st.f.flatten();
      const std::vector<double> gp = st.g.flatten();
      params.insert(params.end(), gp.begin(), gp.end());
      adam_or_sgd(config, st, params, grad);
      st.f.assign(std::span<const double>(params).first(nf));
      st.g.assign(std::span<const double>(params).subspan(nf));
    }

    ++st.epoch;
    const BlockSSM model{st.f.realize(), st.g.realize()};
    EpochRecord rec;
    rec.epoch = st.epoch;
    rec.train_loss = epoch_loss / static_cast<double>(batches);
    rec.dev_loss = safe_mse(model, data.states[1], data.inputs[1]);
    if (reg.dissipativity > 0.0) rec.penalty = epoch_penalty / static_cast<double>(batches);
    st.report.history.push_back(rec);
    if (rec.dev_loss < st.report.best_dev_loss) {
      st.report.best_dev_loss = rec.dev_loss;
      st.report.best_epoch = st.epoch;
      st.best_f = st.f;
      st.best_g = st.g;
      st.report.test_loss = safe_mse(model, data.states[2], data.inputs[2]);
    }
    st.rng_state = rng_to_string(rng);
    if (on_epoch) on_epoch(st);
  }
}

BlockSSM selected_model(const TrainState& state) {
  BlockSSM m{state.best_f.realize(), state.best_g.realize()};
  m.validate();
  return m;
}

}  // namespace neurodissip
