// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#include "neurodissip/neurodissip.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "neurodissip/commands.hpp"
#include "neurodissip/errors.hpp"
#include "neurodissip/experiment.hpp"
#include "neurodissip/io.hpp"
#include "neurodissip/pwa.hpp"

struct nd_config {
  nlohmann::json doc;  // as supplied, before defaults
  neurodissip::ExperimentConfig config;
};

struct nd_network {
  neurodissip::MlpNetwork net;
};

namespace {

thread_local std::string g_last_error;

nd_status fail(nd_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class Fn>
nd_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return ND_OK;
  } catch (const neurodissip::Error& e) {
    const int code = static_cast<int>(e.code());
    return fail(static_cast<nd_status>(code), e.what());
  } catch (const std::bad_alloc&) {
    return fail(ND_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ND_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ND_ERR_INTERNAL, "unknown error");
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw neurodissip::InvalidArgument(what);
}

}  // namespace

extern "C" {

const char* nd_version(void) { return "0.1.0"; }

const char* nd_status_name(nd_status status) {
  switch (status) {
    case ND_OK: return "ok";
    case ND_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case ND_ERR_DIMENSION: return "dimension_mismatch";
    case ND_ERR_CONVERGENCE: return "convergence";
    case ND_ERR_SINGULAR: return "singular_matrix";
    case ND_ERR_CONFIG: return "config";
    case ND_ERR_IO: return "io";
    case ND_ERR_NUMERIC: return "numeric";
    case ND_ERR_DEGENERATE: return "degenerate";
    case ND_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* nd_last_error(void) { return g_last_error.c_str(); }

void nd_string_free(char* s) { std::free(s); }

nd_status nd_config_new(nd_config** out) {
  return guarded([&] {
    require(out != nullptr, "nd_config_new: out is null");
    *out = new nd_config{nlohmann::json::object(), {}};
  });
}

nd_status nd_config_from_json(const char* json, nd_config** out) {
  return guarded([&] {
    require(json != nullptr && out != nullptr, "nd_config_from_json: null argument");
    nlohmann::json doc = nlohmann::json::parse(json, nullptr, false);
    if (doc.is_discarded()) throw neurodissip::ConfigError("config is not valid JSON");
    neurodissip::ExperimentConfig c = neurodissip::config_from_json(doc);
    *out = new nd_config{std::move(doc), std::move(c)};
  });
}

nd_status nd_config_from_file(const char* path, nd_config** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "nd_config_from_file: null argument");
    nlohmann::json doc = neurodissip::read_json_file(path);
    try {
      neurodissip::ExperimentConfig c = neurodissip::config_from_json(doc);
      *out = new nd_config{std::move(doc), std::move(c)};
    } catch (const neurodissip::ConfigError& e) {
      throw neurodissip::ConfigError(std::string("'") + path + "': " + e.what());
    }
  });
}

nd_status nd_config_set(nd_config* config, const char* key, const char* value) {
  return nd_config_set_many(config, &key, &value, 1);
}

nd_status nd_config_set_many(nd_config* config, const char* const* keys,
                             const char* const* values, size_t count) {
  return guarded([&] {
    require(config != nullptr && (count == 0 || (keys != nullptr && values != nullptr)),
            "nd_config_set_many: null argument");
    nlohmann::json doc = config->doc;
    std::string applied;
    for (size_t i = 0; i < count; ++i) {
      require(keys[i] != nullptr && values[i] != nullptr, "nd_config_set_many: null key or value");
      neurodissip::apply_override(doc, keys[i], values[i]);
      applied += (applied.empty() ? "" : ", ") + std::string(keys[i]);
    }
    try {
      config->config = neurodissip::config_from_json(doc);
    } catch (const neurodissip::ConfigError& e) {
      throw neurodissip::ConfigError("--set " + applied + ": " + e.what());
    }
    config->doc = std::move(doc);
  });
}

nd_status nd_config_to_json(const nd_config* config, char** out_json) {
  return guarded([&] {
    require(config != nullptr && out_json != nullptr, "nd_config_to_json: null argument");
    *out_json = duplicate(neurodissip::config_to_json(config->config).dump(2));
  });
}

void nd_config_free(nd_config* config) { delete config; }

nd_status nd_network_build(const nd_config* config, nd_network** out) {
  return guarded([&] {
    require(config != nullptr && out != nullptr, "nd_network_build: null argument");
    *out = new nd_network{neurodissip::config_network(config->config)};
  });
}

nd_status nd_network_load(const char* path, nd_network** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "nd_network_load: null argument");
    *out = new nd_network{neurodissip::load_network(path)};
  });
}

nd_status nd_network_to_json(const nd_network* net, char** out_json) {
  return guarded([&] {
    require(net != nullptr && out_json != nullptr, "nd_network_to_json: null argument");
    *out_json = duplicate(neurodissip::network_to_json(net->net).dump(2));
  });
}

void nd_network_free(nd_network* net) { delete net; }

size_t nd_network_input_dim(const nd_network* net) { return net ? net->net.input_dim() : 0; }

size_t nd_network_output_dim(const nd_network* net) { return net ? net->net.output_dim() : 0; }

nd_status nd_network_evaluate(const nd_network* net, const double* x, size_t n, double* y,
                              size_t m) {
  return guarded([&] {
    require(net != nullptr && x != nullptr && y != nullptr, "nd_network_evaluate: null argument");
    if (n != net->net.input_dim() || m != net->net.output_dim())
      throw neurodissip::DimensionError("nd_network_evaluate: buffers of " + std::to_string(n) +
                                        " and " + std::to_string(m) + " for network " +
                                        std::to_string(net->net.input_dim()) + " -> " +
                                        std::to_string(net->net.output_dim()));
    const neurodissip::Vector out = net->net.evaluate(neurodissip::Vector(std::vector<double>(x, x + n)));
    std::memcpy(y, out.data(), m * sizeof(double));
  });
}

nd_status nd_network_pwa(const nd_network* net, const double* x, size_t n, double* a_star,
                         double* b_star) {
  return guarded([&] {
    require(net != nullptr && x != nullptr && a_star != nullptr && b_star != nullptr,
            "nd_network_pwa: null argument");
    if (n != net->net.input_dim())
      throw neurodissip::DimensionError("nd_network_pwa: x has " + std::to_string(n) +
                                        " entries, network input dim is " +
                                        std::to_string(net->net.input_dim()));
    const neurodissip::PwaForm f =
        neurodissip::extract_pwa(net->net, neurodissip::Vector(std::vector<double>(x, x + n)));
    std::memcpy(a_star, f.a_star.entries().data(), f.a_star.entries().size() * sizeof(double));
    std::memcpy(b_star, f.b_star.data(), f.b_star.size() * sizeof(double));
  });
}

nd_status nd_network_a_norm(const nd_network* net, const double* x, size_t n, double* a_norm) {
  return guarded([&] {
    require(net != nullptr && x != nullptr && a_norm != nullptr, "nd_network_a_norm: null argument");
    if (n != net->net.input_dim())
      throw neurodissip::DimensionError("nd_network_a_norm: x has " + std::to_string(n) +
                                        " entries, network input dim is " +
                                        std::to_string(net->net.input_dim()));
    *a_norm = neurodissip::a_norm_at(net->net, neurodissip::Vector(std::vector<double>(x, x + n)));
  });
}

nd_status nd_run_command(const nd_config* config, const char* command, const char* out_dir,
                         size_t threads, int* exit_code, char** summary) {
  return guarded([&] {
    require(config != nullptr && command != nullptr && out_dir != nullptr,
            "nd_run_command: null argument");
    const neurodissip::CommandResult r =
        neurodissip::run_command(config->config, command, out_dir, threads);
    if (exit_code) *exit_code = r.exit_code;
    if (summary)
      *summary = duplicate(nlohmann::json{{"command", command},
                                          {"exit_code", r.exit_code},
                                          {"message", r.message},
                                          {"result", r.summary}}
                               .dump(2));
  });
}

const char* nd_command_names(void) {
  static const std::string names = [] {
    std::string s;
    for (std::string_view c : neurodissip::command_names()) s += (s.empty() ? "" : ",") + std::string(c);
    return s;
  }();
  return names.c_str();
}

}  // extern "C"
