// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "neurodissip/neurodissip.h"

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> assignments;
  std::size_t threads = 0;
  std::string out_dir = "run";
  bool assert_certificate = false;
  bool print_summary = false;
};

struct Command {
  const char* name;
  const char* help;
};

constexpr Command kCommands[] = {
    {"pwa", "Pointwise-affine form of the network at analysis.x0"},
    {"grid", "Dissipativity map over the analysis grid"},
    {"spectra", "Eigenvalues of A* over anchors, per depth"},
    {"rollout", "Trajectory of the autonomous map from analysis.x0"},
    {"basin", "Basins of attraction over the basin grid"},
    {"simulate", "Simulate the plant and write its dataset"},
    {"train", "Train a block state-space model on plant data"},
    {"certify", "Layerwise and sampled dissipativity certificate"},
    {"sweep", "Run the certificate over the configured sweep"},
    {"gen-weights", "Generate one structured weight matrix and check its guarantee"},
};

int report_error(nd_status s) {
  std::fprintf(stderr, "error (%s): %s\n", nd_status_name(s), nd_last_error());
  return 1;
}

int run(const std::string& command, const Options& opt) {
  nd_config* cfg = nullptr;
  nd_status s = opt.config_path.empty() ? nd_config_new(&cfg)
                                        : nd_config_from_file(opt.config_path.c_str(), &cfg);
  if (s != ND_OK) return report_error(s);

  std::vector<std::string> keys;
  std::vector<std::string> values;
  for (const std::string& a : opt.assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "error (config): --set expects key=value, got '%s'\n", a.c_str());
      nd_config_free(cfg);
      return 1;
    }
    keys.push_back(a.substr(0, eq));
    values.push_back(a.substr(eq + 1));
  }
  if (opt.assert_certificate) {
    keys.emplace_back("certify.assert");
    values.emplace_back("true");
  }
  std::vector<const char*> key_ptrs;
  std::vector<const char*> value_ptrs;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    key_ptrs.push_back(keys[i].c_str());
    value_ptrs.push_back(values[i].c_str());
  }
  s = nd_config_set_many(cfg, key_ptrs.data(), value_ptrs.data(), keys.size());
  if (s != ND_OK) {
    nd_config_free(cfg);
    return report_error(s);
  }

  int exit_code = 0;
  char* summary = nullptr;
  s = nd_run_command(cfg, command.c_str(), opt.out_dir.c_str(), opt.threads, &exit_code,
                     &summary);
  nd_config_free(cfg);
  if (s != ND_OK) return report_error(s);
  if (opt.print_summary) {
    std::printf("%s\n", summary);
  } else {
    std::printf("%s\n", nlohmann::json::parse(summary).value("message", "").c_str());
  }
  nd_string_free(summary);
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neurodissip: neural networks as discrete-time dynamical systems"};
  app.set_version_flag("--version", nd_version());
  app.require_subcommand(1);

  Options opt;
  std::string chosen;
  for (const Command& c : kCommands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", opt.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--set", opt.assignments, "Override a dotted config key, e.g. network.depth=8")
        ->allow_extra_args(false);
    sub->add_option("--threads", opt.threads, "Worker threads (default NEURODISSIP_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", opt.out_dir, "Run directory for the fixed-name outputs")
        ->capture_default_str();
    sub->add_flag("--json", opt.print_summary, "Print the JSON summary instead of one line");
    if (std::string(c.name) == "certify")
      sub->add_flag("--assert", opt.assert_certificate, "Exit 2 unless the network is certified");
    sub->callback([&chosen, name = c.name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return run(chosen, opt);
}
