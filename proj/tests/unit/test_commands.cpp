// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#include <doctest.h>

#include <filesystem>

#include "neurodissip/commands.hpp"
#include "neurodissip/errors.hpp"
#include "neurodissip/io.hpp"

using namespace neurodissip;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("neurodissip_test_commands") / name;
  fs::remove_all(p);
  return p.string();
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.analysis.grid = {-2, 2, -2, 2, 12, 12};
  c.analysis.basin = {-2, 2, -2, 2, 6, 6};
  c.analysis.rollout_steps = 200;
  c.analysis.spectra_resolution = 5;
  return c;
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char ch : text) n += ch == '\n';
  return n;
}

}  // namespace

TEST_CASE("every command name is dispatched") {
  CHECK(command_names().size() == 10);
  CHECK_THROWS_AS(run_command(small_config(), "plot", scratch("unknown"), 1), InvalidArgument);
}

TEST_CASE("network commands write their fixed-name files") {
  const ExperimentConfig c = small_config();
  const std::vector<std::pair<std::string, std::vector<std::string>>> expected{
      {"pwa", {"pwa.json"}},
      {"grid", {"grid.csv", "grid.json"}},
      {"spectra", {"eigenvalues.csv", "histogram.csv", "spectra.json"}},
      {"rollout", {"trajectory.csv", "rollout.json"}},
      {"basin", {"basin.csv", "basin.json"}},
      {"certify", {"certificate.json"}},
  };
  for (const auto& [cmd, files] : expected) {
    CAPTURE(cmd);
    const std::string out = scratch(cmd);
    const CommandResult r = run_command(c, cmd, out, 1);
    CHECK(r.exit_code == 0);
    CHECK_FALSE(r.message.empty());
    CHECK(fs::exists(join_path(out, "config.json")));
    CHECK(fs::exists(join_path(out, "network.json")));
    for (const std::string& f : files) CHECK(fs::exists(join_path(out, f)));
    CHECK(config_to_json(load_config(join_path(out, "config.json"))) == config_to_json(c));
  }
}

TEST_CASE("reruns produce byte-identical outputs") {
  const ExperimentConfig c = small_config();
  for (const std::string cmd : {"grid", "basin", "certify", "spectra"}) {
    CAPTURE(cmd);
    const std::string a = scratch(cmd + "_a");
    const std::string b = scratch(cmd + "_b");
    run_command(c, cmd, a, 1);
    run_command(c, cmd, b, 2);
    for (const auto& entry : fs::directory_iterator(a)) {
      const std::string name = entry.path().filename().string();
      CAPTURE(name);
      CHECK(read_text_file(entry.path().string()) == read_text_file(join_path(b, name)));
    }
  }
}

TEST_CASE("grid CSV has one row per cell") {
  const std::string out = scratch("grid_rows");
  run_command(small_config(), "grid", out, 1);
  CHECK(line_count(read_text_file(join_path(out, "grid.csv"))) == 1 + 144);
}

TEST_CASE("pwa reports a tiny residual") {
  const std::string out = scratch("pwa_residual");
  const CommandResult r = run_command(small_config(), "pwa", out, 1);
  CHECK(r.summary["relative_residual"].get<double>() <= kPwaResidualLimit);
  const json j = read_json_file(join_path(out, "pwa.json"));
  CHECK(j["passed"] == true);
}

TEST_CASE("certify verdicts and assert mode") {
  ExperimentConfig c = small_config();
  CommandResult r = run_command(c, "certify", scratch("cert_stable"), 1);
  CHECK(r.summary["verdict"] == "GLOBAL (layerwise)");

  c.map = {MapKind::kGershgorinComplex, 1.1, 1.5};
  c.network.activation = Activation::kRelu;
  c.certify_assert = false;
  r = run_command(c, "certify", scratch("cert_unstable"), 1);
  CHECK(r.exit_code == 0);
  CHECK(r.summary["verdict"] == "NOT CERTIFIED");
  CHECK(r.message.find("worst cell") != std::string::npos);
  c.certify_assert = true;
  CHECK(run_command(c, "certify", scratch("cert_assert"), 1).exit_code == 2);
}

TEST_CASE("sweep writes one report and one aggregate row per configuration") {
  ExperimentConfig c = small_config();
  c.sweep.maps = {{MapKind::kGershgorinReal, {{0.0, 1.0}, {1.1, 1.5}}}, {MapKind::kUnstructured, {{0, 0}}}};
  c.sweep.depths = {1, 4};
  c.sweep.activations = {Activation::kRelu};
  c.sweep.bias = {true};
  const std::string out = scratch("sweep");
  const CommandResult r = run_command(c, "sweep", out, 2);
  CHECK(r.summary["configurations"] == 6);
  CHECK(line_count(read_text_file(join_path(out, "aggregate.csv"))) == 1 + 6);
  std::size_t reports = 0;
  for (const auto& e : fs::directory_iterator(join_path(out, "reports"))) reports += e.is_regular_file();
  CHECK(reports == 6);

  const std::string again = scratch("sweep_again");
  run_command(c, "sweep", again, 1);
  CHECK(read_text_file(join_path(out, "aggregate.csv")) ==
        read_text_file(join_path(again, "aggregate.csv")));
}

TEST_CASE("gen-weights checks the guarantee") {
  ExperimentConfig c = small_config();
  c.network.state_dim = 5;
  c.map = {MapKind::kSpectralSvd, 0.5, 0.9};
  const std::string out = scratch("weights");
  const CommandResult r = run_command(c, "gen-weights", out, 1);
  CHECK(r.exit_code == 0);
  const json rep = read_json_file(join_path(out, "weights_report.json"));
  CHECK(rep["passed"] == true);
  CHECK(rep["spectral_norm"].get<double>() <= 0.9 + 1e-8);
  CHECK(read_json_file(join_path(out, "weights.json"))["rows"] == 5);
}

TEST_CASE("simulate then train from the saved dataset") {
  ExperimentConfig c = small_config();
  c.plant.steps = 300;
  c.plant.splits = {100, 100, 100};
  const std::string data = scratch("sim");
  run_command(c, "simulate", data, 1);
  CHECK(fs::exists(join_path(data, "data.csv")));
  CHECK(fs::exists(join_path(data, "data.json")));

  c.dataset = data;
  c.training.epochs = 2;
  c.training.batch = 8;
  c.training.horizon = 8;
  c.training.hidden_width = 4;
  const std::string out = scratch("train");
  const CommandResult r = run_command(c, "train", out, 1);
  CHECK(r.exit_code == 0);
  for (const char* f : {"state.json", "f_net.json", "g_net.json", "report.json"})
    CHECK(fs::exists(join_path(out, f)));
  const json rep = read_json_file(join_path(out, "report.json"));
  CHECK(rep["history"].size() == 2);

  // Resuming with a larger budget continues from the checkpoint.
  c.resume = true;
  c.training.epochs = 3;
  run_command(c, "train", out, 1);
  CHECK(read_json_file(join_path(out, "report.json"))["history"].size() == 3);
}
