// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The neurodissip Authors

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "neurodissip/dissipativity.hpp"
#include "neurodissip/experiment.hpp"

namespace neurodissip {

inline constexpr double kPwaResidualLimit = 1e-6;

struct CommandResult {
  int exit_code = 0;     // 0 success, 2 certificate failed in assert mode
  nlohmann::json summary;
  std::string message;   // one-line human summary
};

/// pwa, grid, spectra, rollout, basin, simulate, train, certify, sweep, gen-weights.
std::span<const std::string_view> command_names();

/// Runs one command, writing its fixed-name outputs under out_dir.
/// threads = 0 resolves through NEURODISSIP_THREADS and the hardware.
CommandResult run_command(const ExperimentConfig& config, std::string_view command,
                          const std::string& out_dir, std::size_t threads = 0);

enum class CertificateVerdict { kGlobal, kRegional, kNotCertified };
std::string_view verdict_label(CertificateVerdict v);

struct CertificateReport {
  CertificateVerdict verdict = CertificateVerdict::kNotCertified;
  LayerwiseCertificate layerwise;
  GridAnalysis grid;                  // cells only for 2-D states
  std::vector<PointVerdict> anchors;  // Latin-hypercube verdicts otherwise
  nlohmann::json fixed_points;        // equilibrium bounds at detected fixed points
};

/// Layerwise check, then the sampled grid, then fixed-point bounds.
CertificateReport certify_network(const MlpNetwork& net, const ExperimentConfig& config,
                                  std::size_t threads, bool with_fixed_points = true);
nlohmann::json certificate_to_json(const CertificateReport& r, bool with_cells = false);

}  // namespace neurodissip
