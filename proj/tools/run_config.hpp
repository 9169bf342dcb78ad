// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The chanpred Authors

// Flat `key = value` run configuration shared by the CLI subcommands.

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace chanpred::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::uint32_t mo = 19;
  std::uint32_t np = 1;
  double ts_s = 5e-4;
  double fc_hz = 3.5e9;
  double velocity_min_mps = 3.0 / 3.6;
  double velocity_max_mps = 100.0 / 3.6;
  std::uint32_t n_paths = 64;
  std::uint64_t j_train = 150000;
  std::uint64_t t_test = 10000;
  std::uint32_t k = 128;
  std::string structure = "full";
  std::vector<double> snr_grid = {-10, -5, 0, 5, 10, 15, 20, 25, 30};
  double snr_db = 20.0;
  std::uint32_t ell = 1;
  std::vector<std::uint32_t> ell_grid;  // empty: 1..np
  std::vector<std::uint32_t> k_grid = {2, 8, 16, 32, 64, 128};
  std::uint64_t seed = 0;
  std::uint32_t max_iter = 500;
  double tol_rel = 1e-6;
  double min_weight = 1e-6;
  double reg_covar = 1e-6;
  std::uint32_t bootstrap = 200;
  std::string methods;  // empty: all standard methods
  std::string dataset = "dataset.cpd";
  std::string model = "model.cpgmm";
  std::string report = "report.csv";
  std::string cache_dir;
  std::uint32_t threads = 0;

  std::vector<std::uint32_t> effective_ell_grid() const;
};

/// Sets one key from its textual value; throws ConfigError for unknown keys
/// or unparsable values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Applies "key=value" (as given to --set).
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Reads a config file on top of the defaults. Blank lines and lines starting
/// with '#' are ignored; a key may appear only once.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text);

void validate(const RunConfig& cfg);

/// Canonical text form, one `key = value` line per setting.
std::string to_text(const RunConfig& cfg);

}  // namespace chanpred::cli
