#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "spectra/model.hpp"
#include "spectra/walk.hpp"

namespace spectra {

using nlohmann::json;

/// One experiment run: model and walk parameters, trial count, parallelism,
/// output directory, and a free-form constants-override table that is
/// logged into every output file's metadata block.
struct ExperimentConfig {
  std::string experiment;
  ModelParams model{600, 4.0, 6, 1};
  Complex z{1.0, 1.0};
  double k_eps = 0.01;
  double c_cfg = 5.0;
  double eps_cfg = 0.1;
  int stride = 1;
  double tau_z = 0.0;
  int trials = 10;
  int jobs = 1;
  std::string out_dir = "out";
  json overrides = json::object();

  static ExperimentConfig defaults_for(const std::string& experiment);
  /// Throws invalid_parameter with a field diagnostic on schema violations.
  static ExperimentConfig from_json(const json& j);
  json to_json() const;
  std::string config_hash() const;
};

inline constexpr const char* kExperiments[] = {
    "spectrum",  "logpot",   "moments",     "walk",
    "expansion", "anticonc", "subcritical", "verify-linear-algebra"};

/// Dispatches the experiment, writes CSV/JSON (and SVG for `spectrum`)
/// artifacts plus a manifest.json into the output directory.
/// Exit status: 0 success, 2 assertion-suite failure, 3 resource limit.
int run_experiment(const ExperimentConfig& config);

/// Re-runs the manifest's embedded config into a scratch directory and
/// compares the regenerated artifacts byte for byte.
/// Exit status: 0 identical, 4 version mismatch, 5 differences found.
int replay(const std::string& manifest_path, int jobs_override = 0);

/// FNV-1a digest of a file's bytes, hex-encoded; empty string if unreadable.
std::string file_digest(const std::string& path);

/// Canonical float formatting used in all CSV output (%.17g, C locale).
std::string format_double(double v);

}  // namespace spectra
