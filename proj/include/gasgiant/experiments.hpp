#pragma once

#include <map>
#include <string>
#include <vector>

#include "gasgiant/xray.hpp"

namespace gasgiant {

/// Scalar integrand from the JSON document
/// {kind: "bump"|"poly"|"tabulated", vanishing_order, params}.
///  - bump: params {x_center, x_width, y_center, y_width, amplitude};
///    cubic B-spline bump in x times a periodic B-spline bump in y.
///  - poly: params {coeffs, cos, sin}; x^order * poly(x) * trigonometric
///    factor (1 + sum_k cos_k cos(2 pi k y) + sin_k sin(2 pi k y)).
///  - tabulated: params {x_grid, y_grid, values}; cubic interpolation of the
///    raw values (the declared order is metadata, not enforced).
ScalarField field_from_json(const std::string& json_text);
ScalarField field_from_json_file(const std::string& path);

/// Declarative description of one experiment run. `kind` selects the
/// procedure; ladders/params/tolerances carry the kind-specific knobs with
/// sensible defaults for anything omitted. Outputs land in output_dir as
/// <name>.csv, <name>.summary.json, <name>.log.
struct ExperimentConfig {
  std::string kind;
  std::string name;         // defaults to kind
  std::string metric_path;  // empty => flat metric from params alpha/dim/x_max
  std::map<std::string, std::vector<double>> ladders;
  std::map<std::string, double> params;
  std::map<std::string, double> tolerances;
  std::string output_dir = ".";
  unsigned seed = 1;
};

/// Parse one config object. The environment variable GEO_SEED, when set,
/// overrides the config seed.
ExperimentConfig experiment_config_from_json(const std::string& json_text);

/// Parse a config file holding either a single config object or
/// {"experiments": [...]} with shared top-level defaults.
std::vector<ExperimentConfig> experiment_batch_from_json_file(
    const std::string& path);

struct ExperimentReport {
  std::string name;
  std::string kind;
  bool pass = false;
  bool failed_to_run = false;  // a module error was captured
  std::string message;         // captured error text, empty otherwise
  std::map<std::string, double> fitted_values;
  std::map<std::string, double> expected_values;
  std::string csv_path, summary_path, log_path;
};

/// Validate the config (throws std::invalid_argument before any compute on
/// empty ladders, unknown kinds, or missing metric files), then execute the
/// experiment and write its three report files. Module errors during the run
/// are captured into the report instead of propagating.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Run a batch, up to `jobs` experiments concurrently (each writes only its
/// own files). Order of the returned reports matches the config order.
std::vector<ExperimentReport> run_experiments(
    const std::vector<ExperimentConfig>& configs, int jobs = 1);

/// CI contract: 0 all pass, 2 any FAIL or captured error.
int batch_exit_code(const std::vector<ExperimentReport>& reports);

}  // namespace gasgiant
