#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fpif/drift.hpp"
#include "fpif/grid.hpp"
#include "fpif/particle.hpp"

namespace fpif {

/// Fully resolved experiment description. parse_config fills every default
/// and validates cross-field constraints before any run starts; serializing
/// the result back is the single source of truth for defaults.
struct ExperimentConfig {
  // drift
  DriftKind drift_kind = DriftKind::Quadratic;
  double x0 = -1.0;
  double h0 = 0.0;
  double x1 = 1.0;

  // grid (extents are minimum coverage; cells are centered so 0 is a center)
  double x_min = -8.0;
  double x_max = 18.0;
  double dx = 0.01;

  // truncation
  double R = 10.0;
  double alpha_R = 1000.0;  // default R^3 when absent

  // time stepping
  double dt = 1e-3;
  double t_end = 10.0;
  double snapshot_every = 0.5;

  // initial data
  std::string initial_kind = "gaussian";  // gaussian | steady | point | file
  double initial_center = -3.0;
  double initial_sigma = 0.3;
  std::string initial_path;

  // particles
  SdeConfig particles;

  // diagnostics
  std::vector<std::string> entropy_kinds = {"Square", "Abs"};
  std::vector<double> probes = {4.0, 6.0, 8.0};
  std::optional<std::pair<double, double>> rate_window;  // default [t_end/4, t_end]

  uint64_t seed = 12345;

  DriftSpec drift() const;
  Grid make_grid() const;
  std::pair<double, double> effective_rate_window() const;

  std::string to_json() const;         // canonical resolved form
  std::string canonical_hash() const;  // hash of the resolved form
};

/// Parse and validate a config JSON text. Unknown keys anywhere are an
/// error; constraint violations name the violated constraint.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace fpif
