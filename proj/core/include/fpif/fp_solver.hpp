#pragma once

#include <utility>
#include <vector>

#include "fpif/drift.hpp"
#include "fpif/grid.hpp"
#include "fpif/steady_state.hpp"

namespace fpif {

/// Cell-averaged density on a Grid at one simulation time.
struct DensityField {
  std::vector<double> cells;
  double time = 0.0;
};

/// Time series produced by evolve(): firing rate, mass and sparse snapshots.
/// entropy_series / e_norm_series are filled by the diagnostics layer.
struct EvolutionTrace {
  Grid grid;
  double R = 0.0;
  double alpha_R = 0.0;
  double dt = 0.0;
  std::vector<double> times;        // after each step
  std::vector<double> firing_rate;  // N_R at step ends
  std::vector<double> mass;
  std::vector<double> cumulative_rate;  // int_0^t N_R, right-endpoint sum
  std::vector<std::pair<double, DensityField>> snapshots;
  std::vector<double> snapshot_times;
  std::vector<double> entropy_series;
  std::vector<double> e_norm_series;
};

/// Implicit-in-time generator of the absorbed/reinjecting drift-diffusion
/// flow: exponentially fitted (Chang-Cooper) fluxes, absorption at rate
/// alpha_R on [R, inf), and a rank-one reinjection of the absorbed mass into
/// the cell containing x = 0. Immutable and shareable between trajectories.
class DiscreteOperator {
 public:
  DiscreteOperator(const DriftSpec& spec, const Grid& grid, double R, double alpha_R);

  const Grid& grid() const { return grid_; }
  double R() const { return R_; }
  double alpha_R() const { return alpha_R_; }
  int reinjection_cell() const { return reinjection_cell_; }

  /// Generator action du/dt = L u (flux divergence - absorption + reinjection).
  std::vector<double> apply(const std::vector<double>& u) const;

  /// Face fluxes of the drift-diffusion part, size n_cells+1; boundary faces
  /// carry zero flux by construction.
  std::vector<double> face_flux(const std::vector<double>& u) const;

  /// N_R = alpha_R * sum_{x_i >= R} u_i dx.
  double firing_rate_of(const std::vector<double>& u) const;

  /// Exact discrete stationary state (null vector of the generator, mass 1).
  DensityField stationary_state() const;

  /// Discrete stationary state packaged with its firing rate, for use as the
  /// reference profile in entropy and distance diagnostics.
  SteadyStateProfile stationary_profile() const;

  /// One implicit Euler step; mass is conserved to rounding and nonnegative
  /// inputs stay nonnegative (M-matrix solve plus nonnegative rank-one fixup).
  DensityField step(const DensityField& state, double dt) const;

 private:
  Grid grid_;
  double R_, alpha_R_;
  int reinjection_cell_;
  int first_absorbing_cell_;
  // flux generator T as tridiagonal bands: (Tu)_i = lo_[i] u_{i-1} + di_[i] u_i + up_[i] u_{i+1}
  std::vector<double> lo_, di_, up_;
  std::vector<double> face_bm_, face_bp_;  // B(-P), B(P) per interior face

  void solve_shifted(double dt, const std::vector<double>& rhs,
                     std::vector<double>& out) const;
};

DiscreteOperator build_operator(const DriftSpec& spec, const Grid& grid, double R,
                                double alpha_R);

DensityField step(const DensityField& state, const DiscreteOperator& op, double dt);

double firing_rate(const DensityField& state, const DiscreteOperator& op);

std::vector<double> flux_profile(const DensityField& state, const DiscreteOperator& op);

EvolutionTrace evolve(const DensityField& u0, const DriftSpec& spec, const Grid& grid,
                      double R, double alpha_R, double dt, double t_end,
                      double snapshot_every);

// Common initial conditions (normalized to midpoint mass one on the grid).
DensityField gaussian_bump(const Grid& grid, double center, double sigma);
DensityField point_mass(const Grid& grid, double x);

double mass_of(const DensityField& state, const Grid& grid);
double l1_distance(const DensityField& a, const DensityField& b, const Grid& grid);

}  // namespace fpif
