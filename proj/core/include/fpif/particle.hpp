#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fpif/drift.hpp"
#include "fpif/fp_solver.hpp"
#include "fpif/grid.hpp"

namespace fpif {

/// Simulation parameters for the stochastic route.
struct SdeConfig {
  int m_particles = 100000;
  double dt = 1e-3;
  double x_blow = 50.0;  // threshold treated as escaped, must exceed x1
  double t_end = 20.0;
  uint64_t seed = 12345;
  // derived outputs configuration
  double rate_window = 1.0;      // sliding window width for the rate series
  double snapshot_every = 1.0;   // 0 disables snapshots
  double average_after = 5.0;    // burn-in before the time-averaged histogram
};

/// Swarm state. Escaped particles wait in `in_flight` until their residual
/// travel time elapses, then re-enter at 0 and log a spike. Particle ids key
/// the counter-based RNG streams, so any partition of the swarm across
/// workers reproduces the single-threaded draw sequence.
struct ParticleEnsemble {
  struct InFlight {
    double reset_time;
    uint32_t id;
  };
  std::vector<double> positions;
  std::vector<uint32_t> ids;
  std::vector<InFlight> in_flight;
  double time = 0.0;
  uint64_t step_index = 0;
  uint64_t seed = 0;

  size_t total() const { return positions.size() + in_flight.size(); }
};

struct SpikeRecord {
  std::vector<double> spike_times;  // sorted, one entry per reset event
};

struct EmpiricalDensity {
  DensityField field;
  long clipped_low = 0;   // alive particles counted into the edge cells
  long clipped_high = 0;
  double in_flight_mass = 0.0;  // fraction of the swarm currently escaped
};

struct SimulationResult {
  SpikeRecord spikes;
  std::vector<std::pair<double, EmpiricalDensity>> snapshots;
  std::vector<double> rate_times;
  std::vector<double> rate_series;      // spikes per unit time per particle
  DensityField time_avg_density;        // averaged over [average_after, t_end]
  double mean_rate = 0.0;               // spikes / particle / time on the window
  double in_flight_fraction_end = 0.0;
};

/// Inverse-CDF draw from a piecewise-constant density; deterministic in seed.
ParticleEnsemble sample_initial(const DensityField& density, const Grid& grid, int m,
                                uint64_t seed);

/// One Euler-Maruyama step of dX = h(X) dt + sqrt(2) dB for every alive
/// particle. Crossings of x_blow move the particle to in_flight with a reset
/// delay equal to its residual noiseless travel time; matured in-flight
/// entries re-enter at 0 and append their reset time to `spikes`.
/// noise_scale is a test hook: 0 makes the step deterministic.
void em_step(ParticleEnsemble& ensemble, const DriftSpec& spec, double dt,
             SpikeRecord& spikes, double x_blow, double noise_scale = 1.0);

/// Histogram of alive particles on the grid, normalized so the histogram
/// mass equals the alive fraction; escaped mass is reported separately.
EmpiricalDensity empirical_density(const ParticleEnsemble& ensemble, const Grid& grid);

/// Full run: em_step to t_end with snapshots, sliding-window rate series and
/// a time-averaged stationary histogram. Identical results for any n_threads.
SimulationResult simulate(const DensityField& u0, const DriftSpec& spec,
                          const SdeConfig& config, const Grid& grid, int n_threads = 1);

}  // namespace fpif
