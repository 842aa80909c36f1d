#include "fpif/particle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "fpif/philox.hpp"

namespace fpif {

namespace {

std::array<uint32_t, 2> key_of(uint64_t seed) {
  return {static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)};
}

// stream tags keep sampling draws and step draws disjoint
constexpr uint32_t kTagStep = 0u;
constexpr uint32_t kTagSample = 1u;

}  // namespace

ParticleEnsemble sample_initial(const DensityField& density, const Grid& grid, int m,
                                uint64_t seed) {
  if (m <= 0) throw std::invalid_argument("sample_initial: need m > 0");
  double mass = 0.0;
  for (double v : density.cells) {
    if (v < 0.0) throw std::invalid_argument("sample_initial: density must be >= 0");
    mass += v;
  }
  mass *= grid.dx();
  if (std::abs(mass - 1.0) > 1e-8)
    throw std::invalid_argument("sample_initial: density must have mass 1");

  // cdf at faces
  std::vector<double> cdf(grid.n_cells + 1, 0.0);
  for (int i = 0; i < grid.n_cells; ++i)
    cdf[i + 1] = cdf[i] + density.cells[i] * grid.dx() / mass;
  cdf.back() = 1.0;

  ParticleEnsemble ens;
  ens.seed = seed;
  ens.positions.resize(m);
  ens.ids.resize(m);
  const auto key = key_of(seed);
  for (int j = 0; j < m; ++j) {
    const auto r = Philox4x32::generate(
        {static_cast<uint32_t>(j), 0u, kTagSample, 0u}, key);
    const double u = uniform_from_bits(r[0], r[1]);
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    int cell = static_cast<int>(std::distance(cdf.begin(), it)) - 1;
    cell = std::clamp(cell, 0, grid.n_cells - 1);
    const double w = cdf[cell + 1] - cdf[cell];
    const double frac = w > 0.0 ? (u - cdf[cell]) / w : 0.5;
    ens.positions[j] = grid.face(cell) + frac * grid.dx();
    ens.ids[j] = static_cast<uint32_t>(j);
  }
  return ens;
}

void em_step(ParticleEnsemble& ens, const DriftSpec& spec, double dt,
             SpikeRecord& spikes, double x_blow, double noise_scale) {
  if (!(dt > 0.0)) throw std::invalid_argument("em_step: dt must be positive");
  if (!(x_blow > spec.x1())) throw std::invalid_argument("em_step: x_blow must exceed x1");

  const auto key = key_of(ens.seed);
  const double root = std::sqrt(2.0 * dt) * noise_scale;
  const uint32_t step_lo = static_cast<uint32_t>(ens.step_index);
  const uint32_t step_hi = static_cast<uint32_t>(ens.step_index >> 32);

  size_t write = 0;
  for (size_t j = 0; j < ens.positions.size(); ++j) {
    double x = ens.positions[j];
    const uint32_t id = ens.ids[j];
    double z = 0.0;
    if (noise_scale != 0.0)
      z = standard_normal({step_lo, step_hi, id, kTagStep}, key);
    x += spec.h(x) * dt + root * z;
    if (x >= x_blow) {
      ens.in_flight.push_back({ens.time + dt + spec.inv_h_tail(x), id});
    } else {
      ens.positions[write] = x;
      ens.ids[write] = id;
      ++write;
    }
  }
  ens.positions.resize(write);
  ens.ids.resize(write);

  ens.time += dt;
  ens.step_index += 1;

  // release matured in-flight particles at the origin
  size_t keep = 0;
  for (size_t j = 0; j < ens.in_flight.size(); ++j) {
    const auto& f = ens.in_flight[j];
    if (f.reset_time <= ens.time) {
      spikes.spike_times.push_back(f.reset_time);
      ens.positions.push_back(0.0);
      ens.ids.push_back(f.id);
    } else {
      ens.in_flight[keep++] = f;
    }
  }
  ens.in_flight.resize(keep);
}

EmpiricalDensity empirical_density(const ParticleEnsemble& ens, const Grid& grid) {
  EmpiricalDensity out;
  out.field.time = ens.time;
  // integer counts first: cell sums are then independent of particle order
  std::vector<long> counts(grid.n_cells, 0);
  for (double x : ens.positions) {
    if (x < grid.x_min) {
      ++out.clipped_low;
      ++counts.front();
    } else if (x >= grid.x_max) {
      ++out.clipped_high;
      ++counts.back();
    } else {
      ++counts[grid.cell_of(x)];
    }
  }
  const double total = static_cast<double>(ens.total());
  const double w = 1.0 / (total * grid.dx());
  out.field.cells.resize(grid.n_cells);
  for (int i = 0; i < grid.n_cells; ++i)
    out.field.cells[i] = static_cast<double>(counts[i]) * w;
  out.in_flight_mass = static_cast<double>(ens.in_flight.size()) / total;
  return out;
}

namespace {

struct WorkerState {
  ParticleEnsemble ens;
  SpikeRecord spikes;
  std::vector<double> avg_accum;  // histogram accumulation for time averaging
  long avg_samples = 0;
};

void advance_worker(WorkerState& w, const DriftSpec& spec, const SdeConfig& cfg,
                    const Grid& grid, long step_begin, long step_end, long avg_stride,
                    long avg_start_step) {
  for (long k = step_begin; k < step_end; ++k) {
    em_step(w.ens, spec, cfg.dt, w.spikes, cfg.x_blow);
    if (avg_stride > 0 && k + 1 >= avg_start_step && (k + 1) % avg_stride == 0) {
      for (double x : w.ens.positions) {
        if (x >= grid.x_min && x < grid.x_max) w.avg_accum[grid.cell_of(x)] += 1.0;
        else if (x < grid.x_min) w.avg_accum.front() += 1.0;
        else w.avg_accum.back() += 1.0;
      }
      ++w.avg_samples;
    }
  }
}

}  // namespace

SimulationResult simulate(const DensityField& u0, const DriftSpec& spec,
                          const SdeConfig& cfg, const Grid& grid, int n_threads) {
  if (cfg.m_particles <= 0 || !(cfg.dt > 0.0) || !(cfg.t_end > 0.0))
    throw std::invalid_argument("simulate: invalid config");
  if (!(cfg.x_blow > spec.x1()))
    throw std::invalid_argument("simulate: x_blow must exceed x1");

  ParticleEnsemble whole = sample_initial(u0, grid, cfg.m_particles, cfg.seed);

  const int threads = std::max(1, n_threads);
  std::vector<WorkerState> workers(threads);
  const int per = (cfg.m_particles + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * per;
    const int hi = std::min(cfg.m_particles, lo + per);
    auto& w = workers[t].ens;
    w.seed = cfg.seed;
    if (lo < hi) {
      w.positions.assign(whole.positions.begin() + lo, whole.positions.begin() + hi);
      w.ids.assign(whole.ids.begin() + lo, whole.ids.begin() + hi);
    }
    workers[t].avg_accum.assign(grid.n_cells, 0.0);
  }

  const long n_steps = std::lround(cfg.t_end / cfg.dt);
  const long snap_stride =
      cfg.snapshot_every > 0.0 ? std::max(1L, std::lround(cfg.snapshot_every / cfg.dt)) : 0;
  // sample the running histogram roughly every 0.05 time units
  const long avg_stride = std::max(1L, std::lround(0.05 / cfg.dt));
  const long avg_start_step = std::lround(cfg.average_after / cfg.dt);

  SimulationResult result;

  long k = 0;
  while (k < n_steps) {
    const long until = snap_stride > 0 ? std::min(n_steps, (k / snap_stride + 1) * snap_stride)
                                       : n_steps;
    if (threads == 1) {
      advance_worker(workers[0], spec, cfg, grid, k, until, avg_stride, avg_start_step);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(threads);
      for (auto& w : workers)
        pool.emplace_back(advance_worker, std::ref(w), std::cref(spec), std::cref(cfg),
                          std::cref(grid), k, until, avg_stride, avg_start_step);
      for (auto& th : pool) th.join();
    }
    k = until;
    if (snap_stride > 0 && k % snap_stride == 0) {
      // merge a global view for the snapshot
      ParticleEnsemble merged;
      merged.seed = cfg.seed;
      merged.time = workers[0].ens.time;
      for (const auto& w : workers) {
        merged.positions.insert(merged.positions.end(), w.ens.positions.begin(),
                                w.ens.positions.end());
        merged.in_flight.insert(merged.in_flight.end(), w.ens.in_flight.begin(),
                                w.ens.in_flight.end());
      }
      merged.ids.resize(merged.positions.size());
      result.snapshots.emplace_back(merged.time, empirical_density(merged, grid));
    }
  }

  // merge spikes deterministically
  for (auto& w : workers)
    result.spikes.spike_times.insert(result.spikes.spike_times.end(),
                                     w.spikes.spike_times.begin(),
                                     w.spikes.spike_times.end());
  std::sort(result.spikes.spike_times.begin(), result.spikes.spike_times.end());

  // sliding-window rate series (spikes per particle per unit time)
  const double w_rate = cfg.rate_window;
  const auto& st = result.spikes.spike_times;
  for (double t = w_rate; t <= cfg.t_end + 1e-12; t += w_rate) {
    const auto lo = std::lower_bound(st.begin(), st.end(), t - w_rate);
    const auto hi = std::upper_bound(st.begin(), st.end(), t);
    result.rate_times.push_back(t);
    result.rate_series.push_back(static_cast<double>(std::distance(lo, hi)) /
                                 (w_rate * cfg.m_particles));
  }

  // time-averaged histogram
  result.time_avg_density.cells.assign(grid.n_cells, 0.0);
  result.time_avg_density.time = cfg.t_end;
  double samples = 0.0;
  for (const auto& w : workers) samples += static_cast<double>(w.avg_samples);
  if (samples > 0.0) {
    // every worker logs the same sample count; weight cells by total draws
    const double denom =
        static_cast<double>(workers[0].avg_samples) * cfg.m_particles * grid.dx();
    for (const auto& w : workers)
      for (int i = 0; i < grid.n_cells; ++i)
        result.time_avg_density.cells[i] += w.avg_accum[i] / denom;
  }

  const auto lo = std::lower_bound(st.begin(), st.end(), cfg.average_after);
  result.mean_rate = static_cast<double>(std::distance(lo, st.end())) /
                     ((cfg.t_end - cfg.average_after) * cfg.m_particles);
  size_t in_flight = 0;
  for (const auto& w : workers) in_flight += w.ens.in_flight.size();
  result.in_flight_fraction_end =
      static_cast<double>(in_flight) / static_cast<double>(cfg.m_particles);
  return result;
}

}  // namespace fpif
