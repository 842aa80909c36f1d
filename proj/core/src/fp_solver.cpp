#include "fpif/fp_solver.hpp"

#include <cmath>
#include <stdexcept>

namespace fpif {

namespace {

// B(z) = z / (e^z - 1), the exponential fitting weight.
double bernoulli_weight(double z) {
  const double az = std::abs(z);
  if (az < 1e-5) return 1.0 - 0.5 * z + z * z / 12.0;
  if (z > 0.0) {
    if (z > 500.0) return z * std::exp(-z);
    return z / std::expm1(z);
  }
  // z < 0: e^z - 1 in (-1, 0), no cancellation
  return z / std::expm1(z);
}

void thomas_solve(const std::vector<double>& lo, const std::vector<double>& di,
                  const std::vector<double>& up, const std::vector<double>& rhs,
                  std::vector<double>& work_d, std::vector<double>& work_b,
                  std::vector<double>& out) {
  const int n = static_cast<int>(di.size());
  work_d = di;
  work_b = rhs;
  for (int i = 1; i < n; ++i) {
    const double m = lo[i] / work_d[i - 1];
    work_d[i] -= m * up[i - 1];
    work_b[i] -= m * work_b[i - 1];
  }
  out.resize(n);
  out[n - 1] = work_b[n - 1] / work_d[n - 1];
  for (int i = n - 2; i >= 0; --i)
    out[i] = (work_b[i] - up[i] * out[i + 1]) / work_d[i];
}

}  // namespace

DiscreteOperator::DiscreteOperator(const DriftSpec& spec, const Grid& grid, double R,
                                   double alpha_R)
    : grid_(grid), R_(R), alpha_R_(alpha_R) {
  if (!(R > spec.x1())) throw std::invalid_argument("operator: need R > x1");
  if (!(alpha_R > 0.0)) throw std::invalid_argument("operator: need alpha_R > 0");
  if (!(grid.x_min < spec.x0() && spec.x1() < R && R < grid.x_max))
    throw std::invalid_argument("operator: need x_min < x0 < x1 < R < x_max");
  if (grid.index_of_zero < 0)
    throw std::invalid_argument("operator: grid must contain x = 0");
  reinjection_cell_ = grid.index_of_zero;

  const int n = grid.n_cells;
  const double dx = grid.dx();
  const double dx2 = dx * dx;
  const double HRv = spec.h_anti(R);
  const double hR = spec.h(R);
  auto h_anti_capped = [&](double x) {
    // antiderivative of h_R = min(h, h(R)) beyond R, h elsewhere
    return x <= R ? spec.h_anti(x) : HRv + hR * (x - R);
  };

  lo_.assign(n, 0.0);
  di_.assign(n, 0.0);
  up_.assign(n, 0.0);
  face_bm_.assign(n + 1, 0.0);
  face_bp_.assign(n + 1, 0.0);

  for (int f = 1; f < n; ++f) {  // face between cells f-1 and f
    const double P = h_anti_capped(grid.center(f)) - h_anti_capped(grid.center(f - 1));
    if (std::abs(P) > 500.0)
      throw std::invalid_argument(
          "operator: cell Peclet number exceeds the overflow-safe bound; "
          "use a finer dx");
    const double bm = bernoulli_weight(-P);  // multiplies the left cell
    const double bp = bernoulli_weight(P);   // multiplies the right cell
    face_bm_[f] = bm;
    face_bp_[f] = bp;
    // flux F_f = (bm u_{f-1} - bp u_f) / dx, (Tu)_i = -(F_{i+1} - F_i)/dx
    di_[f - 1] -= bm / dx2;
    up_[f - 1] += bp / dx2;
    lo_[f] += bm / dx2;
    di_[f] -= bp / dx2;
  }

  first_absorbing_cell_ = n;
  for (int i = 0; i < n; ++i) {
    if (grid.center(i) >= R) {
      first_absorbing_cell_ = i;
      break;
    }
  }
}

std::vector<double> DiscreteOperator::apply(const std::vector<double>& u) const {
  const int n = grid_.n_cells;
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double v = di_[i] * u[i];
    if (i > 0) v += lo_[i] * u[i - 1];
    if (i + 1 < n) v += up_[i] * u[i + 1];
    out[i] = v;
  }
  double absorbed = 0.0;
  for (int i = first_absorbing_cell_; i < n; ++i) {
    out[i] -= alpha_R_ * u[i];
    absorbed += alpha_R_ * u[i];
  }
  out[reinjection_cell_] += absorbed;
  return out;
}

std::vector<double> DiscreteOperator::face_flux(const std::vector<double>& u) const {
  const int n = grid_.n_cells;
  const double dx = grid_.dx();
  std::vector<double> flux(n + 1, 0.0);
  for (int f = 1; f < n; ++f)
    flux[f] = (face_bm_[f] * u[f - 1] - face_bp_[f] * u[f]) / dx;
  return flux;
}

double DiscreteOperator::firing_rate_of(const std::vector<double>& u) const {
  double s = 0.0;
  for (int i = first_absorbing_cell_; i < grid_.n_cells; ++i) s += u[i];
  return alpha_R_ * s * grid_.dx();
}

DensityField DiscreteOperator::stationary_state() const {
  // stationary: (-T + Phi) u = e_{i0} (phi^T u); the consistency condition
  // phi^T A^{-1} e_{i0} = 1 holds identically, so u is the normalized solve
  const int n = grid_.n_cells;
  std::vector<double> lo(n), di(n), up(n);
  for (int i = 0; i < n; ++i) {
    lo[i] = -lo_[i];
    di[i] = -di_[i] + (i >= first_absorbing_cell_ ? alpha_R_ : 0.0);
    up[i] = -up_[i];
  }
  std::vector<double> rhs(n, 0.0);
  rhs[reinjection_cell_] = 1.0;
  std::vector<double> wd, wb, w;
  thomas_solve(lo, di, up, rhs, wd, wb, w);
  double s = 0.0;
  for (double v : w) s += v;
  s *= grid_.dx();
  DensityField out;
  out.cells.resize(n);
  for (int i = 0; i < n; ++i) out.cells[i] = w[i] / s;
  out.time = 0.0;
  return out;
}

SteadyStateProfile DiscreteOperator::stationary_profile() const {
  DensityField st = stationary_state();
  SteadyStateProfile prof;
  prof.grid = grid_;
  prof.values = st.cells;
  prof.n_inf = firing_rate_of(st.cells);
  prof.quadrature_tol = 0.0;
  prof.log_k0 = 0.0;
  return prof;
}

void DiscreteOperator::solve_shifted(double dt, const std::vector<double>& rhs,
                                     std::vector<double>& out) const {
  // (I - dt T + dt Phi) out = rhs
  const int n = grid_.n_cells;
  std::vector<double> lo(n), di(n), up(n);
  for (int i = 0; i < n; ++i) {
    lo[i] = -dt * lo_[i];
    di[i] = 1.0 - dt * di_[i] + (i >= first_absorbing_cell_ ? dt * alpha_R_ : 0.0);
    up[i] = -dt * up_[i];
  }
  std::vector<double> wd, wb;
  thomas_solve(lo, di, up, rhs, wd, wb, out);
}

DensityField DiscreteOperator::step(const DensityField& state, double dt) const {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  const int n = grid_.n_cells;
  if (static_cast<int>(state.cells.size()) != n)
    throw std::invalid_argument("step: state size does not match grid");

  std::vector<double> y, z;
  solve_shifted(dt, state.cells, y);
  std::vector<double> e(n, 0.0);
  e[reinjection_cell_] = 1.0;
  solve_shifted(dt, e, z);

  // Sherman-Morrison for the rank-one reinjection column
  double py = 0.0, pz = 0.0;
  for (int i = first_absorbing_cell_; i < n; ++i) {
    py += y[i];
    pz += z[i];
  }
  py *= alpha_R_;
  pz *= alpha_R_;
  const double c = dt * py / (1.0 - dt * pz);

  DensityField out;
  out.cells.resize(n);
  for (int i = 0; i < n; ++i) out.cells[i] = y[i] + c * z[i];
  out.time = state.time + dt;
  return out;
}

DiscreteOperator build_operator(const DriftSpec& spec, const Grid& grid, double R,
                                double alpha_R) {
  return DiscreteOperator(spec, grid, R, alpha_R);
}

DensityField step(const DensityField& state, const DiscreteOperator& op, double dt) {
  return op.step(state, dt);
}

double firing_rate(const DensityField& state, const DiscreteOperator& op) {
  return op.firing_rate_of(state.cells);
}

std::vector<double> flux_profile(const DensityField& state, const DiscreteOperator& op) {
  return op.face_flux(state.cells);
}

double mass_of(const DensityField& state, const Grid& grid) {
  double s = 0.0;
  for (double v : state.cells) s += v;
  return s * grid.dx();
}

double l1_distance(const DensityField& a, const DensityField& b, const Grid& grid) {
  if (a.cells.size() != b.cells.size())
    throw std::invalid_argument("l1_distance: size mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.cells.size(); ++i) s += std::abs(a.cells[i] - b.cells[i]);
  return s * grid.dx();
}

EvolutionTrace evolve(const DensityField& u0, const DriftSpec& spec, const Grid& grid,
                      double R, double alpha_R, double dt, double t_end,
                      double snapshot_every) {
  const double m0 = mass_of(u0, grid);
  if (std::abs(m0 - 1.0) > 1e-8)
    throw std::invalid_argument("evolve: initial data must have mass 1");
  for (double v : u0.cells)
    if (v < 0.0) throw std::invalid_argument("evolve: initial data must be nonnegative");

  DiscreteOperator op(spec, grid, R, alpha_R);
  const long n_steps = std::lround(t_end / dt);
  const long snap_stride =
      snapshot_every > 0.0 ? std::max(1L, std::lround(snapshot_every / dt)) : 0;

  EvolutionTrace trace;
  trace.grid = grid;
  trace.R = R;
  trace.alpha_R = alpha_R;
  trace.dt = dt;
  trace.times.reserve(n_steps);
  trace.firing_rate.reserve(n_steps);
  trace.mass.reserve(n_steps);
  trace.cumulative_rate.reserve(n_steps);

  DensityField u = u0;
  u.time = 0.0;
  trace.snapshots.emplace_back(0.0, u);
  trace.snapshot_times.push_back(0.0);

  double cum = 0.0;
  for (long k = 1; k <= n_steps; ++k) {
    u = op.step(u, dt);
    const double nr = op.firing_rate_of(u.cells);
    cum += dt * nr;
    trace.times.push_back(u.time);
    trace.firing_rate.push_back(nr);
    trace.mass.push_back(mass_of(u, grid));
    trace.cumulative_rate.push_back(cum);
    if ((snap_stride > 0 && k % snap_stride == 0) || k == n_steps) {
      if (trace.snapshot_times.empty() || trace.snapshot_times.back() != u.time) {
        trace.snapshots.emplace_back(u.time, u);
        trace.snapshot_times.push_back(u.time);
      }
    }
  }
  return trace;
}

DensityField gaussian_bump(const Grid& grid, double center, double sigma) {
  DensityField out;
  out.cells.resize(grid.n_cells);
  double s = 0.0;
  for (int i = 0; i < grid.n_cells; ++i) {
    const double t = (grid.center(i) - center) / sigma;
    out.cells[i] = std::exp(-0.5 * t * t);
    s += out.cells[i];
  }
  s *= grid.dx();
  for (double& v : out.cells) v /= s;
  return out;
}

DensityField point_mass(const Grid& grid, double x) {
  DensityField out;
  out.cells.assign(grid.n_cells, 0.0);
  out.cells[grid.cell_of(x)] = 1.0 / grid.dx();
  return out;
}

}  // namespace fpif
