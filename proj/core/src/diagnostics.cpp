#include "fpif/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fpif/quadrature.hpp"

namespace fpif {

namespace {

double entropy_h(EntropyKind kind, double z, double c0) {
  switch (kind) {
    case EntropyKind::Square: {
      const double d = z - 1.0;
      return d * d;
    }
    case EntropyKind::Abs: return std::abs(z - 1.0);
    case EntropyKind::PositivePart: return std::max(0.0, std::abs(z) - c0);
  }
  return 0.0;
}

// log(e^a + e^b) without overflow
double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

}  // namespace

std::string to_string(EntropyKind kind) {
  switch (kind) {
    case EntropyKind::Square: return "Square";
    case EntropyKind::Abs: return "Abs";
    case EntropyKind::PositivePart: return "PositivePart";
  }
  return "?";
}

double relative_entropy(const DensityField& u, const SteadyStateProfile& ref,
                        EntropyKind kind, double c0) {
  if (u.cells.size() != ref.values.size())
    throw std::invalid_argument("relative_entropy: grid mismatch");
  const double dx = ref.grid.dx();
  double total = 0.0;
  for (size_t i = 0; i < u.cells.size(); ++i) {
    const double r = ref.values[i];
    if (!(r > 0.0)) throw std::invalid_argument("relative_entropy: reference not positive");
    total += entropy_h(kind, u.cells[i] / r, c0) * r * dx;
  }
  return total;
}

double weighted_e_norm(const DensityField& u, const DensityField& v, const Grid& grid) {
  if (u.cells.size() != v.cells.size() ||
      static_cast<int>(u.cells.size()) != grid.n_cells)
    throw std::invalid_argument("weighted_e_norm: grid mismatch");
  const double dx = grid.dx();
  double total = 0.0;
  for (int i = 0; i < grid.n_cells; ++i) {
    const double w = 1.0 + std::max(0.0, -grid.center(i));
    total += w * std::abs(u.cells[i] - v.cells[i]) * dx;
  }
  return total;
}

RateFit fit_exponential_rate(const std::vector<double>& times,
                             const std::vector<double>& values, double window_lo,
                             double window_hi) {
  if (times.size() != values.size())
    throw std::invalid_argument("fit_exponential_rate: size mismatch");
  std::vector<double> t, y;
  for (size_t i = 0; i < times.size(); ++i) {
    if (times[i] < window_lo || times[i] > window_hi) continue;
    if (!(values[i] > 0.0))
      throw std::invalid_argument("fit_exponential_rate: nonpositive value in window");
    t.push_back(times[i]);
    y.push_back(std::log(values[i]));
  }
  if (t.size() < 10)
    throw std::invalid_argument("fit_exponential_rate: window has fewer than 10 samples");

  const double n = static_cast<double>(t.size());
  double st = 0.0, sy = 0.0;
  for (size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
  }
  const double tbar = st / n, ybar = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < t.size(); ++i) {
    const double a = t[i] - tbar, b = y[i] - ybar;
    sxx += a * a;
    sxy += a * b;
    syy += b * b;
  }
  const double slope = sxy / sxx;
  RateFit fit;
  fit.lambda_hat = -slope;
  fit.m_hat = std::exp(ybar - slope * tbar);
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.window_lo = window_lo;
  fit.window_hi = window_hi;
  fit.reliable = fit.r_squared >= 0.9;
  return fit;
}

// ---------------------------------------------------------------------------
// phi

PhiProfile compute_phi(const DriftSpec& spec, const Grid& grid, double quad_tol) {
  PhiProfile out;
  out.grid = grid;
  out.spec_ = &spec;
  out.quad_tol_ = quad_tol;

  const int n = grid.n_cells;
  out.face_x_.resize(n + 1);
  for (int f = 0; f <= n; ++f) out.face_x_[f] = grid.face(f);

  // log G at faces, G(y) = int_{-inf}^y e^H. Left of x0 the branch is
  // Gaussian and has a closed form via erfc.
  out.log_g_.resize(n + 1);
  const double h0 = spec.h0();
  const double h1c = spec.left_branch_const();
  auto log_g_left = [&](double y) {
    // e^{h1 + h0^2/2} sqrt(pi/2) erfc(-(y - h0)/sqrt(2)), log form
    const double arg = -(y - h0) / std::sqrt(2.0);
    double log_erfc;
    if (arg > 25.0) {
      // asymptotic erfc(a) ~ e^{-a^2}/(a sqrt(pi))
      log_erfc = -arg * arg - std::log(arg) - 0.5 * std::log(M_PI);
    } else {
      log_erfc = std::log(std::erfc(arg));
    }
    return h1c + 0.5 * h0 * h0 + 0.5 * std::log(M_PI / 2.0) + log_erfc;
  };

  const double x_start = std::min(grid.x_min, spec.x0());
  double log_g = log_g_left(std::min(x_start, spec.x0()));
  double prev_x = std::min(x_start, spec.x0());
  for (int f = 0; f <= n; ++f) {
    const double x = out.face_x_[f];
    if (x <= spec.x0()) {
      out.log_g_[f] = log_g_left(x);
      prev_x = x;
      log_g = out.log_g_[f];
      continue;
    }
    // accumulate int_{prev}^{x} e^H in log space
    const double shift = std::max(spec.h_anti(prev_x), spec.h_anti(x));
    auto q = integrate([&](double z) { return std::exp(spec.h_anti(z) - shift); },
                       prev_x, x, quad_tol, 0.0);
    const double log_seg = shift + std::log(std::max(q.value, 1e-300));
    log_g = log_add(log_g, log_seg);
    out.log_g_[f] = log_g;
    prev_x = x;
  }

  // phi at faces by accumulating phi' = e^{-H} G, then phi at centers
  auto log_g_at = [&](double y) {
    if (y <= spec.x0()) return log_g_left(y);
    const int f = std::clamp(static_cast<int>(std::floor((y - grid.x_min) / grid.dx())),
                             0, n);
    const double xf = out.face_x_[f];
    double base = out.log_g_[f];
    if (y <= xf) return base;
    const double shift = std::max(spec.h_anti(xf), spec.h_anti(y));
    auto q = integrate([&](double z) { return std::exp(spec.h_anti(z) - shift); }, xf, y,
                       quad_tol, 0.0);
    return log_add(base, shift + std::log(std::max(q.value, 1e-300)));
  };
  auto phi_prime = [&](double y) { return std::exp(log_g_at(y) - spec.h_anti(y)); };

  out.phi_face_.assign(n + 1, 0.0);
  // find the face at (or nearest below) 0 and integrate outwards
  int f0 = std::clamp(static_cast<int>(std::floor((0.0 - grid.x_min) / grid.dx() + 0.5)),
                      0, n);
  const double x0f = out.face_x_[f0];
  const double base_shift = integrate(phi_prime, 0.0, x0f, quad_tol, 1e-14).value;
  out.phi_face_[f0] = base_shift;  // phi(face nearest zero), phi(0) = 0
  for (int f = f0 + 1; f <= n; ++f)
    out.phi_face_[f] =
        out.phi_face_[f - 1] +
        integrate(phi_prime, out.face_x_[f - 1], out.face_x_[f], quad_tol, 1e-14).value;
  for (int f = f0 - 1; f >= 0; --f)
    out.phi_face_[f] =
        out.phi_face_[f + 1] -
        integrate(phi_prime, out.face_x_[f], out.face_x_[f + 1], quad_tol, 1e-14).value;

  out.values.resize(n);
  for (int i = 0; i < n; ++i)
    out.values[i] = out.phi_face_[i] +
                    integrate(phi_prime, out.face_x_[i], grid.center(i), quad_tol, 1e-14)
                        .value;

  // limit at +inf: grid edge value plus the analytic remainder int 1/h-like
  const double edge = out.phi_face_[n];
  double rem = 0.0;
  if (grid.x_max > spec.x1()) {
    const double z = spec.zeta(std::max(grid.x_max, spec.x1()));
    // phi'(y) in [1/h * 1/(1+zeta), 1/h] on the tail, same sandwich as u
    const double inv_tail = spec.inv_h_tail(grid.x_max);
    rem = inv_tail * (2.0 + z) / (2.0 * (1.0 + z));
  }
  out.c_phi = edge + rem;
  return out;
}

double PhiProfile::value_at(double x) const {
  const int n = grid.n_cells;
  if (x <= face_x_.front() || x >= face_x_.back()) {
    // clamp to edges; callers stay inside the grid for identity checks
    return x <= face_x_.front() ? phi_face_.front() : phi_face_.back();
  }
  const int f = std::clamp(static_cast<int>(std::floor((x - grid.x_min) / grid.dx())), 0,
                           n - 1);
  auto phi_prime = [&](double y) { return prime_at(y); };
  return phi_face_[f] + integrate(phi_prime, face_x_[f], x, quad_tol_, 1e-14).value;
}

double PhiProfile::prime_at(double x) const {
  const DriftSpec& spec = *spec_;
  double lg;
  if (x <= spec.x0()) {
    const double h0 = spec.h0();
    const double arg = -(x - h0) / std::sqrt(2.0);
    double log_erfc;
    if (arg > 25.0)
      log_erfc = -arg * arg - std::log(arg) - 0.5 * std::log(M_PI);
    else
      log_erfc = std::log(std::erfc(arg));
    lg = spec.left_branch_const() + 0.5 * h0 * h0 + 0.5 * std::log(M_PI / 2.0) + log_erfc;
  } else {
    const int n = grid.n_cells;
    const int f = std::clamp(static_cast<int>(std::floor((x - grid.x_min) / grid.dx())),
                             0, n);
    const double xf = face_x_[f];
    double base = log_g_[f];
    if (x > xf) {
      const double shift = std::max(spec.h_anti(xf), spec.h_anti(x));
      auto q = integrate([&](double z) { return std::exp(spec.h_anti(z) - shift); }, xf,
                         x, quad_tol_, 0.0);
      base = log_add(base, shift + std::log(std::max(q.value, 1e-300)));
    }
    lg = base;
  }
  return std::exp(lg - spec_->h_anti(x));
}

double PhiProfile::c_truncated(const DriftSpec& spec, double R, double alpha_R) const {
  const double lam = truncated_lambda(spec, R, alpha_R);
  const double kappa = lam + spec.h(R);
  return value_at(R) + 1.0 / alpha_R - prime_at(R) / kappa;
}

std::vector<double> phi_identity_residual(const EvolutionTrace& trace,
                                          const PhiProfile& phi,
                                          const DriftSpec& spec) {
  if (phi.grid.n_cells != trace.grid.n_cells)
    throw std::invalid_argument("phi_identity_residual: grid mismatch");
  if (trace.snapshots.empty())
    throw std::invalid_argument("phi_identity_residual: trace has no snapshots");

  const double c = phi.c_truncated(spec, trace.R, trace.alpha_R);
  const double dx = trace.grid.dx();

  auto weighted_mass = [&](const DensityField& u) {
    double s = 0.0;
    for (int i = 0; i < trace.grid.n_cells; ++i) s += phi.values[i] * u.cells[i];
    return s * dx;
  };
  const double I0 = weighted_mass(trace.snapshots.front().second);

  auto cum_at = [&](double t) {
    if (t <= 0.0) return 0.0;
    // right-endpoint sum recorded per step
    const double dt = trace.dt;
    long k = std::lround(t / dt);
    k = std::clamp(k, 1L, static_cast<long>(trace.cumulative_rate.size()));
    return trace.cumulative_rate[k - 1];
  };

  std::vector<double> residuals;
  residuals.reserve(trace.snapshots.size());
  for (const auto& [t, u] : trace.snapshots) {
    const double lhs = cum_at(t);
    const double rhs = (t + I0 - weighted_mass(u)) / c;
    residuals.push_back(std::abs(lhs - rhs) / (1.0 + lhs));
  }
  return residuals;
}

FluxCheckTable boundary_flux_check(const EvolutionTrace& trace, const DriftSpec& spec,
                                   const std::vector<double>& probes) {
  FluxCheckTable table;
  table.probes = probes;
  for (double p : probes)
    if (p >= trace.R)
      throw std::invalid_argument("boundary_flux_check: probes must lie below R");

  std::vector<int> cells;
  for (double p : probes) cells.push_back(trace.grid.cell_of(p));

  table.time_avg_discrepancy.assign(probes.size(), 0.0);
  size_t count = 0;
  for (const auto& [t, u] : trace.snapshots) {
    FluxProbeRow row;
    row.time = t;
    // contemporaneous firing rate, recomputed from the snapshot itself
    double absorbed = 0.0;
    for (int i = 0; i < trace.grid.n_cells; ++i)
      if (trace.grid.center(i) >= trace.R) absorbed += u.cells[i];
    row.firing_rate = trace.alpha_R * absorbed * trace.grid.dx();
    for (size_t j = 0; j < probes.size(); ++j) {
      const double hu = spec.h(probes[j]) * u.cells[cells[j]];
      row.h_u_at_probe.push_back(hu);
      table.time_avg_discrepancy[j] +=
          std::abs(hu - row.firing_rate) / std::max(row.firing_rate, 1e-12);
    }
    table.rows.push_back(std::move(row));
    ++count;
  }
  if (count > 0)
    for (double& v : table.time_avg_discrepancy) v /= static_cast<double>(count);
  return table;
}

PoincareRate poincare_rate(const SteadyStateProfile& profile, const DriftSpec& spec) {
  PoincareRate out;
  const auto cond = spec.poincare_condition_sup();
  out.applicable = cond.bounded;
  if (!out.applicable) return out;

  const int n = profile.grid.n_cells;
  const double dx = profile.grid.dx();
  // U(x_i) = mass strictly to the right of cell i plus half the cell itself
  double suffix = 0.0;
  double k = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    const double U = suffix + 0.5 * profile.values[i] * dx;
    suffix += profile.values[i] * dx;
    const double u = profile.values[i];
    if (u > 1e-300) k = std::max(k, (1.0 - U) * U / u);
  }
  out.k = k;
  out.mu_lower = 1.0 / (4.0 * k);
  return out;
}

void attach_entropy_series(EvolutionTrace& trace, const SteadyStateProfile& ref,
                           EntropyKind kind, double c0) {
  trace.entropy_series.clear();
  for (const auto& [t, u] : trace.snapshots)
    trace.entropy_series.push_back(relative_entropy(u, ref, kind, c0));
}

void attach_e_norm_series(EvolutionTrace& trace, const SteadyStateProfile& ref) {
  trace.e_norm_series.clear();
  DensityField reffield;
  reffield.cells = ref.values;
  for (const auto& [t, u] : trace.snapshots)
    trace.e_norm_series.push_back(weighted_e_norm(u, reffield, trace.grid));
}

}  // namespace fpif
