#include "fpif/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fpif/quadrature.hpp"

namespace fpif {

namespace {

// Smallest w with H(x + w) - H(x) >= target, by doubling then bisection.
double decay_window(const DriftSpec& spec, double x, double target) {
  const double hx = spec.h_anti(x);
  double w = 1.0 / std::max(1.0, spec.h(x));
  int guard = 0;
  while (spec.h_anti(x + w) - hx < target) {
    w *= 2.0;
    if (++guard > 200) throw std::runtime_error("drift antiderivative does not grow");
  }
  double lo = w * 0.5, hi = w;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (spec.h_anti(x + mid) - hx < target ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

StationaryKernel::StationaryKernel(const DriftSpec& spec, double rel_tol)
    : spec_(&spec), rel_tol_(rel_tol), log_k0_(0.0) {
  log_k0_ = std::log(K(0.0));
}

double StationaryKernel::K(double x) const {
  const DriftSpec& spec = *spec_;
  const double a = std::max(0.0, x);
  // certified sandwich once the tail ratio is negligible; this also covers
  // abscissae where the decay scale 1/h(a) underflows the quadrature window
  if (a >= spec.x1() && a > spec.x0()) {
    const double z = spec.zeta(std::max(a, spec.x1()));
    if (z < 1e-8) return (2.0 + z) / (2.0 * spec.h(a) * (1.0 + z));
  }
  const double ha = spec.h_anti(a);
  const double w = decay_window(spec, a, 60.0);
  auto integrand = [&](double y) {
    const double e = spec.h_anti(y) - ha;
    return std::exp(-std::min(e, 700.0));
  };
  auto q = integrate(integrand, a, a + w, rel_tol_, 0.0);
  // remainder beyond the window: integrand <= e^{-60}, decays at scale 1/h
  const double rem = std::exp(-60.0) / std::max(1e-3, spec.h(a + w));
  return q.value + rem;
}

double StationaryKernel::log_u_raw(double x) const {
  if (x <= 0.0) return spec_->h_anti(x) + log_k0_;
  return std::log(K(x));
}

SteadyStateProfile compute_steady_state(const DriftSpec& spec, const Grid& grid,
                                        double quad_tol) {
  if (!(grid.x_min < spec.x0()) || !(grid.x_max > spec.x1()))
    throw std::invalid_argument("steady state: grid must cover [x0, x1]");

  StationaryKernel kernel(spec, quad_tol);
  SteadyStateProfile out;
  out.grid = grid;
  out.quadrature_tol = quad_tol;
  out.values.resize(grid.n_cells);

  double max_log = -1e300;
  std::vector<double> logs(grid.n_cells);
  for (int i = 0; i < grid.n_cells; ++i) {
    logs[i] = kernel.log_u_raw(grid.center(i));
    max_log = std::max(max_log, logs[i]);
  }
  double sum = 0.0;
  for (int i = 0; i < grid.n_cells; ++i) {
    out.values[i] = std::exp(logs[i] - max_log);
    sum += out.values[i];
  }
  const double mass_raw = sum * grid.dx();
  for (double& v : out.values) v /= mass_raw;
  out.n_inf = std::exp(-max_log) / mass_raw;
  out.log_k0 = kernel.log_u_raw(0.0);  // == log K(0)
  return out;
}

double truncated_lambda(const DriftSpec& spec, double R, double alpha_R) {
  if (!(R > spec.x1())) throw std::invalid_argument("truncated_lambda: need R > x1");
  if (!(alpha_R > 0.0)) throw std::invalid_argument("truncated_lambda: need alpha_R > 0");
  const double hR = spec.h(R);
  // stable form of (sqrt(hR^2 + 4a) - hR)/2 for large hR
  return 2.0 * alpha_R / (std::sqrt(hR * hR + 4.0 * alpha_R) + hR);
}

TruncatedSteadyState compute_truncated_steady_state(const DriftSpec& spec, double R,
                                                    double alpha_R, const Grid& grid,
                                                    double quad_tol) {
  if (!(grid.x_min < spec.x0()) || !(grid.x_max > spec.x1()))
    throw std::invalid_argument("truncated steady state: grid must cover [x0, x1]");
  if (!(R < grid.x_max))
    throw std::invalid_argument("truncated steady state: need R < x_max");

  TruncatedSteadyState out;
  out.R = R;
  out.alpha_R = alpha_R;
  out.lambda_R = truncated_lambda(spec, R, alpha_R);
  const double hR = spec.h(R);
  const double kappa = out.lambda_R + hR;

  StationaryKernel kernel(spec, quad_tol);
  const double KR = kernel.K(R);
  const double HR = spec.h_anti(R);
  const double junction = 1.0 / kappa - KR;

  out.profile.grid = grid;
  out.profile.quadrature_tol = quad_tol;
  out.profile.values.resize(grid.n_cells);
  out.profile.log_k0 = kernel.log_u_raw(0.0);

  for (int i = 0; i < grid.n_cells; ++i) {
    const double x = grid.center(i);
    if (x <= R) {
      const double expo = std::exp(std::min(spec.h_anti(x) - HR, 700.0));
      out.profile.values[i] = expo * junction + std::exp(kernel.log_u_raw(x));
    } else {
      out.profile.values[i] = std::exp(-out.lambda_R * (x - R)) / kappa;
    }
  }
  double sum = 0.0;
  for (double v : out.profile.values) sum += v;
  const double mass_raw = sum * grid.dx();

  // mass escaping past the grid would silently unbalance the solver
  const double beyond = std::exp(-out.lambda_R * (grid.x_max - R)) /
                        (kappa * out.lambda_R) / mass_raw;
  if (beyond > 1e-6)
    throw std::invalid_argument(
        "truncated steady state: grid too short, mass beyond x_max exceeds 1e-6");

  for (double& v : out.profile.values) v /= mass_raw;
  out.nbar_R = 1.0 / mass_raw;
  out.profile.n_inf = out.nbar_R;
  return out;
}

double tail_residual(const SteadyStateProfile& profile, const DriftSpec& spec,
                     double x_from) {
  if (x_from < spec.x1())
    throw std::invalid_argument("tail_residual: x_from must be >= x1");
  double sup = 0.0;
  for (int i = 0; i < profile.grid.n_cells; ++i) {
    const double x = profile.grid.center(i);
    if (x < x_from) continue;
    sup = std::max(sup, std::abs(spec.h(x) * profile.values[i] / profile.n_inf - 1.0));
  }
  return sup;
}

double fisher_integral(const SteadyStateProfile& profile, const DriftSpec& spec) {
  double total = 0.0;
  const double dx = profile.grid.dx();
  for (int i = 0; i < profile.grid.n_cells; ++i) {
    const double x = profile.grid.center(i);
    const double u = profile.values[i];
    if (u <= 0.0) continue;
    const double du = spec.h(x) * u - (x >= 0.0 ? profile.n_inf : 0.0);
    total += du * du / u * dx;
  }
  return total;
}

double left_tail_constant(const SteadyStateProfile& profile, const DriftSpec& spec) {
  // u(x) = n_inf e^{H(x)} K0 and H(x) = -x^2/2 + h0 x + const on the left branch
  return profile.n_inf * std::exp(spec.left_branch_const() + profile.log_k0);
}

}  // namespace fpif
