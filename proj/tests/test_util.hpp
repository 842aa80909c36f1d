#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fpif/drift.hpp"
#include "fpif/fp_solver.hpp"
#include "fpif/steady_state.hpp"

namespace testutil {

/// Fourth-order finite-difference derivative of grid samples at index i,
/// one-sided so the stencil never straddles the kink cell `i_kink`
/// (the kink may sit at a stencil endpoint; the samples are still smooth
/// on each closed side).
inline double fd4_derivative(const std::vector<double>& v, int i, double dx,
                             int i_kink, int n) {
  auto centered_ok = [&](int j) {
    if (j - 2 < 0 || j + 2 >= n) return false;
    return i_kink < 0 || j <= i_kink - 2 || j >= i_kink + 2;
  };
  auto forward_ok = [&](int j) {
    if (j + 4 >= n) return false;
    return i_kink < 0 || j >= i_kink || j + 4 < i_kink;
  };
  auto backward_ok = [&](int j) {
    if (j - 4 < 0) return false;
    return i_kink < 0 || j <= i_kink || j - 4 > i_kink;
  };
  if (centered_ok(i))
    return (v[i - 2] - 8 * v[i - 1] + 8 * v[i + 1] - v[i + 2]) / (12 * dx);
  if (forward_ok(i))
    return (-25 * v[i] + 48 * v[i + 1] - 36 * v[i + 2] + 16 * v[i + 3] - 3 * v[i + 4]) /
           (12 * dx);
  if (backward_ok(i))
    return (25 * v[i] - 48 * v[i - 1] + 36 * v[i - 2] - 16 * v[i - 3] + 3 * v[i - 4]) /
           (12 * dx);
  // fall back to a centered difference at awkward corners
  if (i > 0 && i + 1 < n) return (v[i + 1] - v[i - 1]) / (2 * dx);
  return i == 0 ? (v[1] - v[0]) / dx : (v[n - 1] - v[n - 2]) / dx;
}

/// max_i |h(x_i) u_i - u'_i - n_inf [x_i >= 0]| with the derivative from
/// independent finite differences (never the stationary relation itself).
inline double ode_residual_max(const fpif::SteadyStateProfile& profile,
                               const fpif::DriftSpec& spec) {
  const auto& g = profile.grid;
  const int n = g.n_cells;
  // locate the cell whose center is (nearly) zero, if any
  int i_kink = -1;
  for (int i = 0; i < n; ++i)
    if (std::abs(g.center(i)) < 0.25 * g.dx()) i_kink = i;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = g.center(i);
    const double du = fd4_derivative(profile.values, i, g.dx(), i_kink, n);
    const double res =
        spec.h(x) * profile.values[i] - du - (x >= 0.0 ? profile.n_inf : 0.0);
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

/// Deterministic xorshift for test data; avoids reusing the library RNG.
struct TestRng {
  uint64_t s;
  explicit TestRng(uint64_t seed) : s(seed ? seed : 1) {}
  double uniform() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return static_cast<double>(s >> 11) * 0x1.0p-53;
  }
};

/// Random probability density on the grid: mixture of a few bumps plus a
/// uniform floor, normalized to midpoint mass one.
inline fpif::DensityField random_density(const fpif::Grid& grid, TestRng& rng) {
  fpif::DensityField out;
  out.cells.assign(grid.n_cells, 0.0);
  const int bumps = 2 + static_cast<int>(rng.uniform() * 3);
  for (int b = 0; b < bumps; ++b) {
    const double c = grid.x_min + rng.uniform() * (grid.x_max - grid.x_min);
    const double s = 0.2 + rng.uniform();
    const double w = 0.1 + rng.uniform();
    for (int i = 0; i < grid.n_cells; ++i) {
      const double t = (grid.center(i) - c) / s;
      out.cells[i] += w * std::exp(-0.5 * t * t);
    }
  }
  for (int i = 0; i < grid.n_cells; ++i) out.cells[i] += 1e-3;
  double mass = 0.0;
  for (double v : out.cells) mass += v;
  mass *= grid.dx();
  for (double& v : out.cells) v /= mass;
  return out;
}

}  // namespace testutil
