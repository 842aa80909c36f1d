#pragma once

#include <vector>

#include "fpif/drift.hpp"
#include "fpif/grid.hpp"

namespace fpif {

/// Grid-sampled stationary density. `values` are samples at cell centers
/// scaled so that the midpoint-rule mass sum(values)*dx is exactly one;
/// `n_inf` is the matching stationary flux constant, so the pointwise
/// relation h(x) u(x) - u'(x) = n_inf * [x >= 0] holds on the samples.
struct SteadyStateProfile {
  Grid grid;
  std::vector<double> values;
  double n_inf = 0.0;
  double quadrature_tol = 0.0;
  double log_k0 = 0.0;  // log of int_0^inf e^{-H}, fixes the left-tail constant
};

/// Stationary state of the absorbed problem with rate alpha_R on [R, inf).
struct TruncatedSteadyState {
  SteadyStateProfile profile;
  double R = 0.0;
  double alpha_R = 0.0;
  double lambda_R = 0.0;
  double nbar_R = 0.0;
};

/// Pointwise evaluator for exp(H)-weighted tail integrals of a drift.
/// K(x) = int_{max(0,x)}^inf exp(-(H(y) - H(max(0,x)))) dy. All profile
/// formulas reduce to K, which stays O(1/h) and never overflows.
class StationaryKernel {
 public:
  StationaryKernel(const DriftSpec& spec, double rel_tol = 1e-10);
  double K(double x) const;
  double log_u_raw(double x) const;  // log of e^{H(x)} J(x) up to the flux constant

 private:
  const DriftSpec* spec_;
  double rel_tol_;
  double log_k0_;
};

SteadyStateProfile compute_steady_state(const DriftSpec& spec, const Grid& grid,
                                        double quad_tol = 1e-10);

/// lambda_R = (sqrt(h(R)^2 + 4 alpha) - h(R)) / 2, the tail decay rate of the
/// absorbed stationary state.
double truncated_lambda(const DriftSpec& spec, double R, double alpha_R);

TruncatedSteadyState compute_truncated_steady_state(const DriftSpec& spec, double R,
                                                    double alpha_R, const Grid& grid,
                                                    double quad_tol = 1e-10);

/// sup_{x >= x_from} |h(x) u(x) / n_inf - 1| over grid samples.
double tail_residual(const SteadyStateProfile& profile, const DriftSpec& spec,
                     double x_from);

/// int (u')^2 / u with the exact derivative u' = h u - n_inf [x >= 0].
double fisher_integral(const SteadyStateProfile& profile, const DriftSpec& spec);

/// Left-tail prefactor: u(x) = C exp(-x^2/2 + h0 x) for x < x0.
double left_tail_constant(const SteadyStateProfile& profile, const DriftSpec& spec);

}  // namespace fpif
