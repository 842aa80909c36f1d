#pragma once

#include <functional>

namespace fpif {

/// Result of a numerical integration: value plus a certified error bound
/// propagated from the embedded Gauss/Kronrod difference.
struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;

  QuadResult& operator+=(const QuadResult& other) {
    value += other.value;
    error += other.error;
    converged = converged && other.converged;
    return *this;
  }
};

/// Single Gauss-Kronrod 7-15 panel on [a, b]. No subdivision.
QuadResult gk15_panel(const std::function<double(double)>& f, double a, double b);

/// Adaptive Gauss-Kronrod integration on the finite interval [a, b].
///
/// Bisects the worst panel until the summed Kronrod error estimate is below
/// abs_tol + rel_tol * |integral|, or max_panels is reached (converged=false).
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-10, double abs_tol = 0.0,
                     int max_panels = 4000);

}  // namespace fpif
