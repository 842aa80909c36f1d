#pragma once

#include <string>
#include <vector>

#include "fpif/drift.hpp"
#include "fpif/fp_solver.hpp"
#include "fpif/grid.hpp"
#include "fpif/steady_state.hpp"

namespace fpif {

enum class EntropyKind { Square, Abs, PositivePart };

std::string to_string(EntropyKind kind);

/// sum H(u_i / ref_i) ref_i dx for the convex profile H selected by `kind`.
/// PositivePart uses H(z) = max(0, |z| - c0).
double relative_entropy(const DensityField& u, const SteadyStateProfile& ref,
                        EntropyKind kind, double c0 = 1.0);

/// L1 distance weighted by 1 + max(0, -x): penalizes mass far to the left.
double weighted_e_norm(const DensityField& u, const DensityField& v, const Grid& grid);

struct RateFit {
  double lambda_hat = 0.0;
  double m_hat = 0.0;
  double r_squared = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  bool reliable = false;  // false when r_squared < 0.9
};

/// Least squares line through (t, log v) on the window; lambda_hat = -slope.
RateFit fit_exponential_rate(const std::vector<double>& times,
                             const std::vector<double>& values, double window_lo,
                             double window_hi);

/// phi(x) = int_0^x e^{-H(y)} (int_{-inf}^y e^{H(z)} dz) dy, the bounded
/// increasing solution of phi'' + h phi' = 1 with phi(0) = 0. c_phi is its
/// limit at +infinity (grid value plus an analytic tail remainder).
class PhiProfile {
 public:
  PhiProfile() = default;

  Grid grid;
  std::vector<double> values;  // phi at cell centers
  double c_phi = 0.0;

  double value_at(double x) const;
  double prime_at(double x) const;  // e^{-H} G, exact up to quadrature

  /// Constant for the absorbed problem: the identity
  /// int_0^t N dtau = (t + I(0) - I(t)) / c holds with
  /// c = phi(R) + 1/alpha - phi'(R)/(lambda_R + h(R)); equals 1/Nbar_R in the
  /// continuum and tends to c_phi as R grows.
  double c_truncated(const DriftSpec& spec, double R, double alpha_R) const;

 private:
  friend PhiProfile compute_phi(const DriftSpec& spec, const Grid& grid, double quad_tol);
  std::vector<double> face_x_;      // faces of the accumulation mesh
  std::vector<double> log_g_;       // log int_{-inf}^{face} e^H
  std::vector<double> phi_face_;    // phi at faces
  const DriftSpec* spec_ = nullptr;
  double quad_tol_ = 1e-10;
};

PhiProfile compute_phi(const DriftSpec& spec, const Grid& grid, double quad_tol = 1e-10);

/// Residual of the integrated-firing-rate identity at each snapshot time.
std::vector<double> phi_identity_residual(const EvolutionTrace& trace,
                                          const PhiProfile& phi,
                                          const DriftSpec& spec);

struct FluxProbeRow {
  double time;
  std::vector<double> h_u_at_probe;  // one per probe
  double firing_rate;
};

struct FluxCheckTable {
  std::vector<double> probes;
  std::vector<FluxProbeRow> rows;
  std::vector<double> time_avg_discrepancy;  // mean |h u - N| / max(N, eps) per probe
};

FluxCheckTable boundary_flux_check(const EvolutionTrace& trace, const DriftSpec& spec,
                                   const std::vector<double>& probes);

struct PoincareRate {
  bool applicable = false;
  double k = 0.0;         // sup (1-U) U / u over the grid
  double mu_lower = 0.0;  // (4k)^-1, fixed-convention lower bound
};

PoincareRate poincare_rate(const SteadyStateProfile& profile, const DriftSpec& spec);

/// Fill trace.entropy_series / trace.e_norm_series at the snapshot times.
void attach_entropy_series(EvolutionTrace& trace, const SteadyStateProfile& ref,
                           EntropyKind kind, double c0 = 1.0);
void attach_e_norm_series(EvolutionTrace& trace, const SteadyStateProfile& ref);

}  // namespace fpif
