#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fpif/quadrature.hpp"

namespace fpif {

enum class DriftKind { Quadratic, Exponential, Custom };

std::string to_string(DriftKind kind);
DriftKind drift_kind_from_string(const std::string& name);

/// Drift value, slope and antiderivative at one point.
struct DriftPoint {
  double h;
  double h_prime;
  double h_anti;  // integral of h from 0 to x
};

/// User-supplied right branch for Custom drifts, valid on [x1, inf).
///
/// `h_anti` may be empty; the antiderivative is then accumulated numerically.
struct CustomBranch {
  std::function<double(double)> h;
  std::function<double(double)> h_prime;
  std::function<double(double)> h_anti;  // optional closed form of int_0^x-style primitive
};

struct IntegralCheck {
  bool finite = false;
  double value = 0.0;
  double error_bound = 0.0;
};

/// Outcome of checking the structural growth conditions on a drift.
/// Inadmissibility is recorded as data, not thrown.
struct AssumptionsReport {
  bool left_branch_ok = false;
  bool right_monotone_ok = false;
  IntegralCheck inv_h_integrable;   // int_{x1}^inf dx / h
  IntegralCheck zeta_integrable;    // int_{x1}^inf sup_{y>=x} h'/h^2
  IntegralCheck third_condition;    // int_{x1}^inf h(x) sup_{y>=x} h'^2/h^4 dx
  std::vector<std::string> failures;

  bool admissible() const { return failures.empty(); }
};

struct PoincareCondition {
  bool bounded = false;
  double sup_value = 0.0;  // +inf when unbounded
};

/// A drift function h with an affine left branch h(x) = -x + h0 for x <= x0,
/// a C^1 cubic Hermite blend on [x0, x1] and a superlinear right branch on
/// [x1, inf). Immutable after construction; all evaluation is pure.
class DriftSpec {
 public:
  static DriftSpec quadratic(double x0 = -1.0, double h0 = 0.0, double x1 = 1.0);
  static DriftSpec exponential(double x0 = -1.0, double h0 = 0.0, double x1 = 1.0);
  static DriftSpec custom(double x0, double h0, double x1, CustomBranch right);

  DriftKind kind() const { return kind_; }
  double x0() const { return x0_; }
  double h0() const { return h0_; }
  double x1() const { return x1_; }

  double h(double x) const;
  double h_prime(double x) const;
  double h_anti(double x) const;  // exact per-branch antiderivatives, zero at 0
  DriftPoint eval(double x) const;

  /// Integration constant of the left-branch antiderivative:
  /// h_anti(x) = -x^2/2 + h0 x + left_const for x <= x0.
  double left_branch_const() const;

  /// sup_{y >= x} h'(y)/h(y)^2 for x >= x1. Exact for built-in branches,
  /// refining grid maximum for Custom.
  double zeta(double x) const;

  /// int_x^inf dy/h(y) for x > x1 (time for a noiseless trajectory starting
  /// at x to escape). Closed-form tails for built-ins.
  double inv_h_tail(double x) const;

  AssumptionsReport validate() const;
  PoincareCondition poincare_condition_sup() const;

  /// Serialized form; Custom right branches are written as a sample table
  /// plus a fitted tail (see docs/drift-spec.md schema notes in README).
  std::string to_json() const;
  static DriftSpec from_json(const std::string& text);

 private:
  DriftSpec() = default;
  void finalize_blend();

  DriftKind kind_ = DriftKind::Quadratic;
  double x0_ = -1.0, h0_ = 0.0, x1_ = 1.0;
  // blend cubic in t = (x - x0)/(x1 - x0): c0 + c1 t + c2 t^2 + c3 t^3
  double blend_c_[4] = {0, 0, 0, 0};
  double blend_len_ = 2.0;
  double anti_at_x0_ = 0.0;  // h_anti(x0), fixes all branch constants
  double anti_at_x1_ = 0.0;
  CustomBranch custom_;
  // lazily extended checkpoints for numeric antiderivative of Custom branches
  mutable std::vector<std::pair<double, double>> custom_anti_checkpoints_;

  double right_h(double x) const;
  double right_h_prime(double x) const;
  double right_anti_diff(double a, double b) const;  // int_a^b h, a,b >= x1

  friend DriftSpec make_canonical_drift(DriftKind kind, double x0, double h0, double x1);
};

// Operation-style wrappers used throughout tests and tools.
DriftSpec make_canonical_drift(DriftKind kind, double x0, double h0, double x1);
DriftPoint eval_drift(const DriftSpec& spec, double x);
double zeta(const DriftSpec& spec, double x);
AssumptionsReport validate_assumptions(const DriftSpec& spec);
double blowup_time(const DriftSpec& spec, double x_start);
PoincareCondition poincare_condition_sup(const DriftSpec& spec);

}  // namespace fpif
