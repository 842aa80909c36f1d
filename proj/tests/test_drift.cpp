#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "fpif/drift.hpp"
#include "fpif/quadrature.hpp"

using fpif::DriftKind;
using fpif::DriftSpec;

namespace {

const DriftSpec& quad_canonical() {
  static const DriftSpec spec = DriftSpec::quadratic();
  return spec;
}

const DriftSpec& exp_canonical() {
  static const DriftSpec spec = DriftSpec::exponential();
  return spec;
}

// Independent oracle: solve the 4x4 linear system for the cubic matching
// (p, p') at both endpoints, by Gaussian elimination on the monomial basis.
double hermite_cubic_oracle(double xa, double pa, double da, double xb, double pb,
                            double db, double x) {
  double A[4][5] = {
      {1, xa, xa * xa, xa * xa * xa, pa},
      {0, 1, 2 * xa, 3 * xa * xa, da},
      {1, xb, xb * xb, xb * xb * xb, pb},
      {0, 1, 2 * xb, 3 * xb * xb, db},
  };
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
    for (int c = 0; c < 5; ++c) std::swap(A[col][c], A[pivot][c]);
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = A[r][col] / A[col][col];
      for (int c = col; c < 5; ++c) A[r][c] -= f * A[col][c];
    }
  }
  double coeff[4];
  for (int i = 0; i < 4; ++i) coeff[i] = A[i][4] / A[i][i];
  return coeff[0] + x * (coeff[1] + x * (coeff[2] + x * coeff[3]));
}

DriftSpec linear_tail_custom() {
  fpif::CustomBranch branch;
  branch.h = [](double x) { return x; };
  branch.h_prime = [](double) { return 1.0; };
  branch.h_anti = [](double x) { return 0.5 * x * x; };
  return DriftSpec::custom(-1.0, 0.0, 1.0, std::move(branch));
}

}  // namespace

TEST_SUITE_BEGIN("drift");

TEST_CASE("canonical branch values") {
  const auto& q = quad_canonical();
  CHECK(q.h(-3.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(q.h(2.0) == doctest::Approx(4.0).epsilon(1e-15));
  const auto& e = exp_canonical();
  CHECK(e.h(2.0) == doctest::Approx(std::exp(2.0)).epsilon(1e-15));
}

TEST_CASE("blend matches the independent Hermite oracle") {
  const auto& q = quad_canonical();
  const double expected = hermite_cubic_oracle(-1.0, 1.0, -1.0, 1.0, 1.0, 2.0, 0.0);
  CHECK(expected == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(q.h(0.0) == doctest::Approx(expected).epsilon(1e-13));
  for (double x : {-0.9, -0.4, 0.3, 0.7, 0.99}) {
    CHECK(q.h(x) ==
          doctest::Approx(hermite_cubic_oracle(-1, 1, -1, 1, 1, 2, x)).epsilon(1e-12));
  }
  const auto& e = exp_canonical();
  const double ee = std::exp(1.0);
  for (double x : {-0.5, 0.0, 0.5})
    CHECK(e.h(x) ==
          doctest::Approx(hermite_cubic_oracle(-1, 1, -1, 1, ee, ee, x)).epsilon(1e-12));
}

TEST_CASE("construction rejects misplaced junctions") {
  CHECK_THROWS(fpif::make_canonical_drift(DriftKind::Quadratic, 0.5, 0.0, 1.0));
  CHECK_THROWS(fpif::make_canonical_drift(DriftKind::Quadratic, -1.0, 0.0, -0.5));
}

TEST_CASE("eval_drift antiderivative") {
  const auto& q = quad_canonical();
  CHECK(fpif::eval_drift(q, 0.0).h_anti == 0.0);
  const double diff = fpif::eval_drift(q, 2.0).h_anti - fpif::eval_drift(q, 1.0).h_anti;
  CHECK(diff == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
  const auto left = fpif::eval_drift(q, -3.0);
  CHECK(left.h == doctest::Approx(3.0));
  CHECK(left.h_prime == doctest::Approx(-1.0));
  // Gaussian-branch shape at -inf: h_anti(x) + x^2/2 is affine in x
  const double c1 = q.h_anti(-4.0) + 8.0;
  const double c2 = q.h_anti(-6.0) + 18.0;
  CHECK(c1 == doctest::Approx(c2).epsilon(1e-12));  // h0 = 0
}

TEST_CASE("antiderivative differentiates back to h") {
  const double delta = 1e-4;
  for (const auto* spec : {&quad_canonical(), &exp_canonical()}) {
    for (double x : {-5.0, -1.0, -0.3, 0.0, 0.8, 1.0, 2.5, 6.0}) {
      const double fd =
          (spec->h_anti(x + delta) - spec->h_anti(x - delta)) / (2.0 * delta);
      CHECK(std::abs(fd - spec->h(x)) <= 5.0 * delta * delta * std::max(1.0, spec->h(x)));
    }
  }
}

TEST_CASE("zeta closed forms and grid-max oracle") {
  const auto& q = quad_canonical();
  CHECK(fpif::zeta(q, 2.0) == doctest::Approx(0.25).epsilon(1e-14));
  const auto& e = exp_canonical();
  CHECK(fpif::zeta(e, 3.0) == doctest::Approx(std::exp(-3.0)).epsilon(1e-14));

  // oracle: dense maximization of h'/h^2 over [x, x+60]
  for (double x : {1.0, 2.0, 5.0}) {
    double sup = 0.0;
    for (int i = 0; i <= 200000; ++i) {
      const double y = x + 60.0 * i / 200000.0;
      sup = std::max(sup, q.h_prime(y) / (q.h(y) * q.h(y)));
    }
    CHECK(fpif::zeta(q, x) == doctest::Approx(sup).epsilon(1e-9));
  }
}

TEST_CASE("zeta is non-increasing and vanishes at infinity") {
  for (const auto* spec : {&quad_canonical(), &exp_canonical()}) {
    double prev = fpif::zeta(*spec, spec->x1());
    for (double x = spec->x1() + 0.25; x < 40.0; x += 0.25) {
      const double z = fpif::zeta(*spec, x);
      CHECK(z <= prev + 1e-15);
      prev = z;
    }
    CHECK(fpif::zeta(*spec, 40.0) < 1e-4);
  }
  CHECK_THROWS(fpif::zeta(quad_canonical(), 0.5));
}

TEST_CASE("assumption certification: canonical drifts pass") {
  const auto rq = fpif::validate_assumptions(quad_canonical());
  CHECK(rq.admissible());
  CHECK(rq.left_branch_ok);
  CHECK(rq.right_monotone_ok);
  CHECK(rq.inv_h_integrable.finite);
  CHECK(rq.inv_h_integrable.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rq.zeta_integrable.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rq.third_condition.value == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
  CHECK(rq.inv_h_integrable.error_bound < 1e-6);

  const auto re = fpif::validate_assumptions(exp_canonical());
  CHECK(re.admissible());
  CHECK(re.inv_h_integrable.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  CHECK(re.zeta_integrable.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  CHECK(re.third_condition.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("assumption certification: linear tail fails only 1/h integrability") {
  const auto spec = linear_tail_custom();
  const auto rep = fpif::validate_assumptions(spec);
  CHECK_FALSE(rep.admissible());
  CHECK_FALSE(rep.inv_h_integrable.finite);
  CHECK(rep.zeta_integrable.finite);  // zeta = 1/x^2 on the tail
  CHECK(rep.third_condition.finite);  // h zeta^2 = 1/x^3 on the tail
  REQUIRE(rep.failures.size() == 1);
  CHECK(rep.failures[0] == "inv_h_integrable");
}

TEST_CASE("blowup times") {
  const auto& q = quad_canonical();
  CHECK(fpif::blowup_time(q, 2.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(fpif::blowup_time(q, 10.0) == doctest::Approx(0.1).epsilon(1e-14));
  const auto& e = exp_canonical();
  CHECK(fpif::blowup_time(e, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK_THROWS(fpif::blowup_time(q, 0.5));
}

TEST_CASE("blowup time additivity against direct quadrature") {
  const auto& q = quad_canonical();
  double prev = fpif::blowup_time(q, 1.5);
  for (double x = 2.0; x <= 12.0; x += 0.5) {
    const double t = fpif::blowup_time(q, x);
    CHECK(t < prev);  // strictly decreasing
    prev = t;
  }
  for (auto [a, b] : std::vector<std::array<double, 2>>{{2.0, 3.0}, {1.5, 9.0}}) {
    const auto seg = fpif::integrate([&](double y) { return 1.0 / q.h(y); }, a, b, 1e-12);
    const double diff = fpif::blowup_time(q, a) - fpif::blowup_time(q, b);
    CHECK(diff == doctest::Approx(seg.value).epsilon(1e-8));
  }
}

TEST_CASE("poincare growth condition") {
  const auto pe = fpif::poincare_condition_sup(exp_canonical());
  CHECK(pe.bounded);
  CHECK(pe.sup_value == doctest::Approx(1.0).epsilon(1e-9));

  const auto pq = fpif::poincare_condition_sup(quad_canonical());
  CHECK_FALSE(pq.bounded);
  CHECK(std::isinf(pq.sup_value));

  // x log^2(x+e) tail grows too slowly: g = h int 1/h ~ x log x is unbounded
  fpif::CustomBranch branch;
  branch.h = [](double x) {
    const double l = std::log(x + M_E);
    return x * l * l;
  };
  branch.h_prime = [](double x) {
    const double l = std::log(x + M_E);
    return l * l + 2.0 * x * l / (x + M_E);
  };
  const auto spec = DriftSpec::custom(-1.0, 0.0, 1.0, std::move(branch));
  const auto pc = fpif::poincare_condition_sup(spec);
  CHECK_FALSE(pc.bounded);
}

TEST_CASE("C1 continuity across branches at a thousand points") {
  const double eps = 1e-13;
  for (const auto* spec : {&quad_canonical(), &exp_canonical()}) {
    std::vector<double> xs;
    for (int i = 0; i < 1000; ++i) xs.push_back(-6.0 + 12.0 * i / 999.0);
    xs.push_back(spec->x0());
    xs.push_back(spec->x1());
    for (double x : xs) {
      const double jump_h = std::abs(spec->h(x + eps) - spec->h(x - eps));
      const double jump_hp = std::abs(spec->h_prime(x + eps) - spec->h_prime(x - eps));
      CHECK(jump_h <= 1e-10 * std::max(1.0, std::abs(spec->h(x))));
      CHECK(jump_hp <= 1e-10 * std::max(1.0, std::abs(spec->h_prime(x))));
    }
  }
}

TEST_CASE("json round trip") {
  const auto& q = quad_canonical();
  const auto back = DriftSpec::from_json(q.to_json());
  CHECK(back.kind() == DriftKind::Quadratic);
  for (double x : {-3.0, -0.5, 0.0, 1.5, 7.0}) CHECK(back.h(x) == q.h(x));

  const auto custom = linear_tail_custom();
  const auto cback = DriftSpec::from_json(custom.to_json());
  for (double x : {1.5, 3.0, 10.0})
    CHECK(cback.h(x) == doctest::Approx(custom.h(x)).epsilon(1e-3));
}

TEST_SUITE_END();
