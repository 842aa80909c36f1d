#include <cmath>

#include "doctest.h"
#include "fpif/quadrature.hpp"

TEST_SUITE_BEGIN("quadrature");

TEST_CASE("gk15 panel is exact on low-degree polynomials") {
  auto q = fpif::gk15_panel([](double x) { return 3 * x * x - 2 * x + 1; }, -1.0, 2.0);
  // antiderivative x^3 - x^2 + x
  CHECK(q.value == doctest::Approx(9.0 - 3.0 + 3.0).epsilon(1e-14));
}

TEST_CASE("adaptive integration hits requested tolerance") {
  auto q = fpif::integrate([](double x) { return std::exp(-x * x); }, -6.0, 6.0, 1e-12);
  CHECK(q.converged);
  CHECK(q.value == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
  CHECK(std::abs(q.value - std::sqrt(M_PI)) <= 10 * q.error + 1e-14);
}

TEST_CASE("adaptive integration resolves narrow boundary layers") {
  // decay scale 1e-4 inside a unit interval
  auto q = fpif::integrate([](double x) { return std::exp(-1e4 * x); }, 0.0, 1.0, 1e-11);
  CHECK(q.converged);
  CHECK(q.value == doctest::Approx(1e-4).epsilon(1e-10));
}

TEST_CASE("degenerate interval integrates to zero") {
  auto q = fpif::integrate([](double x) { return x; }, 2.0, 2.0);
  CHECK(q.value == 0.0);
  CHECK(q.converged);
}

TEST_SUITE_END();
