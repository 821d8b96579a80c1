#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "semimart/quadrature.hpp"

using namespace semimart;

TEST_CASE("polynomials are exact") {
  QuadratureEngine engine;
  auto r = engine.integrate([](double x) { return x * x; }, 0.0, 2.0);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
  r = engine.integrate([](double) { return 1.0; }, -3.0, 5.0);
  CHECK(r.value == doctest::Approx(8.0).epsilon(1e-15));
}

TEST_CASE("integrable endpoint singularity") {
  QuadratureEngine engine;
  auto r = engine.integrate([](double x) { return 1.0 / std::sqrt(x); }, 1e-12,
                            1.0);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(2.0 - 2e-6).epsilon(1e-9));
}

TEST_CASE("kink handled via breakpoints") {
  QuadratureEngine engine;
  auto f = [](double x) { return std::fabs(x - 0.3); };
  std::vector<double> bps = {0.3};
  auto r = engine.integrate(f, 0.0, 1.0, bps);
  CHECK(r.converged);
  // int |x-0.3| over [0,1] = 0.3^2/2 + 0.7^2/2
  CHECK(r.value == doctest::Approx(0.5 * (0.09 + 0.49)).epsilon(1e-12));
}

TEST_CASE("oscillatory integral with phase panels") {
  QuadratureEngine engine;
  // int_{1/(40pi)}^{1/pi} |cos(1/x)| x^{-2} dx = int_pi^{40pi} |cos u| du
  //   = 39 arches of area 2 plus boundary terms; exact value 2*39 = 78
  auto f = [](double x) { return std::fabs(std::cos(1.0 / x)) / (x * x); };
  auto phase = [](double x) { return 1.0 / x; };
  double pi = 3.14159265358979323846;
  auto r = engine.integrate_oscillatory(f, 1.0 / (40.0 * pi), 1.0 / pi, phase,
                                        1 << 16);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(78.0).epsilon(1e-8));
}

TEST_CASE("oscillatory panel cap reports failure") {
  QuadratureEngine engine;
  auto f = [](double x) { return std::sin(1.0 / x); };
  auto phase = [](double x) { return 1.0 / x; };
  auto r = engine.integrate_oscillatory(f, 1e-9, 1.0, phase, 64);
  CHECK(!r.converged);
}

TEST_CASE("error bound is honest on a smooth integrand") {
  QuadratureEngine engine;
  auto r = engine.integrate([](double x) { return std::exp(-x * x); }, 0.0, 1.0);
  CHECK(r.converged);
  double exact = 0.74682413281242702;  // sqrt(pi)/2 * erf(1)
  CHECK(std::fabs(r.value - exact) <= std::max(r.error, 1e-13));
}
