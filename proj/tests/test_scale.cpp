#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "semimart/catalog.hpp"
#include "semimart/scale.hpp"

using namespace semimart;

namespace {

DiffusionSpec drifted(const char* mu, double c,
                      Interval J = {-kInf, kInf}) {
  DiffusionSpec d;
  d.state_space = J;
  d.drift = CoefficientFunction::from_expr(Expr::parse(mu));
  d.diffusion = CoefficientFunction::constant(1.0);
  d.start = c;
  d.reference = c;
  return d;
}

}  // namespace

TEST_CASE("driftless scale is the identity shift") {
  DiffusionSpec d = brownian_on({0.0, kInf}, 1.0, 1.0);
  CHECK(rho(d, 0.3) == 1.0);
  CHECK(rho(d, 7.0) == 1.0);
  // exact to 1e-12: the quadrature of a constant is a closed rule
  CHECK(scale(d, 3.0) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(scale(d, 0.25) == doctest::Approx(-0.75).epsilon(1e-13));
  CHECK(scale(d, 1.0) == 0.0);
}

TEST_CASE("constant negative drift: closed-form rho and s") {
  // mu = -1, c = 1: rho(x) = e^{2(x-1)}, s(x) = (e^{2(x-1)} - 1)/2
  DiffusionSpec d = drifted("-1", 1.0);
  CHECK(rho(d, 2.0) == doctest::Approx(7.38905609893065022723).epsilon(1e-10));
  CHECK(scale(d, 2.0) ==
        doctest::Approx(3.19452804946532511362).epsilon(1e-9));
  CHECK(rho(d, 1.0) == 1.0);
}

TEST_CASE("Bessel(1/2) drift: rho = sqrt(x), s = (2/3)(x^{3/2}-1)") {
  Preset p = build_preset("bessel-half-stopped");
  const DiffusionSpec& d = p.diffusion;
  CHECK(rho(d, 4.0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(rho(d, 0.25) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(scale(d, 4.0) == doctest::Approx(14.0 / 3.0).epsilon(1e-9));
  // s strictly increasing on a sorted query set
  double prev = -kInf;
  for (double x : {0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 9.0}) {
    double s = scale(d, x);
    CHECK(s > prev);
    prev = s;
  }
}

TEST_CASE("scale limits") {
  DiffusionSpec bm = brownian_on({0.0, kInf}, 1.0, 1.0);
  auto lo = scale_limit(bm, EndpointSide::Lower);
  REQUIRE(lo.finite);
  CHECK(lo.value == doctest::Approx(-1.0).epsilon(1e-8));
  auto hi = scale_limit(bm, EndpointSide::Upper);
  CHECK(!hi.finite);
  CHECK(hi.value == kInf);

  Preset bessel = build_preset("bessel-half-stopped");
  auto b_lo = scale_limit(bessel.diffusion, EndpointSide::Lower);
  REQUIRE(b_lo.finite);
  CHECK(b_lo.value == doctest::Approx(-2.0 / 3.0).epsilon(1e-8));
  CHECK(b_lo.verdict.hint_used);

  // mu = 1/y on (0,inf): rho = x^{-2}, int_0 rho diverges -> s(0+) = -inf
  DiffusionSpec d = drifted("1/x", 1.0, {0.0, kInf});
  auto dl = scale_limit(d, EndpointSide::Lower);
  CHECK(!dl.finite);
  CHECK(dl.value == -kInf);
  CHECK(dl.verdict.divergent());
}

TEST_CASE("rho stays positive and anchored at the reference") {
  DiffusionSpec d = drifted("sin(x)", 0.5, {0.0, kInf});
  CHECK(rho(d, 0.5) == 1.0);
  for (double x : {0.05, 0.2, 1.0, 3.0, 10.0}) CHECK(rho(d, x) > 0.0);
}

TEST_CASE("scale_term_power composes only with certified data") {
  DiffusionSpec bm = brownian_on({0.0, kInf}, 1.0, 1.0);
  auto p = bm.scale_model().scale_term_power(EndpointSide::Lower);
  REQUIRE(p.has_value());
  CHECK(*p == doctest::Approx(1.0));
  // upper endpoint has no finite scale limit: no certified power
  CHECK(!bm.scale_model().scale_term_power(EndpointSide::Upper).has_value());

  Preset bessel = build_preset("bessel-half-stopped");
  auto bp = bessel.diffusion.scale_model().scale_term_power(EndpointSide::Lower);
  REQUIRE(bp.has_value());
  CHECK(*bp == doctest::Approx(1.0));
}

TEST_CASE("natural coordinates delegate to the base model") {
  Preset q2 = build_preset("question-II-first-kind");
  const ScaleModel& sm = q2.diffusion.scale_model();
  REQUIRE(sm.base_model() != nullptr);
  // s_Y(y) = g^{-1}(y) - 1, rho_Y(y) = 1/g'(g^{-1}(y)); check at y = g(1) = 0
  CHECK(sm.scale(0.0) == doctest::Approx(0.0).epsilon(1e-9));
  double g2 = q2.diffusion.natural->map(2.0);
  CHECK(sm.scale(g2) == doctest::Approx(1.0).epsilon(1e-6));
  double expected_rho = 1.0 / q2.diffusion.natural->map_derivative(2.0);
  CHECK(sm.rho(g2) == doctest::Approx(expected_rho).epsilon(1e-6));
  auto lim = sm.limit(EndpointSide::Lower);
  REQUIRE(lim.finite);
  CHECK(lim.value == doctest::Approx(-1.0).epsilon(1e-8));
}
