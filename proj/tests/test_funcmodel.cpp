#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "semimart/catalog.hpp"
#include "semimart/funcmodel.hpp"

using namespace semimart;

namespace {

DiffusionSpec bm() { return brownian_on({0.0, kInf}, 1.0, 1.0); }

DCFunction identity_dc() {
  DCFunction g;
  g.domain = {0.0, kInf};
  g.value = [](double x) { return x; };
  g.dright = [](double) { return 1.0; };
  g.second_density_is_zero = true;
  g.affine_slope = 1.0;
  return g;
}

}  // namespace

TEST_CASE("nu_g: driftless identity gives the zero measure") {
  SignedMeasure m = nu_g(bm(), identity_dc());
  CHECK(m.density_is_zero);
  CHECK(m.atoms.empty());
  CHECK(m.infinite_points.empty());
}

TEST_CASE("nu_g: kink atom gets half weight") {
  DCFunction g;
  g.domain = {0.0, 2.0};
  g.value = [](double x) { return std::fabs(x - 1.0); };
  g.dright = [](double x) { return x < 1.0 ? -1.0 : 1.0; };
  g.second_density_is_zero = true;
  g.atoms = AtomSource::list({{1.0, 2.0}});
  SignedMeasure m = nu_g(brownian_on({0.0, 2.0}, 1.0, 1.0), g);
  CHECK(m.density_is_zero);
  auto atoms = m.atoms.collect(0.0, 2.0);
  REQUIRE(atoms.size() == 1);
  CHECK(atoms[0].location == 1.0);
  CHECK(atoms[0].weight == doctest::Approx(1.0));
}

TEST_CASE("nu_g: Bessel(1/2) drift with identity g") {
  // mu = (delta-1)/(2y) with delta = 1/2: density -1/(4y); oracle by hand
  Preset p = build_preset("bessel-half-stopped");
  SignedMeasure m = nu_g(p.diffusion, p.g);
  for (double y : {0.1, 0.5, 1.0, 3.0}) {
    CHECK(m.density(y) == doctest::Approx(-1.0 / (4.0 * y)).epsilon(1e-12));
  }
  CHECK(m.atoms.empty());
}

TEST_CASE("variation_measure flips signs and is idempotent") {
  SignedMeasure m;
  m.density = [](double y) { return -1.0 / (4.0 * y); };
  m.atoms = AtomSource::list({{1.0, -3.0}});
  SignedMeasure v = variation_measure(m);
  CHECK(v.density(0.5) == doctest::Approx(0.5));
  auto atoms = v.atoms.collect(0.0, 2.0);
  REQUIRE(atoms.size() == 1);
  CHECK(atoms[0].weight == doctest::Approx(3.0));
  SignedMeasure vv = variation_measure(v);
  CHECK(vv.density(0.5) == doctest::Approx(v.density(0.5)));
  CHECK(vv.atoms.collect(0.0, 2.0)[0].weight == doctest::Approx(3.0));
  // zero measure stays zero
  SignedMeasure z = variation_measure(SignedMeasure::zero());
  CHECK(z.density_is_zero);
}

TEST_CASE("nu_g is linear in g") {
  DiffusionSpec d = bm();
  d.drift = CoefficientFunction::from_expr(Expr::parse("x/(1+x^2)"));
  DCFunction g1;
  g1.domain = {0.0, kInf};
  g1.value = [](double x) { return x * x; };
  g1.dright = [](double x) { return 2.0 * x; };
  g1.second_density = [](double) { return 2.0; };
  DCFunction g2;
  g2.domain = {0.0, kInf};
  g2.value = [](double x) { return std::sqrt(x); };
  g2.dright = [](double x) { return 0.5 / std::sqrt(x); };
  g2.second_density = [](double x) { return -0.25 * std::pow(x, -1.5); };

  double alpha = 2.5, beta = -1.5;
  DCFunction combo;
  combo.domain = {0.0, kInf};
  combo.value = [=](double x) { return alpha * g1.value(x) + beta * g2.value(x); };
  combo.dright = [=](double x) {
    return alpha * g1.dright(x) + beta * g2.dright(x);
  };
  combo.second_density = [=](double x) {
    return alpha * g1.second_density(x) + beta * g2.second_density(x);
  };

  SignedMeasure m1 = nu_g(d, g1), m2 = nu_g(d, g2), mc = nu_g(d, combo);
  for (double y : {0.25, 0.8, 1.5, 4.0}) {
    CHECK(mc.density(y) ==
          doctest::Approx(alpha * m1.density(y) + beta * m2.density(y))
              .epsilon(1e-12));
  }
}

TEST_CASE("dc_consistency_check: smooth, atomic, and broken cases") {
  DCFunction sq;
  sq.domain = {0.0, kInf};
  sq.value = [](double x) { return x * x; };
  sq.dright = [](double x) { return 2.0 * x; };
  sq.second_density = [](double) { return 2.0; };
  auto rep = dc_consistency_check(sq, 1.0, 2.0);
  CHECK(rep.ok);
  CHECK(std::fabs(rep.derivative_residual) < 1e-10);

  DCFunction kink;
  kink.domain = {0.0, 2.0};
  kink.value = [](double x) { return std::fabs(x - 1.0); };
  kink.dright = [](double x) { return x < 1.0 ? -1.0 : 1.0; };
  kink.second_density_is_zero = true;
  kink.atoms = AtomSource::list({{1.0, 2.0}});
  CHECK(dc_consistency_check(kink, 0.5, 1.5).ok);

  DCFunction broken = kink;
  broken.atoms = AtomSource::none();  // deliberately dropped atom
  auto bad = dc_consistency_check(broken, 0.5, 1.5);
  CHECK(!bad.ok);
  CHECK(bad.derivative_residual == doctest::Approx(2.0));
}

TEST_CASE("catalog battery passes consistency on random compacts") {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> lohi(0.05, 3.0);
  for (const auto& [name, g] : classification_battery()) {
    for (int i = 0; i < 10; ++i) {
      double a = lohi(rng), b = lohi(rng);
      if (a > b) std::swap(a, b);
      if (b - a < 0.05) b = a + 0.05;
      auto rep = dc_consistency_check(g, a, b, 1e-7, 1e-9);
      INFO(name, " on [", a, ", ", b, "]: ", rep.note);
      CHECK(rep.ok);
    }
  }
}

TEST_CASE("atom generator enumerates lazily per interval") {
  // atoms at 1/n with weight 1/n^2, accumulating at 0
  auto gen = [](std::size_t k) -> std::optional<Atom> {
    double n = static_cast<double>(k + 1);
    return Atom{1.0 / n, 1.0 / (n * n)};
  };
  AtomSource src = AtomSource::generator(gen, true);
  auto atoms = src.collect(0.2, 1.0);
  REQUIRE(atoms.size() == 5);  // 1/1 .. 1/5 > 0.2
  CHECK(atoms.front().location == doctest::Approx(0.2).epsilon(1e-12));

  // budget exhaustion is reported, not silently truncated
  bool ok = src.for_each_in(0.0, 1.0, 100, [](const Atom&) {});
  CHECK(!ok);
}

TEST_CASE("interval invariants and validation") {
  CHECK_THROWS(Interval{2.0, 1.0}.check());
  Interval J{0.0, kInf};
  CHECK(J.contains(0.5));
  CHECK(!J.contains(0.0));
  CHECK(!J.contains(-1.0));

  DiffusionSpec d = bm();
  CHECK_NOTHROW(d.validate());
  DiffusionSpec bad = d;
  bad.start = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  DiffusionSpec zero_sigma = d;
  zero_sigma.diffusion = CoefficientFunction::from_expr(Expr::parse("x-1"));
  CHECK_THROWS_AS(zero_sigma.validate(), std::invalid_argument);
}

TEST_CASE("coefficient evaluation failures name the point") {
  CoefficientFunction c =
      CoefficientFunction::from_expr(Expr::parse("sqrt(x-1)"));
  CHECK_THROWS_AS(c(0.5), DomainError);
  try {
    c(0.5);
  } catch (const DomainError& e) {
    CHECK(e.point == doctest::Approx(0.5));
  }
}

TEST_CASE("integral-defined value matches a closed form") {
  // dright = 2x, anchor 1, value 1: g(x) = x^2
  DCFunction g = make_integral_dc(
      {0.0, kInf}, [](double x) { return 2.0 * x; },
      [](double) { return 2.0; }, AtomSource::none(), 1.0, 1.0);
  CHECK(g.value(2.0) == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(g.value(0.25) == doctest::Approx(0.0625).epsilon(1e-9));
  CHECK(g.value(1.0) == 1.0);
}

TEST_CASE("reflection swaps endpoint data") {
  Preset p = build_preset("bessel-half-stopped");
  DiffusionSpec r = reflect(p.diffusion);
  CHECK(r.state_space.lower == -kInf);
  CHECK(r.state_space.upper == 0.0);
  CHECK(r.start == -1.0);
  CHECK(r.drift(-0.5) == doctest::Approx(-p.diffusion.drift(0.5)));
  CHECK(r.rho_power_upper == p.diffusion.rho_power_lower);
}
