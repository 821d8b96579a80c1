#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "semimart/convergence.hpp"

using namespace semimart;

namespace {

Integrand power_integrand(double p) {
  Integrand f;
  f.f = [p](double x) { return std::pow(x, p); };
  return f;
}

ConvergenceVerdict test_at_zero(const Integrand& f) {
  return l1loc_test(f, SignedMeasure::lebesgue(), 0.0, 1.0);
}

}  // namespace

TEST_CASE("power-law battery at 0+ (shell rule, no hints)") {
  // convergent: p > -1 with estimate 1/(p+1)
  for (double p : {-0.9, -0.5, 0.0, 1.0}) {
    auto v = test_at_zero(power_integrand(p));
    INFO("p = ", p, ": ", v.decision_note);
    CHECK(v.convergent());
    double tol = p == -0.9 ? 5e-2 : 1e-6;
    CHECK(v.estimate == doctest::Approx(1.0 / (p + 1.0)).epsilon(tol));
  }
  for (double p : {-1.0, -1.5, -2.0}) {
    auto v = test_at_zero(power_integrand(p));
    INFO("p = ", p, ": ", v.decision_note);
    CHECK(v.divergent());
  }
}

TEST_CASE("reliability near the boundary exponent") {
  CHECK(test_at_zero(power_integrand(-0.95)).convergent());
  CHECK(test_at_zero(power_integrand(-1.05)).divergent());
}

TEST_CASE("x^{-1/2} estimate is 2") {
  auto v = test_at_zero(power_integrand(-0.5));
  REQUIRE(v.convergent());
  CHECK(v.estimate == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("infinite endpoint") {
  // int_1^inf x^{-2} = 1 converges; int_1^inf x^{-1} diverges
  auto conv = l1loc_test(power_integrand(-2.0), SignedMeasure::lebesgue(),
                         kInf, 1.0);
  REQUIRE(conv.convergent());
  CHECK(conv.estimate == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(l1loc_test(power_integrand(-1.0), SignedMeasure::lebesgue(), kInf, 1.0)
            .divergent());
  // toward -inf with anchor on the negative axis
  Integrand f;
  f.f = [](double x) { return 1.0 / (x * x); };
  auto neg = l1loc_test(f, SignedMeasure::lebesgue(), -kInf, -1.0);
  CHECK(neg.convergent());
  CHECK(neg.estimate == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("paper oscillatory pair: x|h'| diverges, x h^2 converges") {
  // h(x) = (2+sin(1/x))/sqrt(x)
  Integrand xhp;  // x |h'(x)|
  xhp.f = [](double x) {
    double s = std::sin(1.0 / x), c = std::cos(1.0 / x);
    double hp = -c * std::pow(x, -2.5) - 0.5 * (2.0 + s) * std::pow(x, -1.5);
    return x * std::fabs(hp);
  };
  xhp.oscillatory = true;
  xhp.phase = [](double x) { return 1.0 / x; };
  auto v1 = l1loc_test(xhp, SignedMeasure::lebesgue(), 0.0, 1.0);
  INFO(v1.decision_note);
  CHECK(v1.divergent());

  Integrand xh2;  // x h(x)^2 = (2+sin(1/x))^2, hinted band exponent 0
  xh2.f = [](double x) {
    double h = (2.0 + std::sin(1.0 / x)) / std::sqrt(x);
    return x * h * h;
  };
  xh2.power_exponent = 0.0;
  xh2.oscillatory = true;
  xh2.phase = [](double x) { return 1.0 / x; };
  auto v2 = l1loc_test(xh2, SignedMeasure::lebesgue(), 0.0, 1.0);
  CHECK(v2.convergent());
  CHECK(v2.hint_used);

  // without the hint the stable-frontier rule still certifies the decay
  Integrand unhinted = xh2;
  unhinted.power_exponent.reset();
  auto v3 = l1loc_test(unhinted, SignedMeasure::lebesgue(), 0.0, 1.0);
  INFO(v3.decision_note);
  CHECK(v3.convergent());
}

TEST_CASE("atoms: single atom and accumulating stream") {
  SignedMeasure delta;
  delta.density_is_zero = true;
  delta.atoms = AtomSource::list({{0.5, 1.0}});
  Integrand ident;
  ident.f = [](double x) { return x; };
  auto v = l1loc_test(ident, delta, 0.0, 1.0);
  REQUIRE(v.convergent());
  CHECK(v.estimate == doctest::Approx(0.5));

  // atoms w_n = 2^{-n} at 1/n: sum x*w converges
  SignedMeasure stream;
  stream.density_is_zero = true;
  stream.atoms = AtomSource::generator(
      [](std::size_t k) -> std::optional<Atom> {
        if (k > 80) return std::nullopt;
        double n = static_cast<double>(k + 1);
        return Atom{1.0 / n, std::pow(2.0, -n)};
      },
      true);
  auto vs = l1loc_test(ident, stream, 0.0, 1.0);
  CHECK(vs.convergent());

  // atoms w_n = 1/n at 1/n: sum (1/n)*(1/n) converges; with f = 1/x the
  // masses are the harmonic series and must diverge
  SignedMeasure harmonic;
  harmonic.density_is_zero = true;
  harmonic.atoms = AtomSource::generator(
      [](std::size_t k) -> std::optional<Atom> {
        double n = static_cast<double>(k + 1);
        return Atom{1.0 / n, 1.0 / n};
      },
      true);
  Integrand inv;
  inv.f = [](double x) { return 1.0 / x; };
  auto vd = l1loc_test(inv, harmonic, 0.0, 1.0);
  INFO(vd.decision_note);
  CHECK(vd.divergent());
}

TEST_CASE("zero integrand converges with estimate 0") {
  Integrand zero;
  zero.f = [](double) { return 0.0; };
  auto v = l1loc_test(zero, SignedMeasure::lebesgue(), 0.0, 1.0);
  REQUIRE(v.convergent());
  CHECK(v.estimate == 0.0);
}

TEST_CASE("hint overrides shells exactly") {
  auto f = power_integrand(-0.999);
  f.power_exponent = -0.999;
  CHECK(test_at_zero(f).convergent());
  auto f2 = power_integrand(-1.001);
  f2.power_exponent = -1.001;
  CHECK(test_at_zero(f2).divergent());
  // at an infinite endpoint the inequality flips
  auto f3 = power_integrand(-1.5);
  f3.power_exponent = -1.5;
  CHECK(l1loc_test(f3, SignedMeasure::lebesgue(), kInf, 1.0).convergent());
}

TEST_CASE("monotonicity on nested pairs") {
  // 0 <= f <= g on (0,1) and g convergent forces f convergent
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> pg(-0.95, 0.0);
  for (int i = 0; i < 20; ++i) {
    double p_big = pg(rng);
    double p_small = p_big + std::uniform_real_distribution<double>(
                                  0.05, 0.9)(rng);
    auto big = test_at_zero(power_integrand(p_big));
    auto small = test_at_zero(power_integrand(p_small));
    REQUIRE(big.convergent());
    CHECK(small.convergent());
    CHECK(small.estimate <= big.estimate * (1.0 + 1e-6));
  }
}

TEST_CASE("signed accumulation tracks the signed integral") {
  // f = sign-flipping derivative-like integrand; abs decides, signed sums
  Integrand f;
  f.f = [](double x) { return std::cos(3.0 * x); };
  ShellRuleOptions opts;
  opts.want_signed = true;
  auto v = l1loc_test(f, SignedMeasure::lebesgue(), 0.0, 1.0, opts);
  REQUIRE(v.convergent());
  CHECK(v.estimate == doctest::Approx(std::sin(3.0) / 3.0).epsilon(1e-7));
}

TEST_CASE("verdict struct invariants") {
  auto conv = test_at_zero(power_integrand(-0.5));
  CHECK(conv.convergent());
  CHECK(std::isfinite(conv.estimate));
  auto div = test_at_zero(power_integrand(-2.0));
  for (std::size_t i = 1; i < div.shells.size(); ++i)
    CHECK(div.shells[i].index == div.shells[i - 1].index + 1);
}
