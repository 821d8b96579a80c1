#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "semimart/boundary.hpp"
#include "semimart/catalog.hpp"

using namespace semimart;

TEST_CASE("feller test: Brownian motion on (0,inf)") {
  DiffusionSpec bm = brownian_on({0.0, kInf}, 1.0, 1.0);
  CHECK(feller_exit_test(bm, EndpointSide::Lower) == ExitVerdict::Yes);
  CHECK(feller_exit_test(bm, EndpointSide::Upper) == ExitVerdict::No);
}

TEST_CASE("feller test: sigma = x kills the exit at 0") {
  DiffusionSpec d;
  d.state_space = {0.0, kInf};
  d.drift = CoefficientFunction::constant(0.0);
  EndpointHints sh;
  sh.lower.power_exponent = 1.0;
  d.diffusion = CoefficientFunction::from_expr(Expr::parse("x"), sh);
  d.start = 1.0;
  d.reference = 1.0;
  ExitEvidence ev;
  CHECK(feller_exit_test(d, EndpointSide::Lower, &ev) == ExitVerdict::No);
  REQUIRE(ev.feller_integral.has_value());
  CHECK(ev.feller_integral->divergent());
  CHECK(ev.attracts_without_exit);
}

TEST_CASE("feller test: Bessel(1/2) exits at 0") {
  Preset p = build_preset("bessel-half-stopped");
  ExitEvidence ev;
  CHECK(feller_exit_test(p.diffusion, EndpointSide::Lower, &ev) ==
        ExitVerdict::Yes);
  CHECK(ev.scale_limit.finite);
}

TEST_CASE("case taxonomy") {
  DiffusionSpec bm_half = brownian_on({0.0, kInf}, 1.0, 1.0);
  Preset sqrt_bm = build_preset("sqrt-bm");
  BoundaryReport b = classify_case(bm_half, sqrt_bm.g);
  CHECK(b.case_label == CaseLabel::B);
  REQUIRE(b.g_limit_l.has_value());
  CHECK(*b.g_limit_l == doctest::Approx(0.0).epsilon(1e-7));

  // whole line: case A
  DiffusionSpec line = brownian_on({-kInf, kInf}, 0.0, 0.0);
  DCFunction ident;
  ident.domain = line.state_space;
  ident.value = [](double x) { return x; };
  ident.dright = [](double) { return 1.0; };
  ident.second_density_is_zero = true;
  ident.affine_slope = 1.0;
  ident.anchor = 0.0;
  BoundaryReport a = classify_case(line, ident);
  CHECK(a.case_label == CaseLabel::A);
  CHECK(a.exits_l == ExitVerdict::No);
  CHECK(a.exits_r == ExitVerdict::No);

  // g = 1/x has no finite limit at the exit endpoint: refused
  DCFunction recip;
  recip.domain = {0.0, kInf};
  recip.value = [](double x) { return 1.0 / x; };
  recip.dright = [](double x) { return -1.0 / (x * x); };
  recip.second_density = [](double x) { return 2.0 / (x * x * x); };
  recip.curvature = DCFunction::Curvature::Convex;
  recip.anchor = 1.0;
  BoundaryReport na = classify_case(bm_half, recip);
  CHECK(na.case_label == CaseLabel::NotApplicable);

  // both endpoints exit on a bounded interval: case D
  Preset kink = build_preset("atom-kink");
  BoundaryReport d = classify_case(kink.diffusion, kink.g);
  CHECK(d.case_label == CaseLabel::D);
  REQUIRE(d.g_limit_l.has_value());
  REQUIRE(d.g_limit_r.has_value());
  CHECK(*d.g_limit_l == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(*d.g_limit_r == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("probe-based endpoint limits") {
  DCFunction root;
  root.domain = {0.0, kInf};
  root.value = [](double x) { return std::sqrt(x); };
  root.dright = [](double x) { return 0.5 / std::sqrt(x); };
  root.second_density = [](double x) { return -0.25 * std::pow(x, -1.5); };
  root.anchor = 1.0;
  auto probes = default_probe_sequence(root.domain, EndpointSide::Lower, 1.0);
  REQUIRE(probes.size() >= 20);
  auto lim = g_endpoint_limit(root, EndpointSide::Lower, probes, 1e-9);
  REQUIRE(lim.has_value());
  CHECK(*lim == doctest::Approx(0.0).epsilon(1e-8));

  // log x drifts to -inf: absent
  DCFunction logf;
  logf.domain = {0.0, kInf};
  logf.value = [](double x) { return std::log(x); };
  logf.dright = [](double x) { return 1.0 / x; };
  logf.second_density = [](double x) { return -1.0 / (x * x); };
  logf.curvature = DCFunction::Curvature::Concave;
  logf.anchor = 1.0;
  CHECK(!g_endpoint_limit(logf, EndpointSide::Lower, probes, 1e-9).has_value());

  CHECK_THROWS_AS(
      g_endpoint_limit(root, EndpointSide::Lower,
                       std::vector<double>{0.5, 0.25, 0.125}, 1e-9),
      std::invalid_argument);
}

TEST_CASE("oscillatory integral-defined limit (oracle-pinned)") {
  // g(x) = int_1^x (2+sin(1/y))/sqrt(y) dy; independent oracle (mpmath,
  // Fresnel closed form): g(0+) = -4.57147329264570519
  Preset p = build_preset("example-4.1");
  std::string note;
  auto lim = g_endpoint_limit_auto(p.g, EndpointSide::Lower, &note);
  REQUIRE(lim.has_value());
  INFO(note);
  CHECK(*lim == doctest::Approx(-4.57147329264570519).epsilon(5e-3));
}

TEST_CASE("mirror symmetry of the boundary classification") {
  Preset p = build_preset("bessel-half-stopped");
  BoundaryReport orig = classify_case(p.diffusion, p.g);
  BoundaryReport mirrored = classify_case(reflect(p.diffusion), reflect(p.g));
  CHECK(orig.exits_l == mirrored.exits_r);
  CHECK(orig.exits_r == mirrored.exits_l);
  CHECK(orig.case_label == CaseLabel::B);
  CHECK(mirrored.case_label == CaseLabel::C);
  CHECK(orig.s_l == doctest::Approx(-mirrored.s_r).epsilon(1e-9));
}

TEST_CASE("proposition coherence: exit implies finite scale limit") {
  for (const char* name :
       {"bm-identity", "sqrt-bm", "example-4.1", "bessel-half-stopped",
        "besq-delta", "atom-kink", "remark-3.6-ii"}) {
    Preset p = build_preset(name);
    BoundaryReport b = classify_case(p.diffusion, p.g);
    INFO(name);
    if (b.exits_l == ExitVerdict::Yes) CHECK(std::isfinite(b.s_l));
    if (b.exits_r == ExitVerdict::Yes) CHECK(std::isfinite(b.s_r));
    if (b.s_l == -kInf) CHECK(b.exits_l == ExitVerdict::No);
    if (b.s_r == kInf) CHECK(b.exits_r == ExitVerdict::No);
  }
}
