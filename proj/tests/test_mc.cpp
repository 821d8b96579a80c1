#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "semimart/catalog.hpp"
#include "semimart/mc.hpp"
#include "semimart/rng.hpp"

using namespace semimart;

namespace {

DiffusionSpec bm(Interval J = {0.0, kInf}, double x0 = 1.0) {
  return brownian_on(J, x0, x0);
}

DiffusionSpec deterministic_drift() {
  // sigma = 0 is outside the model class; only used to pin the ODE limit of
  // the stepper, so validation is skipped on purpose
  DiffusionSpec d;
  d.state_space = {-kInf, kInf};
  d.drift = CoefficientFunction::constant(1.0);
  d.diffusion = CoefficientFunction::constant(0.0);
  d.start = 0.0;
  d.reference = 0.0;
  return d;
}

}  // namespace

TEST_CASE("counter rng is a pure function of (seed, stream, index)") {
  CounterRng a(42, 7), b(42, 7), c(43, 7), d(42, 8);
  CHECK(a.normal(123) == b.normal(123));
  CHECK(a.normal(123) != c.normal(123));
  CHECK(a.normal(123) != d.normal(123));
  CHECK(a.uniform(5) > 0.0);
  CHECK(a.uniform(5) <= 1.0);
  // moments sanity over 200k draws
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double z = a.normal(i);
    sum += z;
    sum2 += z * z;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.02));
  CHECK(std::fabs(sum / n) < 3.5 / std::sqrt((double)n) + 0.001);
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("degenerate steppers") {
  PathSample constant = simulate_path(deterministic_drift(), 0.01, 1.0, 1, 0);
  // mu=1, sigma=0: Y_t = t exactly on the grid
  for (std::size_t i = 0; i < constant.times.size(); ++i)
    CHECK(constant.values[i] ==
          doctest::Approx(constant.times[i]).epsilon(1e-12));

  DiffusionSpec frozen = deterministic_drift();
  frozen.drift = CoefficientFunction::constant(0.0);
  PathSample flat = simulate_path(frozen, 0.01, 0.5, 1, 0);
  for (double v : flat.values) CHECK(v == 0.0);
}

TEST_CASE("determinism: identical streams, any thread count") {
  DiffusionSpec d = bm();
  PathSample p1 = simulate_path(d, 1e-3, 2.0, 99, 5);
  PathSample p2 = simulate_path(d, 1e-3, 2.0, 99, 5);
  REQUIRE(p1.values.size() == p2.values.size());
  for (std::size_t i = 0; i < p1.values.size(); ++i)
    CHECK(p1.values[i] == p2.values[i]);  // bit-identical

  auto r1 = ray_knight_check(1.0, 0.0, {0.5}, 500, 1e-3, 7, /*threads=*/1);
  auto r4 = ray_knight_check(1.0, 0.0, {0.5}, 500, 1e-3, 7, /*threads=*/4);
  REQUIRE(r1.levels.size() == 1);
  CHECK(r1.levels[0].mean == r4.levels[0].mean);          // bit-identical
  CHECK(r1.levels[0].variance == r4.levels[0].variance);  // bit-identical
}

TEST_CASE("paths stay in the closed interval and absorb") {
  DiffusionSpec d = bm({0.0, 2.0}, 1.0);
  int absorbed = 0;
  for (int s = 0; s < 50; ++s) {
    PathSample p = simulate_path(d, 1e-3, 5.0, 11, s);
    for (double v : p.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 2.0);
    }
    if (p.absorbed) {
      ++absorbed;
      double last = p.values.back();
      CHECK((last == 0.0 || last == 2.0));
    }
  }
  CHECK(absorbed > 40);  // exit from (0,2) by t=5 is overwhelmingly likely
}

TEST_CASE("local time estimator on a constant path") {
  DiffusionSpec frozen = deterministic_drift();
  frozen.drift = CoefficientFunction::constant(0.0);
  frozen.diffusion = CoefficientFunction::constant(1.0);
  frozen.diffusion = CoefficientFunction::constant(0.0);
  PathSample flat = simulate_path(frozen, 0.01, 1.0, 1, 0);
  CHECK(estimate_local_time(flat, frozen, 0.5, 0.01) == 0.0);
}

TEST_CASE("ray-knight moments at reduced size") {
  // N=4000, dt=4e-4: loose 12% bands around mean 2u*, var 4u^2
  auto rep = ray_knight_check(1.0, 0.0, {0.25, 0.5, 1.0}, 4000, 4e-4, 2024);
  REQUIRE(rep.levels.size() == 3);
  for (const auto& st : rep.levels) {
    INFO("level ", st.level, " mean ", st.mean, " var ", st.variance);
    CHECK(st.mean ==
          doctest::Approx(st.expected_mean).epsilon(0.12));
    CHECK(st.variance ==
          doctest::Approx(st.expected_variance).epsilon(0.25));
  }
  CHECK(rep.unfinished_paths == 0);
}

TEST_CASE("halving eps and dt moves ray-knight means within noise") {
  auto coarse = ray_knight_check(1.0, 0.0, {0.5}, 3000, 8e-4, 5);
  auto fine = ray_knight_check(1.0, 0.0, {0.5}, 3000, 2e-4, 5);
  double se = std::sqrt(coarse.levels[0].variance / 3000.0) +
              std::sqrt(fine.levels[0].variance / 3000.0);
  CHECK(std::fabs(coarse.levels[0].mean - fine.levels[0].mean) < 4.0 * se + 0.02);
}

TEST_CASE("absorption probability at reduced size") {
  auto rep = absorption_probability_check(1.0, 0.0, 1.0, 20000, 5e-4, 31);
  CHECK(rep.expected == doctest::Approx(0.3173105078629141).epsilon(1e-12));
  CHECK(std::fabs(rep.empirical - rep.expected) < 0.02);
  CHECK(!rep.bias_note.empty());
}

TEST_CASE("path functionals: identity and square") {
  DiffusionSpec d = bm();
  PathSample p = simulate_path(d, 1e-3, 1.0, 3, 1);

  Preset ident = build_preset("bm-identity");
  PathFunctionals f = path_functionals(p, d, ident.g, 0.01);
  // qv_t = int sigma^2 = t; A = 0
  double t_end = p.times.back();
  CHECK(f.qv.back() == doctest::Approx(t_end).epsilon(1e-9));
  CHECK(f.a_path.back() == 0.0);
  CHECK(f.var_a.back() == 0.0);

  DCFunction square;
  square.domain = {0.0, kInf};
  square.value = [](double x) { return x * x; };
  square.dright = [](double x) { return 2.0 * x; };
  square.second_density = [](double) { return 2.0; };
  PathFunctionals fs = path_functionals(p, d, square, 0.01);
  // A_t = t exactly on the grid (1/2 g'' sigma^2 = 1)
  CHECK(fs.a_path.back() == doctest::Approx(t_end).epsilon(1e-9));
  // decomposition residual is zero by construction
  for (std::size_t i = 0; i < p.times.size(); i += 97) {
    double m = fs.g_path[i] - fs.g_path[0] - fs.a_path[i];
    CHECK(std::isfinite(m));
  }
}

TEST_CASE("martingale increments of M for g=x have near-zero mean") {
  DiffusionSpec d = bm({-kInf, kInf}, 0.0);
  const int n_paths = 400;
  double sum = 0.0, sum2 = 0.0;
  int count = 0;
  for (int s = 0; s < n_paths; ++s) {
    PathSample p = simulate_path(d, 1e-2, 1.0, 17, s);
    // disjoint-block increments of M = Y (A = 0 for g=x, mu=0)
    for (std::size_t i = 10; i < p.values.size(); i += 10) {
      double inc = p.values[i] - p.values[i - 10];
      sum += inc;
      sum2 += inc * inc;
      ++count;
    }
  }
  double mean = sum / count;
  double sd = std::sqrt(sum2 / count - mean * mean);
  CHECK(std::fabs(mean) <= 3.0 * sd / std::sqrt((double)count));
}

TEST_CASE("occupation identity on sigma=1 paths") {
  DiffusionSpec d = bm();
  double dt = 1e-4;
  double eps = 0.5 * std::sqrt(dt);
  for (int s = 0; s < 20; ++s) {
    PathSample p = simulate_path(d, dt, 1.0, 23, s);
    double t = 1.0;
    double t_eff = p.absorbed ? std::min(p.absorbed->time, t) : t;
    double residual = occupation_identity_residual(p, d, t, eps);
    INFO("stream ", s, " t_eff ", t_eff);
    CHECK(residual <= 0.03 * std::max(t_eff, 0.05));
  }
  PathSample p0 = simulate_path(d, dt, 0.0, 23, 0);
  CHECK(occupation_identity_residual(p0, d, 0.0, eps) == 0.0);
}

TEST_CASE("divergence probes corroborate the deterministic kinds") {
  ProbeOptions opts;
  opts.paths = 120;
  opts.horizon = 3.0;

  Preset sqrt_bm = build_preset("sqrt-bm");
  auto semi = divergence_probe(sqrt_bm.diffusion, sqrt_bm.g, 1e-3, 1, opts);
  INFO("sqrt qv: ", semi.qv_medians[0], " ", semi.qv_medians[1], " ",
       semi.qv_medians[2], " var: ", semi.var_a_medians[0], " ",
       semi.var_a_medians[1], " ", semi.var_a_medians[2]);
  CHECK(semi.kind == EmpiricalKind::SemimartingaleLike);

  Preset e41 = build_preset("example-4.1");
  auto first = divergence_probe(e41.diffusion, e41.g, 1e-3, 1, opts);
  INFO("4.1 qv: ", first.qv_medians[0], " ", first.qv_medians[1], " ",
       first.qv_medians[2], " var: ", first.var_a_medians[0], " ",
       first.var_a_medians[1], " ", first.var_a_medians[2]);
  CHECK(first.kind == EmpiricalKind::FirstKindLike);

  Preset e42 = build_preset("example-4.2");
  auto second = divergence_probe(e42.diffusion, e42.g, 1e-3, 1, opts);
  INFO("4.2 qv: ", second.qv_medians[0], " ", second.qv_medians[1], " ",
       second.qv_medians[2], " var: ", second.var_a_medians[0], " ",
       second.var_a_medians[1], " ", second.var_a_medians[2]);
  CHECK(second.kind == EmpiricalKind::SecondKindLike);
}

TEST_CASE("bessel occupation of zero vanishes with the band") {
  auto fractions =
      bessel_zero_occupation(0.5, 1.0, {0.2, 0.1, 0.05}, 2e-4, 2.0, 60, 12);
  REQUIRE(fractions.size() == 3);
  CHECK(fractions[0] < 0.2);
  CHECK(fractions[1] < fractions[0]);
  CHECK(fractions[2] < fractions[1]);
  CHECK(fractions[2] < 0.05);
}
