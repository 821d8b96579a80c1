#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "semimart/config.hpp"
#include "semimart/report.hpp"
#include "semimart/semimart.hpp"

using namespace semimart;
using nlohmann::json;

namespace {

json bm_sqrt_config() {
  return json::parse(R"json({
    "interval": {"l": 0, "r": "inf"},
    "mu": "0",
    "sigma": "1",
    "x0": 1.0,
    "c": 1.0,
    "g": {
      "value": "sqrt(x)",
      "dright": "0.5/sqrt(x)",
      "second_density": "(-0.25)/x^(1.5)",
      "curvature": "concave",
      "hints": {
        "dright": {"l": {"power_exponent": -0.5}},
        "second_density": {"l": {"power_exponent": -1.5}}
      }
    },
    "nu": {"density": "1"},
    "mc": {"seed": 7, "paths": 50, "dt": 0.001, "horizon": 2.0}
  })json");
}

}  // namespace

TEST_CASE("valid config loads and classifies") {
  ProblemConfig cfg = load_config(bm_sqrt_config());
  REQUIRE(cfg.g.has_value());
  CHECK(cfg.mc.seed == 7);
  CHECK(cfg.diffusion.drift.is_zero());
  SemimartingaleVerdict v = classify(cfg.diffusion, *cfg.g);
  CHECK(v.verdict == Verdict::Semimartingale);
}

TEST_CASE("all validation errors reported at once with JSON paths") {
  json bad = json::parse(R"json({
    "interval": {"l": 2, "r": 1},
    "mu": "2+*3",
    "sigma": 1,
    "x0": "one"
  })json");
  try {
    load_config(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.issues.size() >= 4);
    bool has_interval = false, has_mu = false, has_sigma = false,
         has_x0 = false, has_c = false;
    for (const auto& issue : e.issues) {
      if (issue.find("$.interval") == 0) has_interval = true;
      if (issue.find("$.mu") == 0) has_mu = true;
      if (issue.find("$.sigma") == 0) has_sigma = true;
      if (issue.find("$.x0") == 0) has_x0 = true;
      if (issue.find("$.c") == 0) has_c = true;
    }
    CHECK(has_interval);
    CHECK(has_mu);
    CHECK(has_sigma);
    CHECK(has_x0);
    CHECK(has_c);
  }
}

TEST_CASE("infinite endpoints parse from strings") {
  json j = bm_sqrt_config();
  j["interval"]["l"] = "-inf";
  j["interval"]["r"] = "inf";
  j["x0"] = 0.0;
  j["c"] = 0.0;
  ProblemConfig cfg = load_config(j);
  CHECK(cfg.diffusion.state_space.lower == -kInf);
  CHECK(cfg.diffusion.state_space.upper == kInf);
}

TEST_CASE("integral-defined g from config") {
  json j = bm_sqrt_config();
  j["g"] = json::parse(R"json({
    "value": {"anchor": 1.0, "value_at_anchor": 0.0},
    "dright": "(2+sin(1/x))/sqrt(x)",
    "second_density": "(-1)*cos(1/x)/x^(2.5)-0.5*(2+sin(1/x))/x^(1.5)",
    "hints": {
      "dright": {"l": {"power_exponent": -0.5, "oscillatory": true, "phase": "1/x"}},
      "second_density": {"l": {"oscillatory": true, "phase": "1/x"}}
    }
  })json");
  ProblemConfig cfg = load_config(j);
  REQUIRE(cfg.g.has_value());
  CHECK(cfg.g->value_from_integral);
  CHECK(cfg.g->value(1.0) == 0.0);
  SemimartingaleVerdict v = classify(cfg.diffusion, *cfg.g);
  CHECK(v.verdict == Verdict::NonSemiFirstKind);
}

TEST_CASE("atoms and measure blocks") {
  json j = bm_sqrt_config();
  j["interval"] = {{"l", 0.0}, {"r", 2.0}};
  j["g"] = json::parse(R"json({
    "value": "abs(x-1)",
    "dright": "(x<1?(-1):1)",
    "second_density": "0",
    "atoms": [[1.0, 2.0]],
    "curvature": "convex"
  })json");
  ProblemConfig cfg = load_config(j);
  auto atoms = cfg.g->atoms.collect(0.0, 2.0);
  REQUIRE(atoms.size() == 1);
  CHECK(atoms[0].weight == 2.0);
  CHECK(classify(cfg.diffusion, *cfg.g).verdict == Verdict::Semimartingale);

  json bad_atom = j;
  bad_atom["g"]["atoms"] = {{1.0, 0.0}};
  CHECK_THROWS_AS(load_config(bad_atom), ConfigError);
}

TEST_CASE("report body is deterministic and meta is separate") {
  ProblemConfig cfg = load_config(bm_sqrt_config());
  auto build = [&] {
    Report rep = make_report("classify", cfg.config_hash, cfg.mc.seed);
    SemimartingaleVerdict v = classify(cfg.diffusion, *cfg.g);
    rep.body["boundary"] = to_json(v.boundary);
    rep.body["semimartingale"] = to_json(v);
    rep.meta["timings_ms"]["classify"] = 123.456;  // run-dependent
    return rep;
  };
  Report a = build(), b = build();
  CHECK(a.body.dump() == b.body.dump());
  CHECK(a.body["schema_version"] == 1);
  CHECK(a.body["provenance"]["config_hash"] == cfg.config_hash);
  // text rendering works and mentions the verdict
  CHECK(a.to_text().find("Semimartingale") != std::string::npos);
  // shell tables are embedded for audit
  CHECK(a.body["semimartingale"]["cond_full"].contains("shells"));
}

TEST_CASE("config hash is stable") {
  CHECK(fnv1a_hex("abc") == fnv1a_hex("abc"));
  CHECK(fnv1a_hex("abc") != fnv1a_hex("abd"));
  ProblemConfig c1 = load_config(bm_sqrt_config());
  ProblemConfig c2 = load_config(bm_sqrt_config());
  CHECK(c1.config_hash == c2.config_hash);
}
