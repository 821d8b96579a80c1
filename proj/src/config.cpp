#include "semimart/config.hpp"

#include <cmath>
#include <fstream>

namespace semimart {

using nlohmann::json;

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

namespace {

struct Loader {
  std::vector<std::string> issues;

  void issue(const std::string& path, const std::string& msg) {
    issues.push_back(path + ": " + msg);
  }

  double number(const json& j, const std::string& path, double fallback) {
    if (!j.is_number()) {
      issue(path, "expected a number");
      return fallback;
    }
    return j.get<double>();
  }

  // endpoint values accept numbers or the strings "-inf"/"inf"
  double endpoint(const json& j, const std::string& path, double fallback) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
      std::string s = j.get<std::string>();
      if (s == "inf" || s == "+inf") return kInf;
      if (s == "-inf") return -kInf;
    }
    issue(path, "expected a number or \"-inf\"/\"inf\"");
    return fallback;
  }

  std::optional<Expr> expression(const json& j, const std::string& path) {
    if (!j.is_string()) {
      issue(path, "expected an expression string");
      return std::nullopt;
    }
    try {
      return Expr::parse(j.get<std::string>());
    } catch (const ParseError& e) {
      issue(path, e.what());
      return std::nullopt;
    }
  }

  EndpointHint hint_block(const json& j, const std::string& path) {
    EndpointHint h;
    if (!j.is_object()) {
      issue(path, "expected an object");
      return h;
    }
    if (j.contains("power_exponent"))
      h.power_exponent = number(j["power_exponent"], path + ".power_exponent",
                                0.0);
    if (j.contains("oscillatory")) {
      if (!j["oscillatory"].is_boolean())
        issue(path + ".oscillatory", "expected a boolean");
      else
        h.oscillatory = j["oscillatory"].get<bool>();
    }
    if (j.contains("phase")) {
      if (auto e = expression(j["phase"], path + ".phase")) {
        Expr phase = *e;
        h.phase = [phase](double x) { return phase.eval(x); };
      }
    }
    return h;
  }

  EndpointHints hints_block(const json& j, const std::string& path) {
    EndpointHints h;
    if (!j.is_object()) {
      issue(path, "expected an object with \"l\"/\"r\" keys");
      return h;
    }
    if (j.contains("l")) h.lower = hint_block(j["l"], path + ".l");
    if (j.contains("r")) h.upper = hint_block(j["r"], path + ".r");
    return h;
  }

  AtomSource atoms_block(const json& j, const std::string& path) {
    if (!j.is_array()) {
      issue(path, "expected an array of [location, weight] pairs");
      return AtomSource::none();
    }
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const json& a = j[i];
      std::string p = path + "[" + std::to_string(i) + "]";
      if (!a.is_array() || a.size() != 2 || !a[0].is_number() ||
          !a[1].is_number()) {
        issue(p, "expected [location, weight]");
        continue;
      }
      double w = a[1].get<double>();
      if (w == 0.0) {
        issue(p, "atom weight must be nonzero");
        continue;
      }
      atoms.push_back({a[0].get<double>(), w});
    }
    return atoms.empty() ? AtomSource::none() : AtomSource::list(std::move(atoms));
  }

  SignedMeasure measure_block(const json& j, const std::string& path) {
    SignedMeasure m;
    if (!j.is_object()) {
      issue(path, "expected an object");
      return m;
    }
    if (j.contains("density")) {
      if (auto e = expression(j["density"], path + ".density")) {
        Expr density = *e;
        m.density = [density](double x) { return density.eval(x); };
        m.density_is_zero = density.is_constant_zero();
        m.breakpoints = [density](double lo, double hi, std::size_t cap,
                                  std::vector<double>& out) {
          return density.breakpoints(lo, hi, cap, out);
        };
      }
    } else {
      m.density_is_zero = true;
    }
    if (j.contains("atoms")) m.atoms = atoms_block(j["atoms"], path + ".atoms");
    if (j.contains("infinite_points")) {
      const json& ip = j["infinite_points"];
      if (!ip.is_array()) {
        issue(path + ".infinite_points", "expected an array of numbers");
      } else {
        for (const auto& v : ip) {
          if (!v.is_number())
            issue(path + ".infinite_points", "expected numbers");
          else
            m.infinite_points.push_back(v.get<double>());
        }
      }
    }
    if (j.contains("hints"))
      m.density_hints = hints_block(j["hints"], path + ".hints");
    return m;
  }

  DCFunction g_block(const json& j, Interval domain) {
    DCFunction g;
    g.domain = domain;
    if (!j.is_object()) {
      issue("$.g", "expected an object");
      return g;
    }
    for (const char* req : {"dright", "second_density"})
      if (!j.contains(req)) issue(std::string("$.g.") + req, "missing field");

    EndpointHints dright_hints, second_hints;
    if (j.contains("hints")) {
      const json& h = j["hints"];
      if (!h.is_object()) {
        issue("$.g.hints", "expected an object");
      } else {
        if (h.contains("dright"))
          dright_hints = hints_block(h["dright"], "$.g.hints.dright");
        if (h.contains("second_density"))
          second_hints =
              hints_block(h["second_density"], "$.g.hints.second_density");
      }
    }
    g.dright_hints = dright_hints;
    g.second_hints = second_hints;

    std::optional<Expr> dright, second;
    if (j.contains("dright")) dright = expression(j["dright"], "$.g.dright");
    if (j.contains("second_density"))
      second = expression(j["second_density"], "$.g.second_density");
    if (dright) {
      Expr e = *dright;
      g.dright = [e](double x) { return e.eval(x); };
      g.dright_expr = e;
      if (auto c = e.constant_value()) g.affine_slope = *c;
    }
    if (second) {
      Expr e = *second;
      g.second_density = [e](double x) { return e.eval(x); };
      g.second_expr = e;
      g.second_density_is_zero = e.is_constant_zero();
    }
    if (j.contains("atoms")) g.atoms = atoms_block(j["atoms"], "$.g.atoms");
    if (j.contains("curvature")) {
      std::string c = j["curvature"].is_string()
                          ? j["curvature"].get<std::string>()
                          : std::string();
      if (c == "convex")
        g.curvature = DCFunction::Curvature::Convex;
      else if (c == "concave")
        g.curvature = DCFunction::Curvature::Concave;
      else if (c == "unknown" || c.empty())
        g.curvature = DCFunction::Curvature::Unknown;
      else
        issue("$.g.curvature", "expected convex|concave|unknown");
    }

    if (j.contains("value") && j["value"].is_string()) {
      if (auto v = expression(j["value"], "$.g.value")) {
        Expr e = *v;
        g.value = [e](double x) { return e.eval(x); };
      }
    } else if (j.contains("value") && j["value"].is_object()) {
      const json& v = j["value"];
      double anchor = v.contains("anchor")
                          ? number(v["anchor"], "$.g.value.anchor", 1.0)
                          : 1.0;
      double at = v.contains("value_at_anchor")
                      ? number(v["value_at_anchor"],
                               "$.g.value.value_at_anchor", 0.0)
                      : 0.0;
      if (dright) {
        Expr e = *dright;
        BreakpointsFn bps = [e](double lo, double hi, std::size_t cap,
                                std::vector<double>& out) {
          return e.breakpoints(lo, hi, cap, out);
        };
        DCFunction built = make_integral_dc(
            domain, g.dright, g.second_density, g.atoms, anchor, at,
            dright_hints, second_hints, bps);
        built.dright_expr = g.dright_expr;
        built.second_expr = g.second_expr;
        built.second_density_is_zero = g.second_density_is_zero;
        built.curvature = g.curvature;
        built.affine_slope = g.affine_slope;
        built.anchor = anchor;
        return built;
      }
    } else if (j.contains("value")) {
      issue("$.g.value",
            "expected an expression string or {anchor, value_at_anchor}");
    } else {
      issue("$.g.value", "missing field");
    }
    return g;
  }
};

}  // namespace

ProblemConfig load_config(const json& j) {
  Loader loader;
  ProblemConfig out;
  out.raw = j;
  out.config_hash = fnv1a_hex(j.dump());

  if (!j.is_object()) {
    loader.issue("$", "expected a JSON object");
    throw ConfigError(std::move(loader.issues));
  }
  for (const char* req : {"interval", "mu", "sigma", "x0", "c"})
    if (!j.contains(req)) loader.issue(std::string("$.") + req, "missing field");

  Interval J{0.0, 1.0};
  if (j.contains("interval")) {
    const json& i = j["interval"];
    if (!i.is_object() || !i.contains("l") || !i.contains("r")) {
      loader.issue("$.interval", "expected {\"l\": ..., \"r\": ...}");
    } else {
      J.lower = loader.endpoint(i["l"], "$.interval.l", 0.0);
      J.upper = loader.endpoint(i["r"], "$.interval.r", 1.0);
      if (!(J.lower < J.upper)) loader.issue("$.interval", "needs l < r");
    }
  }

  EndpointHints mu_hints, sigma_hints;
  if (j.contains("hints")) {
    const json& h = j["hints"];
    if (h.is_object()) {
      if (h.contains("mu")) mu_hints = loader.hints_block(h["mu"], "$.hints.mu");
      if (h.contains("sigma"))
        sigma_hints = loader.hints_block(h["sigma"], "$.hints.sigma");
      if (h.contains("rho_power")) {
        const json& rp = h["rho_power"];
        if (!rp.is_object()) {
          loader.issue("$.hints.rho_power", "expected {\"l\": p} or {\"r\": p}");
        } else {
          if (rp.contains("l"))
            out.diffusion.rho_power_lower =
                loader.number(rp["l"], "$.hints.rho_power.l", 0.0);
          if (rp.contains("r"))
            out.diffusion.rho_power_upper =
                loader.number(rp["r"], "$.hints.rho_power.r", 0.0);
        }
      }
    } else {
      loader.issue("$.hints", "expected an object");
    }
  }

  out.diffusion.state_space = J;
  if (j.contains("mu"))
    if (auto e = loader.expression(j["mu"], "$.mu"))
      out.diffusion.drift = CoefficientFunction::from_expr(*e, mu_hints);
  if (j.contains("sigma"))
    if (auto e = loader.expression(j["sigma"], "$.sigma"))
      out.diffusion.diffusion = CoefficientFunction::from_expr(*e, sigma_hints);
  if (j.contains("x0"))
    out.diffusion.start = loader.number(j["x0"], "$.x0", 0.5);
  if (j.contains("c"))
    out.diffusion.reference = loader.number(j["c"], "$.c", 0.5);
  if (loader.issues.empty()) {
    if (!J.contains(out.diffusion.start))
      loader.issue("$.x0", "outside the state interval");
    if (!J.contains(out.diffusion.reference))
      loader.issue("$.c", "outside the state interval");
  }

  if (j.contains("g")) out.g = loader.g_block(j["g"], J);
  if (j.contains("nu")) out.nu = loader.measure_block(j["nu"], "$.nu");

  if (j.contains("mc")) {
    const json& m = j["mc"];
    if (!m.is_object()) {
      loader.issue("$.mc", "expected an object");
    } else {
      if (m.contains("seed")) {
        if (!m["seed"].is_number_unsigned() && !m["seed"].is_number_integer())
          loader.issue("$.mc.seed", "expected an integer");
        else
          out.mc.seed = m["seed"].get<std::uint64_t>();
      }
      if (m.contains("paths")) {
        if (!m["paths"].is_number_unsigned() &&
            !m["paths"].is_number_integer())
          loader.issue("$.mc.paths", "expected an integer");
        else
          out.mc.paths = m["paths"].get<std::size_t>();
      }
      if (m.contains("dt")) out.mc.dt = loader.number(m["dt"], "$.mc.dt", 1e-3);
      if (m.contains("horizon"))
        out.mc.horizon = loader.number(m["horizon"], "$.mc.horizon", 4.0);
      if (m.contains("dt_schedule")) {
        const json& s = m["dt_schedule"];
        if (!s.is_array() || s.empty()) {
          loader.issue("$.mc.dt_schedule", "expected a non-empty array");
        } else {
          out.mc.dt_factors.clear();
          for (const auto& v : s) {
            if (!v.is_number())
              loader.issue("$.mc.dt_schedule", "expected numbers");
            else
              out.mc.dt_factors.push_back(v.get<double>());
          }
        }
      }
      if (out.mc.dt <= 0) loader.issue("$.mc.dt", "must be positive");
      if (out.mc.horizon <= 0) loader.issue("$.mc.horizon", "must be positive");
    }
  }

  if (!loader.issues.empty()) throw ConfigError(std::move(loader.issues));
  return out;
}

ProblemConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({std::string("cannot open config file: ") + path});
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError({std::string("JSON parse error: ") + e.what()});
  }
  return load_config(j);
}

}  // namespace semimart
