#include "semimart/semimart.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "antiderivative_cache.hpp"
#include "semimart/scale.hpp"

namespace semimart {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Semimartingale: return "Semimartingale";
    case Verdict::NonSemiFirstKind: return "NonSemiFirstKind";
    case Verdict::NonSemiSecondKind: return "NonSemiSecondKind";
    case Verdict::NotDetermined: return "NotDetermined";
    default: return "NotApplicable";
  }
}

const char* to_string(ShortcutResult s) {
  switch (s) {
    case ShortcutResult::AppliesPositive: return "applies_positive";
    case ShortcutResult::AppliesNegative: return "applies_negative";
    default: return "not_applicable";
  }
}

std::optional<std::pair<DiffusionSpec, DCFunction>> natural_pullback(
    const DiffusionSpec& d, const DCFunction& g) {
  if (!d.natural || !d.natural->base || !d.natural->map_dc) return std::nullopt;
  if (!g.affine_slope) return std::nullopt;
  // g(Y) = g(map(X)) and g affine, so the base problem uses alpha*map+beta
  double alpha = *g.affine_slope;
  double beta = g.value(d.reference) - alpha * d.reference;
  DCFunction composed = affine_image(*d.natural->map_dc, alpha, beta);
  return std::make_pair(*d.natural->base, std::move(composed));
}

namespace {

Integrand scale_term_integrand(const ScaleModel& sm, EndpointSide side,
                               double s_e) {
  Integrand q;
  q.f = [&sm, s_e, side](double x) {
    double num = side == EndpointSide::Lower ? sm.scale(x) - s_e
                                             : s_e - sm.scale(x);
    return num / sm.rho(x);
  };
  return q;
}

ConvergenceVerdict precondition_failure(const ScaleModel::Limit& lim,
                                        const char* which) {
  ConvergenceVerdict v;
  v.status = ConvergenceStatus::Inconclusive;
  std::ostringstream os;
  os << which << ": scale limit not finite at the exit endpoint ("
     << lim.verdict.decision_note << ")";
  v.decision_note = os.str();
  return v;
}

std::optional<double> dright_power(const DCFunction& g, EndpointSide side) {
  if (g.dright_expr)
    if (auto c = g.dright_expr->constant_value(); c && *c != 0.0) return 0.0;
  if (g.affine_slope && *g.affine_slope != 0.0) return 0.0;
  return g.dright_hints.at(side).power_exponent;
}

}  // namespace

ConvergenceVerdict necessary_condition(const DiffusionSpec& d,
                                       const DCFunction& g, EndpointSide side) {
  if (auto pb = natural_pullback(d, g))
    return necessary_condition(pb->first, pb->second, side);

  const ScaleModel& sm = d.scale_model();
  const ScaleModel::Limit& lim = sm.limit(side);
  if (!lim.finite) return precondition_failure(lim, "necessary_condition");

  Integrand q = scale_term_integrand(sm, side, lim.value);
  auto base = q.f;
  auto gp = g.dright;
  q.f = [base, gp](double x) {
    double v = gp(x);
    return base(x) * v * v;
  };
  if (auto p_term = sm.scale_term_power(side))
    if (auto p_gp = dright_power(g, side))
      q.power_exponent = *p_term + 2.0 * *p_gp;
  const EndpointHint& h = g.dright_hints.at(side);
  q.oscillatory = h.oscillatory;
  q.phase = h.phase;
  if (g.dright_expr) {
    Expr e = *g.dright_expr;
    q.breakpoints = [e](double lo, double hi, std::size_t cap,
                        std::vector<double>& out) {
      return e.breakpoints(lo, hi, cap, out);
    };
  }
  return l1loc_test(q, SignedMeasure::lebesgue(),
                    d.state_space.endpoint(side), d.reference);
}

ConvergenceVerdict full_condition(const DiffusionSpec& d, const DCFunction& g,
                                  EndpointSide side) {
  if (auto pb = natural_pullback(d, g))
    return full_condition(pb->first, pb->second, side);

  const ScaleModel& sm = d.scale_model();
  const ScaleModel::Limit& lim = sm.limit(side);
  if (!lim.finite) return precondition_failure(lim, "full_condition");

  SignedMeasure nu = variation_measure(nu_g(d, g));
  Integrand q = scale_term_integrand(sm, side, lim.value);
  // the composed power hint only covers the density part; with atoms in
  // play the shell rule must see the actual masses
  if (nu.atoms.empty())
    if (auto p_term = sm.scale_term_power(side))
      if (auto p_density = nu.density_hints.at(side).power_exponent)
        q.power_exponent = *p_term + *p_density;
  return l1loc_test(q, nu, d.state_space.endpoint(side), d.reference);
}

ShortcutResult sign_definite_shortcut(const DiffusionSpec& d,
                                      const DCFunction& g, EndpointSide side) {
  if (auto pb = natural_pullback(d, g))
    return sign_definite_shortcut(pb->first, pb->second, side);

  SignedMeasure nu = nu_g(d, g);
  double e = d.state_space.endpoint(side);
  double a = d.reference;
  bool saw_positive = false, saw_negative = false;

  if (!nu.density_is_zero) {
    for (int k = 0; k < 41; ++k) {
      double lo, hi;
      if (std::isfinite(e)) {
        double span = std::fabs(a - e);
        double near = span * std::ldexp(1.0, -k - 1);
        double far = span * std::ldexp(1.0, -k);
        lo = side == EndpointSide::Lower ? e + near : e - far;
        hi = side == EndpointSide::Lower ? e + far : e - near;
      } else {
        double z0 = side == EndpointSide::Upper ? std::max(a, 1.0)
                                                : std::min(a, -1.0);
        lo = side == EndpointSide::Upper ? z0 * std::ldexp(1.0, k)
                                         : z0 * std::ldexp(1.0, k + 1);
        hi = side == EndpointSide::Upper ? z0 * std::ldexp(1.0, k + 1)
                                         : z0 * std::ldexp(1.0, k);
      }
      for (int j = 0; j < 16; ++j) {
        double x = lo + (hi - lo) * (j + 0.5) / 16.0;
        double v;
        try {
          v = nu.density(x);
        } catch (...) {
          return ShortcutResult::NotApplicable;
        }
        if (v > 0.0) saw_positive = true;
        if (v < 0.0) saw_negative = true;
        if (saw_positive && saw_negative) return ShortcutResult::NotApplicable;
      }
    }
  }
  if (!nu.atoms.empty()) {
    double lo, hi;
    if (side == EndpointSide::Lower) {
      lo = e;
      hi = a;
    } else {
      lo = a;
      hi = e;
    }
    bool ok = nu.atoms.for_each_in(lo, hi, 1 << 20, [&](const Atom& at) {
      if (at.weight > 0.0) saw_positive = true;
      if (at.weight < 0.0) saw_negative = true;
    });
    if (!ok) return ShortcutResult::NotApplicable;
    if (saw_positive && saw_negative) return ShortcutResult::NotApplicable;
  }
  if (saw_positive) return ShortcutResult::AppliesPositive;
  if (saw_negative) return ShortcutResult::AppliesNegative;
  return ShortcutResult::AppliesPositive;  // zero measure is positive
}

namespace {

EndpointAnalysis analyze_endpoint(const DiffusionSpec& d, const DCFunction& g,
                                  EndpointSide side) {
  EndpointAnalysis out;
  out.side = side;
  out.shortcut = sign_definite_shortcut(d, g, side);
  if (out.shortcut != ShortcutResult::NotApplicable) {
    out.outcome = EndpointAnalysis::Outcome::Ok;
    return out;
  }
  out.necessary = necessary_condition(d, g, side);
  if (out.necessary->divergent()) {
    out.outcome = EndpointAnalysis::Outcome::SecondKind;
    return out;
  }
  if (out.necessary->inconclusive()) {
    out.outcome = EndpointAnalysis::Outcome::NotDetermined;
    return out;
  }
  out.full = full_condition(d, g, side);
  if (out.full->divergent()) {
    out.outcome = EndpointAnalysis::Outcome::FirstKind;
  } else if (out.full->convergent()) {
    out.outcome = EndpointAnalysis::Outcome::Ok;
  } else {
    out.outcome = EndpointAnalysis::Outcome::NotDetermined;
  }
  return out;
}

ConvergenceVerdict trivially_convergent(const char* note) {
  ConvergenceVerdict v;
  v.status = ConvergenceStatus::Convergent;
  v.estimate = 0.0;
  v.decision_note = note;
  return v;
}

ConvergenceVerdict unevaluated(const char* note) {
  ConvergenceVerdict v;
  v.status = ConvergenceStatus::Inconclusive;
  v.decision_note = note;
  return v;
}

}  // namespace

SemimartingaleVerdict classify(const DiffusionSpec& d, const DCFunction& g) {
  SemimartingaleVerdict out;
  out.boundary = classify_case(d, g);
  out.cond_necessary = unevaluated("not evaluated");
  out.cond_full = unevaluated("not evaluated");

  switch (out.boundary.case_label) {
    case CaseLabel::A:
      out.verdict = Verdict::Semimartingale;
      out.cond_necessary =
          trivially_convergent("case A: no exit endpoint; nothing to check");
      out.cond_full =
          trivially_convergent("case A: no exit endpoint; nothing to check");
      out.notes = "case A: Y exits at neither endpoint";
      return out;
    case CaseLabel::NotApplicable:
      out.verdict = Verdict::NotApplicable;
      out.notes = "g(Y) undefined at an exit endpoint: " + out.boundary.notes;
      return out;
    case CaseLabel::Inconclusive:
      out.verdict = Verdict::NotDetermined;
      out.notes = "boundary classification inconclusive: " + out.boundary.notes;
      return out;
    default:
      break;
  }

  std::vector<EndpointSide> sides;
  if (out.boundary.case_label == CaseLabel::B) sides = {EndpointSide::Lower};
  if (out.boundary.case_label == CaseLabel::C) sides = {EndpointSide::Upper};
  if (out.boundary.case_label == CaseLabel::D)
    sides = {EndpointSide::Lower, EndpointSide::Upper};

  for (EndpointSide side : sides)
    out.endpoints.push_back(analyze_endpoint(d, g, side));

  bool any_nd = false;
  std::vector<EndpointAnalysis::Outcome> fails;
  for (const auto& ea : out.endpoints) {
    if (ea.outcome == EndpointAnalysis::Outcome::NotDetermined) any_nd = true;
    if (ea.outcome == EndpointAnalysis::Outcome::FirstKind ||
        ea.outcome == EndpointAnalysis::Outcome::SecondKind)
      fails.push_back(ea.outcome);
  }

  // populate the reported condition fields from the decisive endpoint
  auto publish = [&](const EndpointAnalysis& ea) {
    if (ea.necessary) out.cond_necessary = *ea.necessary;
    if (ea.full) out.cond_full = *ea.full;
    if (ea.shortcut != ShortcutResult::NotApplicable) {
      out.shortcut_used = true;
      out.notes += std::string("sign-definite shortcut (") +
                   to_string(ea.shortcut) + ") at the " +
                   (ea.side == EndpointSide::Lower ? "lower" : "upper") +
                   " endpoint; ";
    }
  };

  if (fails.empty() && !any_nd) {
    out.verdict = Verdict::Semimartingale;
    for (const auto& ea : out.endpoints) publish(ea);
    return out;
  }
  if (!fails.empty()) {
    bool all_first = std::all_of(fails.begin(), fails.end(), [](auto o) {
      return o == EndpointAnalysis::Outcome::FirstKind;
    });
    bool all_second = std::all_of(fails.begin(), fails.end(), [](auto o) {
      return o == EndpointAnalysis::Outcome::SecondKind;
    });
    if (all_first || all_second) {
      out.verdict = all_first ? Verdict::NonSemiFirstKind
                              : Verdict::NonSemiSecondKind;
      for (const auto& ea : out.endpoints)
        if (ea.outcome == fails.front()) {
          publish(ea);
          break;
        }
      return out;
    }
    out.verdict = Verdict::NotDetermined;
    out.notes +=
        "endpoints fail in different kinds; no single label applies; ";
    for (const auto& ea : out.endpoints) publish(ea);
    return out;
  }
  out.verdict = Verdict::NotDetermined;
  for (const auto& ea : out.endpoints) publish(ea);
  out.notes += "at least one endpoint analysis is inconclusive; ";
  return out;
}

std::pair<ConvergenceVerdict, ConvergenceVerdict> brownian_conditions(
    const DCFunction& g) {
  if (g.domain.lower != 0.0)
    throw std::invalid_argument("brownian_conditions expects domain (0,inf)");
  double anchor = pick_anchor(g);

  // x |g''|(dx) near 0+, atoms weighted by location
  SignedMeasure gpp = variation_measure(g.second_measure());
  Integrand ident;
  ident.f = [](double x) { return x; };
  if (gpp.atoms.empty())
    if (auto p = gpp.density_hints.lower.power_exponent)
      ident.power_exponent = 1.0 + *p;
  ConvergenceVerdict full_like = l1loc_test(ident, gpp, 0.0, anchor);

  // x (g'_+)^2 dx near 0+
  Integrand q;
  auto gp = g.dright;
  q.f = [gp](double x) {
    double v = gp(x);
    return x * v * v;
  };
  if (auto p = dright_power(g, EndpointSide::Lower))
    q.power_exponent = 1.0 + 2.0 * *p;
  q.oscillatory = g.dright_hints.lower.oscillatory;
  q.phase = g.dright_hints.lower.phase;
  if (g.dright_expr) {
    Expr e = *g.dright_expr;
    q.breakpoints = [e](double lo, double hi, std::size_t cap,
                        std::vector<double>& out) {
      return e.breakpoints(lo, hi, cap, out);
    };
  }
  ConvergenceVerdict necessary_like =
      l1loc_test(q, SignedMeasure::lebesgue(), 0.0, anchor);
  return {full_like, necessary_like};
}

ConvexDecomposition convex_decompose(const DCFunction& g) {
  ConvexDecomposition out;
  if (g.domain.lower != 0.0)
    throw std::invalid_argument("convex_decompose expects domain (0,inf)");

  SignedMeasure gpp = variation_measure(g.second_measure());
  Integrand ident;
  ident.f = [](double x) { return x; };
  out.precondition = l1loc_test(ident, gpp, 0.0, 1.0);
  if (!out.precondition.convergent()) {
    out.ok = false;
    out.note = "x is not |g''|-integrable at 0+ (" +
               std::string(to_string(out.precondition.status)) + ")";
    return out;
  }

  // Jordan split: positive/negative density parts and sign-split atoms.
  auto density = g.second_density;
  bool no_density = g.second_density_is_zero;
  auto pos_density = [density, no_density](double x) {
    return no_density ? 0.0 : std::max(density(x), 0.0);
  };
  auto neg_density = [density, no_density](double x) {
    return no_density ? 0.0 : std::max(-density(x), 0.0);
  };
  std::vector<Atom> pos_atoms, neg_atoms;
  for (const Atom& a : g.atoms.collect(0.0, kInf)) {
    if (a.weight > 0.0) pos_atoms.push_back(a);
    if (a.weight < 0.0) neg_atoms.push_back({a.location, -a.weight});
  }

  double a1 = g.dright(1.0), a2 = 0.0;
  double b1 = g.value(1.0) - g.dright(1.0), b2 = 0.0;

  auto build = [&](std::function<double(double)> dens, std::vector<Atom> atoms,
                   double slope, double offset) {
    BreakpointsFn bps;
    if (g.second_expr) {
      Expr e = *g.second_expr;
      bps = [e](double lo, double hi, std::size_t cap,
                std::vector<double>& out2) {
        return e.breakpoints(lo, hi, cap, out2);
      };
    }
    auto cum = std::make_shared<detail::AntiderivativeCache>(
        g.domain, 1.0, 0.0, dens, EndpointHints{}, bps);
    auto atom_list = std::make_shared<const std::vector<Atom>>(std::move(atoms));
    // k(x) = nu((1,x]) for x >= 1, -nu((x,1]) for x < 1
    auto k = [cum, atom_list](double x) {
      double v = cum->value(x);
      for (const Atom& a : *atom_list) {
        if (x >= 1.0) {
          if (a.location > 1.0 && a.location <= x) v += a.weight;
        } else {
          if (a.location > x && a.location <= 1.0) v -= a.weight;
        }
      }
      return v;
    };
    auto dright = [k, slope](double x) { return k(x) + slope; };
    auto h_cache = std::make_shared<detail::AntiderivativeCache>(
        g.domain, 1.0, 0.0, dright, EndpointHints{}, BreakpointsFn{});
    DCFunction h;
    h.domain = g.domain;
    // h_cache(x) = int_1^x (k + slope), and H(1) = slope + offset
    h.value = [h_cache, slope, offset](double x) {
      return h_cache->value(x) + slope + offset;
    };
    h.dright = dright;
    h.second_density = std::move(dens);
    h.atoms = AtomSource::list(*atom_list);
    h.curvature = DCFunction::Curvature::Convex;
    h.anchor = 1.0;
    return h;
  };

  // H_i(x) = int_1^x (k_i + a_i) dy + (a_i + b_i) at x=1, i.e. H_i(1)=a_i+b_i
  out.h1 = build(pos_density, std::move(pos_atoms), a1, b1);
  out.h2 = build(neg_density, std::move(neg_atoms), a2, b2);
  out.ok = true;
  return out;
}

LemmaSuiteReport lemma_implication_suite(
    const std::vector<std::pair<std::string, DCFunction>>& battery) {
  LemmaSuiteReport rep;
  for (const auto& [name, g] : battery) {
    LemmaCheck check;
    check.name = name;
    double anchor = pick_anchor(g);

    // batteries live on (0,a); the lower endpoint is 0
    SignedMeasure gpp = variation_measure(g.second_measure());
    Integrand ident;
    ident.f = [](double x) { return x; };
    if (gpp.atoms.empty())
      if (auto p = gpp.density_hints.lower.power_exponent)
        ident.power_exponent = 1.0 + *p;
    check.x_gpp = l1loc_test(ident, gpp, g.domain.lower, anchor);

    Integrand q;
    auto gp = g.dright;
    q.f = [gp](double x) {
      double v = gp(x);
      return x * v * v;
    };
    if (auto p = dright_power(g, EndpointSide::Lower))
      q.power_exponent = 1.0 + 2.0 * *p;
    q.oscillatory = g.dright_hints.lower.oscillatory;
    q.phase = g.dright_hints.lower.phase;
    check.x_gp2 =
        l1loc_test(q, SignedMeasure::lebesgue(), g.domain.lower, anchor);

    check.limit_exists =
        g_endpoint_limit_auto(g, EndpointSide::Lower).has_value();

    check.lemra1_applicable = check.x_gpp.convergent();
    if (check.lemra1_applicable)
      check.lemra1_violated = !check.limit_exists || check.x_gp2.divergent();

    check.lemra2_applicable =
        (g.curvature == DCFunction::Curvature::Convex ||
         g.curvature == DCFunction::Curvature::Concave) &&
        check.limit_exists;
    if (check.lemra2_applicable)
      check.lemra2_violated = check.x_gpp.divergent();

    if (check.lemra1_violated || check.lemra2_violated) ++rep.violations;
    rep.checks.push_back(std::move(check));
  }
  return rep;
}

}  // namespace semimart
