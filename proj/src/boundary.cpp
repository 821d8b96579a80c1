#include "semimart/boundary.hpp"

#include <cmath>
#include <sstream>

namespace semimart {

const char* to_string(ExitVerdict v) {
  switch (v) {
    case ExitVerdict::Yes: return "yes";
    case ExitVerdict::No: return "no";
    default: return "inconclusive";
  }
}

const char* to_string(CaseLabel c) {
  switch (c) {
    case CaseLabel::A: return "A";
    case CaseLabel::B: return "B";
    case CaseLabel::C: return "C";
    case CaseLabel::D: return "D";
    case CaseLabel::NotApplicable: return "NotApplicable";
    default: return "Inconclusive";
  }
}

ExitVerdict feller_exit_test(const DiffusionSpec& d, EndpointSide side,
                             ExitEvidence* evidence) {
  // In natural coordinates exit at an endpoint transports to exit of the
  // base diffusion at the corresponding endpoint.
  if (d.natural && d.natural->base)
    return feller_exit_test(*d.natural->base, side, evidence);

  const ScaleModel& sm = d.scale_model();
  const ScaleModel::Limit& lim = sm.limit(side);
  if (evidence) evidence->scale_limit = lim;
  if (lim.verdict.inconclusive()) return ExitVerdict::Inconclusive;
  if (!lim.finite) return ExitVerdict::No;

  double e = d.state_space.endpoint(side);
  double s_e = lim.value;
  CoefficientFunction sigma = d.diffusion;
  Integrand q;
  q.f = [&sm, sigma, s_e, side](double x) {
    double s2 = sigma(x);
    double num = side == EndpointSide::Lower ? sm.scale(x) - s_e
                                             : s_e - sm.scale(x);
    return num / (sm.rho(x) * s2 * s2);
  };
  // composed hint: (s - s(e))/rho is power 1; divide by sigma^2
  if (auto p_term = sm.scale_term_power(side)) {
    std::optional<double> p_sigma = sigma.hints().at(side).power_exponent;
    if (auto c = sigma.constant_value(); c && *c != 0.0) p_sigma = 0.0;
    if (p_sigma) q.power_exponent = *p_term - 2.0 * *p_sigma;
  }
  SignedMeasure lebesgue = SignedMeasure::lebesgue();
  ConvergenceVerdict v = l1loc_test(q, lebesgue, e, d.reference);
  if (evidence) {
    evidence->feller_integral = v;
    evidence->attracts_without_exit = v.divergent();
  }
  if (v.convergent()) return ExitVerdict::Yes;
  if (v.divergent()) return ExitVerdict::No;
  return ExitVerdict::Inconclusive;
}

std::vector<double> default_probe_sequence(const Interval& domain,
                                           EndpointSide side, double z) {
  std::vector<double> probes;
  double e = domain.endpoint(side);
  for (int k = 0; k <= 40; ++k) {
    if (std::isfinite(e)) {
      probes.push_back(e + (z - e) * std::ldexp(1.0, -k));
    } else {
      double step = std::ldexp(1.0, k) - 1.0;
      probes.push_back(side == EndpointSide::Lower ? z - step : z + step);
    }
  }
  return probes;
}

std::optional<double> g_endpoint_limit(const DCFunction& g, EndpointSide side,
                                       std::span<const double> probes,
                                       double abs_tol) {
  if (probes.size() < 20)
    throw std::invalid_argument("probe sequence needs at least 20 points");
  std::vector<double> values;
  values.reserve(probes.size());
  for (double x : probes) {
    if (!g.domain.contains(x)) continue;
    double v;
    try {
      v = g.value(x);
    } catch (...) {
      break;
    }
    if (!std::isfinite(v)) return std::nullopt;
    values.push_back(v);
    if (values.size() >= 6) {
      bool stable = true;
      for (std::size_t i = values.size() - 5; i < values.size(); ++i)
        if (std::fabs(values[i] - values[i - 1]) >= abs_tol) stable = false;
      if (stable) return values.back();
    }
  }
  return std::nullopt;
}

std::optional<double> g_endpoint_limit_auto(const DCFunction& g,
                                            EndpointSide side,
                                            std::string* note) {
  double e = g.domain.endpoint(side);
  if (!std::isfinite(e)) {
    // a finite limit at an infinite endpoint is not something the catalog
    // needs; fall back to probes only
    auto probes = default_probe_sequence(g.domain, side, pick_anchor(g));
    return g_endpoint_limit(g, side, probes, 1e-7);
  }

  // existence via absolute integrability of g' near the endpoint; the
  // signed shell sum then produces the limit value
  double anchor = pick_anchor(g);
  Integrand q;
  q.f = g.dright;
  const EndpointHint& h = g.dright_hints.at(side);
  if (h.power_exponent && *h.power_exponent > -1.0)
    q.power_exponent = h.power_exponent;
  q.oscillatory = h.oscillatory;
  q.phase = h.phase;
  if (g.dright_expr) {
    Expr ex = *g.dright_expr;
    q.breakpoints = [ex](double lo, double hi, std::size_t cap,
                         std::vector<double>& out) {
      return ex.breakpoints(lo, hi, cap, out);
    };
  }
  ShellRuleOptions opts;
  opts.want_signed = true;
  ConvergenceVerdict v =
      l1loc_test(q, SignedMeasure::lebesgue(), e, anchor, opts);
  if (v.convergent()) {
    if (note) *note = "limit via integrable derivative: " + v.decision_note;
    double integral_toward_e = v.estimate;  // int over (e, anchor) of g'
    double at_anchor = g.value(anchor);
    return side == EndpointSide::Lower ? at_anchor - integral_toward_e
                                       : at_anchor + integral_toward_e;
  }
  // |g'| not integrable (or undecided): probe directly
  auto probes = default_probe_sequence(g.domain, side, anchor);
  auto direct = g_endpoint_limit(g, side, probes, 1e-7);
  if (note)
    *note = direct ? "limit via probe stabilization"
                   : "no finite limit detected (" + v.decision_note + ")";
  return direct;
}

namespace {

CaseLabel combine_cases(ExitVerdict at_l, ExitVerdict at_r, bool g_l_finite,
                        bool g_r_finite, std::string& notes) {
  if (at_l == ExitVerdict::Inconclusive || at_r == ExitVerdict::Inconclusive)
    return CaseLabel::Inconclusive;
  bool exit_l = at_l == ExitVerdict::Yes;
  bool exit_r = at_r == ExitVerdict::Yes;
  if (!exit_l && !exit_r) return CaseLabel::A;
  if (exit_l && !g_l_finite) {
    notes += "g has no finite limit at the lower exit endpoint; ";
    return CaseLabel::NotApplicable;
  }
  if (exit_r && !g_r_finite) {
    notes += "g has no finite limit at the upper exit endpoint; ";
    return CaseLabel::NotApplicable;
  }
  if (exit_l && exit_r) return CaseLabel::D;
  return exit_l ? CaseLabel::B : CaseLabel::C;
}

}  // namespace

BoundaryReport classify_case(const DiffusionSpec& d, const DCFunction& g) {
  BoundaryReport rep;
  ExitEvidence ev_l, ev_r;
  rep.exits_l = feller_exit_test(d, EndpointSide::Lower, &ev_l);
  rep.exits_r = feller_exit_test(d, EndpointSide::Upper, &ev_r);
  rep.s_l = ev_l.scale_limit.value;
  rep.s_r = ev_r.scale_limit.value;
  rep.evidence.push_back(ev_l.scale_limit.verdict);
  rep.evidence.push_back(ev_r.scale_limit.verdict);
  if (ev_l.feller_integral) rep.evidence.push_back(*ev_l.feller_integral);
  if (ev_r.feller_integral) rep.evidence.push_back(*ev_r.feller_integral);
  if (ev_l.attracts_without_exit)
    rep.notes += "lower endpoint attracts at infinite time without exit; ";
  if (ev_r.attracts_without_exit)
    rep.notes += "upper endpoint attracts at infinite time without exit; ";

  std::string lim_note;
  if (rep.exits_l == ExitVerdict::Yes) {
    rep.g_limit_l = g_endpoint_limit_auto(g, EndpointSide::Lower, &lim_note);
    if (!lim_note.empty()) rep.notes += "lower: " + lim_note + "; ";
  }
  if (rep.exits_r == ExitVerdict::Yes) {
    rep.g_limit_r = g_endpoint_limit_auto(g, EndpointSide::Upper, &lim_note);
    if (!lim_note.empty()) rep.notes += "upper: " + lim_note + "; ";
  }
  rep.case_label =
      combine_cases(rep.exits_l, rep.exits_r, rep.g_limit_l.has_value(),
                    rep.g_limit_r.has_value(), rep.notes);
  return rep;
}

}  // namespace semimart
