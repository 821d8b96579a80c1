#include "semimart/addfun.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "semimart/scale.hpp"

namespace semimart {

namespace {

// Confirms that nu has infinite mass in every neighborhood of p by testing
// divergence of the constant integrand toward p from both sides.
std::string confirm_infinite_point(const SignedMeasure& nu, const Interval& J,
                                   double p) {
  SignedMeasure abs_nu = variation_measure(nu);
  Integrand one;
  ShellRuleOptions opts;
  opts.max_shells = 40;
  double span_l = p - J.lower, span_r = J.upper - p;
  double zl = p - (std::isfinite(span_l) ? span_l : 2.0) * 0.25;
  double zr = p + (std::isfinite(span_r) ? span_r : 2.0) * 0.25;
  bool left = false, right = false;
  if (zl > J.lower) left = l1loc_test(one, abs_nu, p, zl, opts).divergent();
  if (zr < J.upper) right = l1loc_test(one, abs_nu, p, zr, opts).divergent();
  std::ostringstream os;
  os << "declared point " << p << ": shell divergence "
     << ((left || right) ? "confirmed" : "not confirmed (kept as declared)");
  return os.str();
}

}  // namespace

NonLocalFinitenessSet non_local_finiteness_set(const SignedMeasure& nu,
                                               const Interval& J, double x0) {
  NonLocalFinitenessSet out;
  out.interior_points = nu.infinite_points;
  std::sort(out.interior_points.begin(), out.interior_points.end());
  for (double p : out.interior_points)
    out.confirmations.push_back(confirm_infinite_point(nu, J, p));

  double alpha = J.lower, beta = J.upper;
  for (double p : out.interior_points) {
    if (p == x0) {
      out.start_inside_d = true;
      break;
    }
    if (p < x0) alpha = std::max(alpha, p);
    if (p > x0) beta = std::min(beta, p);
  }
  if (out.start_inside_d) {
    out.reduced = {x0, x0};  // degenerate
  } else {
    out.reduced = {alpha, beta};
  }
  return out;
}

AdditiveFunctionalReport classify_additive_functional(const DiffusionSpec& d,
                                                      const SignedMeasure& nu) {
  AdditiveFunctionalReport rep;
  rep.d_nu = non_local_finiteness_set(nu, d.state_space, d.start);
  rep.before_clause =
      "the additive functional is a.s. finite for t before the hitting time "
      "of D^nu";
  rep.after_clause =
      "the additive functional is a.s. infinite for t strictly after the "
      "hitting time of D^nu (up to the exit time)";
  if (rep.d_nu.start_inside_d) {
    rep.notes =
        "x0 lies in D^nu: the hitting time is 0 and the functional is "
        "infinite immediately after the start";
    return rep;
  }

  // Work on the reduced interval (alpha, beta) with the original scale.
  const Interval reduced = rep.d_nu.reduced;
  DiffusionSpec restricted = d;
  restricted.state_space = reduced;
  if (!reduced.contains(restricted.reference))
    restricted.reference = restricted.start;
  const ScaleModel& sm = restricted.scale_model();

  const ScaleModel::Limit& lim_lo = sm.limit(EndpointSide::Lower);
  const ScaleModel::Limit& lim_hi = sm.limit(EndpointSide::Upper);
  if (lim_lo.verdict.divergent() && lim_hi.verdict.divergent()) {
    rep.recurrent_case = true;
    rep.notes =
        "both scale limits infinite on the reduced interval: every level's "
        "local time diverges, so the functional is a.s. infinite at the "
        "exit time for any nonzero nu";
    return rep;
  }

  SignedMeasure abs_nu = variation_measure(nu);
  for (EndpointSide side : {EndpointSide::Lower, EndpointSide::Upper}) {
    const ScaleModel::Limit& lim =
        side == EndpointSide::Lower ? lim_lo : lim_hi;
    bool& reachable = side == EndpointSide::Lower ? rep.lower_reachable
                                                  : rep.upper_reachable;
    auto& verdict = side == EndpointSide::Lower ? rep.verdict_at_lower
                                                : rep.verdict_at_upper;
    reachable = lim.finite;
    if (!reachable) continue;
    double e = reduced.endpoint(side);
    double s_e = lim.value;
    Integrand q;
    q.f = [&sm, s_e, side](double x) {
      double num = side == EndpointSide::Lower ? sm.scale(x) - s_e
                                               : s_e - sm.scale(x);
      return num / sm.rho(x);
    };
    if (auto p_term = sm.scale_term_power(side))
      if (abs_nu.atoms.empty())
        if (auto p_density = abs_nu.density_hints.at(side).power_exponent)
          q.power_exponent = *p_term + *p_density;
    verdict = l1loc_test(q, abs_nu, e, restricted.reference);
  }
  return rep;
}

ConvergenceVerdict brownian_local_time_criterion(const SignedMeasure& nu,
                                                 double l, double z) {
  SignedMeasure abs_nu = variation_measure(nu);
  Integrand q;
  q.f = [l](double x) { return x - l; };
  if (abs_nu.atoms.empty())
    if (auto p = abs_nu.density_hints.lower.power_exponent)
      q.power_exponent = 1.0 + *p;
  return l1loc_test(q, abs_nu, l, z);
}

}  // namespace semimart
