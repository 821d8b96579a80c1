#include "semimart/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace semimart {

const char* to_string(ConvergenceStatus s) {
  switch (s) {
    case ConvergenceStatus::Convergent: return "Convergent";
    case ConvergenceStatus::Divergent: return "Divergent";
    default: return "Inconclusive";
  }
}

namespace {

struct ShellGeometry {
  double endpoint;  // may be +-inf
  double anchor;    // start of the dyadic ladder
  bool toward_upper;

  // shell k as (lo, hi]
  std::pair<double, double> shell(int k) const {
    if (std::isfinite(endpoint)) {
      double span = std::fabs(anchor - endpoint);
      double near = span * std::ldexp(1.0, -k - 1);
      double far = span * std::ldexp(1.0, -k);
      if (toward_upper)
        return {endpoint - far, endpoint - near};
      return {endpoint + near, endpoint + far};
    }
    double near = std::fabs(anchor) * std::ldexp(1.0, k);
    double far = std::fabs(anchor) * std::ldexp(1.0, k + 1);
    if (toward_upper) return {near, far};
    return {-far, -near};
  }
};

struct ShellIntegrals {
  double abs_mass = 0.0;
  double signed_mass = 0.0;
  double quad_error = 0.0;
  bool resolved = true;
};

class ShellIntegrator {
 public:
  ShellIntegrator(const Integrand& f, const SignedMeasure& nu,
                  EndpointSide nu_side, const ShellRuleOptions& opts,
                  const QuadratureEngine& engine)
      : f_(f), nu_(nu), opts_(opts), engine_(engine) {
    const EndpointHint& dh = nu.density_hints.at(nu_side);
    oscillatory_ = f.oscillatory || dh.oscillatory;
    phase_ = f.phase ? f.phase : dh.phase;
  }

  ShellIntegrals compute(double lo, double hi, bool want_signed) const {
    ShellIntegrals out;
    auto ff = f_.f;
    auto dd = nu_.density;
    if (!nu_.density_is_zero) {
      auto abs_fn = [ff, dd](double x) { return std::fabs(ff(x) * dd(x)); };
      std::vector<double> bps;
      bool bps_ok = true;
      if (f_.breakpoints) bps_ok = f_.breakpoints(lo, hi, 1 << 17, bps);
      if (bps_ok && nu_.breakpoints) bps_ok = nu_.breakpoints(lo, hi, 1 << 17, bps);
      std::sort(bps.begin(), bps.end());
      bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
      if (!bps_ok) {
        out.resolved = false;
        return out;
      }
      QuadratureResult r;
      if (oscillatory_ && phase_) {
        r = engine_.integrate_oscillatory(abs_fn, lo, hi, phase_,
                                          opts_.max_panels_per_shell, bps);
      } else {
        r = engine_.integrate(abs_fn, lo, hi, bps);
      }
      out.abs_mass = r.value;
      out.quad_error = r.error;
      out.resolved = r.converged;
      if (want_signed) {
        auto signed_fn = [ff, dd](double x) { return ff(x) * dd(x); };
        QuadratureResult rs;
        if (oscillatory_ && phase_) {
          rs = engine_.integrate_oscillatory(signed_fn, lo, hi, phase_,
                                             opts_.max_panels_per_shell, bps);
        } else {
          rs = engine_.integrate(signed_fn, lo, hi, bps);
        }
        out.signed_mass = rs.value;
        out.resolved = out.resolved && rs.converged;
      } else {
        out.signed_mass = out.abs_mass;
      }
    }
    if (!nu_.atoms.empty()) {
      bool ok = nu_.atoms.for_each_in(
          lo, hi, opts_.max_atoms_per_shell, [&](const Atom& a) {
            double contrib = ff(a.location) * a.weight;
            out.abs_mass += std::fabs(contrib);
            out.signed_mass += want_signed ? contrib : std::fabs(contrib);
          });
      out.resolved = out.resolved && ok;
    }
    return out;
  }

 private:
  const Integrand& f_;
  const SignedMeasure& nu_;
  const ShellRuleOptions& opts_;
  const QuadratureEngine& engine_;
  bool oscillatory_ = false;
  std::function<double(double)> phase_;
};

// ratio of consecutive masses with tolerance-guarded zeros
double guarded_ratio(double prev, double next, double abs_tol) {
  if (prev <= abs_tol) return next <= abs_tol ? 0.0 : kInf;
  return next / prev;
}

struct WindowStats {
  bool have = false;
  bool all_below_conv = true;
  bool all_above_div = true;
  bool all_masses_above_tol = true;
  bool all_masses_tiny = true;
  double max_ratio = 0.0;
  double min_ratio = kInf;
};

WindowStats window_stats(const std::vector<ShellMass>& shells, int window,
                         double abs_tol, double conv, double div) {
  WindowStats w;
  int n = static_cast<int>(shells.size());
  if (n < window + 1) return w;
  w.have = true;
  for (int i = n - window - 1; i + 1 < n; ++i) {
    double r = guarded_ratio(shells[i].abs_mass, shells[i + 1].abs_mass, abs_tol);
    w.all_below_conv &= (r <= conv);
    w.all_above_div &= (r >= div);
    w.max_ratio = std::max(w.max_ratio, r);
    w.min_ratio = std::min(w.min_ratio, r);
  }
  for (int i = n - window; i < n; ++i) {
    w.all_masses_above_tol &= (shells[i].abs_mass > abs_tol);
    w.all_masses_tiny &= (shells[i].abs_mass <= abs_tol);
  }
  return w;
}

}  // namespace

ConvergenceVerdict l1loc_test(const Integrand& f, const SignedMeasure& nu,
                              double endpoint, double z,
                              const ShellRuleOptions& opts,
                              const QuadratureEngine& engine) {
  ConvergenceVerdict v;
  ShellGeometry geom;
  geom.endpoint = endpoint;
  geom.toward_upper = endpoint > z;
  EndpointSide nu_side =
      geom.toward_upper ? EndpointSide::Upper : EndpointSide::Lower;
  ShellIntegrator integ(f, nu, nu_side, opts, engine);

  double interior_signed = 0.0, interior_abs = 0.0, interior_err = 0.0;
  if (std::isfinite(endpoint)) {
    geom.anchor = z;
  } else {
    // dyadic ladder needs an anchor bounded away from 0
    geom.anchor = geom.toward_upper ? std::max(z, 1.0) : std::min(z, -1.0);
    double ilo = geom.toward_upper ? z : geom.anchor;
    double ihi = geom.toward_upper ? geom.anchor : z;
    if (ihi > ilo) {
      ShellIntegrals piece = integ.compute(ilo, ihi, opts.want_signed);
      interior_signed = piece.signed_mass;
      interior_abs = piece.abs_mass;
      interior_err = piece.quad_error;
      if (!piece.resolved) {
        v.status = ConvergenceStatus::Inconclusive;
        v.decision_note = "interior piece did not resolve";
        return v;
      }
    }
  }

  // ---- exact verdict from a certified power exponent, when supplied
  if (f.power_exponent) {
    double p = *f.power_exponent;
    bool finite_e = std::isfinite(endpoint);
    bool convergent = finite_e ? (p > -1.0) : (p < -1.0);
    v.hint_used = true;
    std::ostringstream note;
    note << "verdict from endpoint power hint p=" << p;
    v.decision_note = note.str();
    double r_exact =
        finite_e ? std::exp2(-(p + 1.0)) : std::exp2(p + 1.0);
    double sum_signed = interior_signed, sum_abs = interior_abs;
    double err = interior_err;
    double last_signed = 0.0, last_abs = 0.0;
    int shells_wanted = convergent ? opts.max_shells : 12;
    for (int k = 0; k < shells_wanted; ++k) {
      auto [lo, hi] = geom.shell(k);
      ShellIntegrals s = integ.compute(lo, hi, opts.want_signed);
      v.shells.push_back({k, lo, hi, s.abs_mass, s.signed_mass, s.resolved});
      if (!s.resolved) break;
      sum_signed += s.signed_mass;
      sum_abs += s.abs_mass;
      err += s.quad_error;
      last_signed = s.signed_mass;
      last_abs = s.abs_mass;
      if (convergent && r_exact < 1.0) {
        double tail = last_abs * r_exact / (1.0 - r_exact);
        if (tail <= std::max(opts.tail_rel_tol * sum_abs, opts.abs_tol)) {
          v.status = ConvergenceStatus::Convergent;
          v.estimate = sum_signed +
                       (last_abs > 0.0 ? last_signed / last_abs * tail : 0.0);
          v.estimate_error = err + tail;
          return v;
        }
      }
    }
    if (convergent) {
      double tail =
          r_exact < 1.0 ? last_abs * r_exact / (1.0 - r_exact) : 0.0;
      v.status = ConvergenceStatus::Convergent;
      v.estimate =
          sum_signed + (last_abs > 0.0 ? last_signed / last_abs * tail : 0.0);
      v.estimate_error = err + tail;
      v.decision_note += "; tail extrapolated with hinted ratio";
    } else {
      v.status = ConvergenceStatus::Divergent;
    }
    return v;
  }

  // ---- dyadic-shell rule
  double sum_abs = interior_abs, sum_signed = interior_signed;
  double err = interior_err;
  bool frontier = false;
  for (int k = 0; k < opts.max_shells; ++k) {
    auto [lo, hi] = geom.shell(k);
    ShellIntegrals s = integ.compute(lo, hi, opts.want_signed);
    v.shells.push_back({k, lo, hi, s.abs_mass, s.signed_mass, s.resolved});
    if (!s.resolved) {
      frontier = true;
      v.shells.back().resolved = false;
      break;
    }
    sum_abs += s.abs_mass;
    sum_signed += s.signed_mass;
    err += s.quad_error;
    if (sum_abs > opts.sum_cap) {
      v.status = ConvergenceStatus::Divergent;
      v.cap_hit = true;
      v.decision_note = "partial sums exceeded the divergence cap";
      return v;
    }
    WindowStats w = window_stats(v.shells, opts.window, opts.abs_tol,
                                 opts.ratio_convergent, opts.ratio_divergent);
    if (!w.have) continue;
    if (w.all_above_div && w.all_masses_above_tol) {
      v.status = ConvergenceStatus::Divergent;
      std::ostringstream note;
      note << "window of " << opts.window << " shell ratios >= "
           << opts.ratio_divergent << " at shell " << k;
      v.decision_note = note.str();
      return v;
    }
    if (w.all_masses_tiny) {
      v.status = ConvergenceStatus::Convergent;
      v.estimate = sum_signed;
      v.estimate_error = err + opts.abs_tol;
      v.decision_note = "trailing shell masses negligible";
      return v;
    }
    if (w.all_below_conv) {
      double r_hat = std::min(w.max_ratio, opts.ratio_convergent);
      double last_abs = v.shells.back().abs_mass;
      double last_signed = v.shells.back().signed_mass;
      double tail = r_hat < 1.0 ? last_abs * r_hat / (1.0 - r_hat) : kInf;
      if (tail <= std::max(opts.tail_rel_tol * sum_abs, opts.abs_tol)) {
        v.status = ConvergenceStatus::Convergent;
        v.estimate = sum_signed +
                     (last_abs > 0.0 ? last_signed / last_abs * tail : 0.0);
        v.estimate_error = err + tail;
        std::ostringstream note;
        note << "geometric decay certified at shell " << k
             << "; tail below tolerance";
        v.decision_note = note.str();
        return v;
      }
    }
  }

  // ---- frontier / K_max evaluation on the resolved masses
  std::vector<ShellMass> resolved;
  for (const ShellMass& s : v.shells)
    if (s.resolved) resolved.push_back(s);
  WindowStats w = window_stats(resolved, opts.window, opts.abs_tol,
                               opts.ratio_convergent, opts.ratio_divergent);
  const char* where = frontier ? "resolution frontier" : "shell cap";
  if (w.have) {
    if (w.all_above_div && w.all_masses_above_tol) {
      v.status = ConvergenceStatus::Divergent;
      v.decision_note = std::string("divergent ratio window at the ") + where;
      return v;
    }
    if (w.all_masses_tiny) {
      v.status = ConvergenceStatus::Convergent;
      v.estimate = sum_signed;
      v.estimate_error = err + opts.abs_tol;
      v.decision_note = "trailing shell masses negligible";
      return v;
    }
    bool stable = w.min_ratio > 0.0 &&
                  w.max_ratio / w.min_ratio <= opts.ratio_spread_max;
    if (w.all_below_conv && stable) {
      double r_hat = w.max_ratio;
      const ShellMass& last = resolved.back();
      double tail = last.abs_mass * r_hat / (1.0 - r_hat);
      v.status = ConvergenceStatus::Convergent;
      v.estimate = sum_signed + (last.abs_mass > 0.0
                                     ? last.signed_mass / last.abs_mass * tail
                                     : 0.0);
      v.estimate_error = err + tail;
      std::ostringstream note;
      note << "stable geometric window at the " << where
           << "; tail extrapolated (ratio<=" << r_hat << ")";
      v.decision_note = note.str();
      return v;
    }
  }
  v.status = ConvergenceStatus::Inconclusive;
  std::ostringstream note;
  note << "no decisive window at the " << where;
  if (w.have)
    note << " (ratios in [" << w.min_ratio << ", " << w.max_ratio << "])";
  v.decision_note = note.str();
  return v;
}

}  // namespace semimart
