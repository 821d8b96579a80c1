#include "semimart/funcmodel.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

#include "antiderivative_cache.hpp"
#include "semimart/scale.hpp"

namespace semimart {

// ----------------------------------------------------------- coefficients

CoefficientFunction CoefficientFunction::from_expr(Expr e, EndpointHints hints) {
  CoefficientFunction c;
  Expr shared = e;
  c.fn_ = [shared](double x) { return shared.eval(x); };
  c.hints_ = std::move(hints);
  c.constant_ = shared.constant_value();
  c.expr_ = std::move(e);
  return c;
}

// ----------------------------------------------------------------- atoms

AtomSource AtomSource::list(std::vector<Atom> atoms) {
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  AtomSource s;
  s.list_ = std::make_shared<const std::vector<Atom>>(std::move(atoms));
  return s;
}

AtomSource AtomSource::generator(
    std::function<std::optional<Atom>(std::size_t)> gen, bool decreasing) {
  AtomSource s;
  s.gen_ = std::move(gen);
  s.decreasing_ = decreasing;
  return s;
}

AtomSource AtomSource::scaled(double factor) const {
  AtomSource s = *this;
  s.scale_ *= factor;
  return s;
}

AtomSource AtomSource::absolute() const {
  AtomSource s = *this;
  s.abs_ = true;
  return s;
}

bool AtomSource::for_each_in(double lo, double hi, std::size_t budget,
                             const std::function<void(const Atom&)>& visit) const {
  auto emit = [&](Atom a) {
    a.weight *= scale_;
    if (abs_) a.weight = std::fabs(a.weight);
    visit(a);
  };
  if (list_) {
    auto it = std::upper_bound(
        list_->begin(), list_->end(), lo,
        [](double v, const Atom& a) { return v < a.location; });
    for (; it != list_->end() && it->location <= hi; ++it) emit(*it);
    return true;
  }
  if (!gen_) return true;
  for (std::size_t n = 0; n < budget; ++n) {
    auto atom = gen_(n);
    if (!atom) return true;
    double y = atom->location;
    if (decreasing_) {
      if (y <= lo) return true;  // locations only get smaller
      if (y <= hi) emit(*atom);
    } else {
      if (y > hi) return true;
      if (y > lo) emit(*atom);
    }
  }
  return false;  // budget exhausted before the interval was covered
}

std::vector<Atom> AtomSource::collect(double lo, double hi,
                                      std::size_t budget) const {
  std::vector<Atom> out;
  if (!for_each_in(lo, hi, budget, [&](const Atom& a) { out.push_back(a); }))
    throw std::runtime_error("atom enumeration budget exhausted");
  std::sort(out.begin(), out.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  return out;
}

// --------------------------------------------------------------- measures

SignedMeasure variation_measure(const SignedMeasure& m) {
  SignedMeasure out = m;
  if (!m.density_is_zero) {
    auto base = m.density;
    out.density = [base](double x) { return std::fabs(base(x)); };
  }
  out.atoms = m.atoms.absolute();
  return out;
}

// ------------------------------------------------------------ DCFunction

SignedMeasure DCFunction::second_measure() const {
  SignedMeasure m;
  m.density = second_density;
  m.density_is_zero = second_density_is_zero;
  m.atoms = atoms;
  m.density_hints = second_hints;
  if (second_expr) {
    Expr e = *second_expr;
    m.breakpoints = [e](double lo, double hi, std::size_t cap,
                        std::vector<double>& out) {
      return e.breakpoints(lo, hi, cap, out);
    };
  }
  return m;
}

SignedMeasure nu_g(const DiffusionSpec& d, const DCFunction& g) {
  SignedMeasure m;
  const bool drift_zero = d.drift.is_zero();
  if (drift_zero && g.second_density_is_zero) {
    m.density_is_zero = true;
  } else {
    CoefficientFunction mu = d.drift;
    CoefficientFunction sigma = d.diffusion;
    auto gp = g.dright;
    auto gpp = g.second_density;
    bool szero = g.second_density_is_zero;
    m.density = [mu, sigma, gp, gpp, szero, drift_zero](double y) {
      double total = 0.0;
      if (!drift_zero) {
        double s = sigma(y);
        if (s == 0.0) throw DomainError("sigma vanishes", y);
        total += gp(y) * mu(y) / (s * s);
      }
      if (!szero) total += 0.5 * gpp(y);
      return total;
    };
  }
  m.atoms = g.atoms.scaled(0.5);

  // density hints compose only in the single-active-term cases
  bool dright_const = false;
  if (g.dright_expr)
    if (auto c = g.dright_expr->constant_value()) dright_const = true;
  for (EndpointSide side : {EndpointSide::Lower, EndpointSide::Upper}) {
    EndpointHint hint;
    const EndpointHint& second = g.second_hints.at(side);
    const EndpointHint& dr = g.dright_hints.at(side);
    const EndpointHint& muh = d.drift.hints().at(side);
    const EndpointHint& sih = d.diffusion.hints().at(side);
    if (drift_zero && !g.second_density_is_zero) {
      hint = second;
    } else if (g.second_density_is_zero && !drift_zero) {
      std::optional<double> p_mu = muh.power_exponent;
      if (auto c = d.drift.constant_value(); c && *c != 0.0) p_mu = 0.0;
      std::optional<double> p_si = sih.power_exponent;
      if (auto c = d.diffusion.constant_value(); c && *c != 0.0) p_si = 0.0;
      std::optional<double> p_gp = dr.power_exponent;
      if (dright_const) p_gp = 0.0;
      if (p_mu && p_si && p_gp)
        hint.power_exponent = *p_gp + *p_mu - 2.0 * *p_si;
      hint.oscillatory = muh.oscillatory || dr.oscillatory;
      hint.phase = muh.phase ? muh.phase : dr.phase;
    }
    m.density_hints.at(side) = hint;
  }

  // piecewise structure comes from g'', g' and mu
  std::vector<Expr> sources;
  if (g.second_expr) sources.push_back(*g.second_expr);
  if (g.dright_expr) sources.push_back(*g.dright_expr);
  if (d.drift.expr()) sources.push_back(*d.drift.expr());
  if (!sources.empty()) {
    m.breakpoints = [sources](double lo, double hi, std::size_t cap,
                              std::vector<double>& out) {
      for (const Expr& e : sources)
        if (!e.breakpoints(lo, hi, cap, out)) return false;
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      return true;
    };
  }
  return m;
}

// ------------------------------------------------- antiderivative cache

using detail::AntiderivativeCache;

DCFunction make_integral_dc(Interval domain,
                            std::function<double(double)> dright,
                            std::function<double(double)> second_density,
                            AtomSource atoms, double anchor,
                            double value_at_anchor, EndpointHints dright_hints,
                            EndpointHints second_hints,
                            BreakpointsFn dright_breakpoints) {
  auto cache = std::make_shared<AntiderivativeCache>(
      domain, anchor, value_at_anchor, dright, dright_hints,
      dright_breakpoints);
  DCFunction g;
  g.domain = domain;
  g.value = [cache](double x) { return cache->value(x); };
  g.dright = std::move(dright);
  g.second_density = std::move(second_density);
  g.atoms = std::move(atoms);
  g.dright_hints = std::move(dright_hints);
  g.second_hints = std::move(second_hints);
  g.value_from_integral = true;
  return g;
}

// -------------------------------------------------------- consistency check

ConsistencyReport dc_consistency_check(const DCFunction& g, double a, double b,
                                       double rel_tol, double abs_tol,
                                       const QuadratureEngine& engine) {
  ConsistencyReport rep;
  if (!(g.domain.lower < a && a < b && b < g.domain.upper))
    throw std::invalid_argument("need l < a < b < r");

  std::vector<double> bps;
  if (g.second_expr) g.second_expr->breakpoints(a, b, 1 << 17, bps);

  // derivative identity: g'_+(b) - g'_+(a) = int_a^b g'' dy + atoms in (a,b]
  QuadratureResult density_part{0.0, 0.0, true, 0, 0};
  if (!g.second_density_is_zero)
    density_part = engine.integrate(g.second_density, a, b, bps);
  double atom_part = 0.0;
  bool atoms_ok = g.atoms.for_each_in(
      a, b, 1 << 20, [&](const Atom& at) { atom_part += at.weight; });
  double lhs = g.dright(b) - g.dright(a);
  rep.derivative_residual = lhs - (density_part.value + atom_part);

  // absolute continuity: g(b) - g(a) = int_a^b g'_+ dy
  std::vector<double> bps2;
  if (g.dright_expr) g.dright_expr->breakpoints(a, b, 1 << 17, bps2);
  QuadratureResult value_part = engine.integrate(g.dright, a, b, bps2);
  rep.value_residual = (g.value(b) - g.value(a)) - value_part.value;

  rep.quadrature_ok = density_part.converged && value_part.converged && atoms_ok;
  if (!rep.quadrature_ok) {
    rep.ok = false;
    rep.note = "quadrature did not converge on [a,b]; result inconclusive";
    return rep;
  }
  double scale1 =
      std::fabs(lhs) + std::fabs(density_part.value) + std::fabs(atom_part);
  double scale2 =
      std::fabs(g.value(b)) + std::fabs(g.value(a)) + std::fabs(value_part.value);
  bool d_ok = std::fabs(rep.derivative_residual) <=
              std::max(abs_tol, rel_tol * std::max(1.0, scale1));
  bool v_ok = std::fabs(rep.value_residual) <=
              std::max(abs_tol, rel_tol * std::max(1.0, scale2));
  rep.ok = d_ok && v_ok;
  if (!rep.ok) {
    std::ostringstream os;
    os << "residuals: derivative " << rep.derivative_residual << ", value "
       << rep.value_residual;
    rep.note = os.str();
  }
  return rep;
}

// -------------------------------------------------------------- transforms

double pick_anchor(const DCFunction& g) {
  if (g.anchor) return *g.anchor;
  double lo = g.domain.lower, hi = g.domain.upper;
  if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
  if (std::isfinite(lo)) return lo + 1.0;
  if (std::isfinite(hi)) return hi - 1.0;
  return 0.0;
}

DCFunction affine_image(const DCFunction& g, double alpha, double beta) {
  DCFunction out = g;
  auto v = g.value;
  auto dp = g.dright;
  auto dd = g.second_density;
  out.value = [v, alpha, beta](double x) { return alpha * v(x) + beta; };
  out.dright = [dp, alpha](double x) { return alpha * dp(x); };
  out.second_density = [dd, alpha](double x) { return alpha * dd(x); };
  out.atoms = g.atoms.scaled(alpha);
  if (g.affine_slope) out.affine_slope = alpha * *g.affine_slope;
  if (alpha < 0) {
    if (g.curvature == DCFunction::Curvature::Convex)
      out.curvature = DCFunction::Curvature::Concave;
    else if (g.curvature == DCFunction::Curvature::Concave)
      out.curvature = DCFunction::Curvature::Convex;
  }
  // expression members are kept for breakpoint structure only; scaling does
  // not move kinks
  return out;
}

DCFunction reflect(const DCFunction& g) {
  DCFunction out;
  out.domain = {-g.domain.upper, -g.domain.lower};
  auto v = g.value;
  auto dp = g.dright;
  auto dd = g.second_density;
  out.value = [v](double x) { return v(-x); };
  out.dright = [dp](double x) { return -dp(-x); };
  out.second_density = [dd](double x) { return dd(-x); };
  out.second_density_is_zero = g.second_density_is_zero;
  if (!g.atoms.empty()) {
    std::vector<Atom> atoms;
    for (const Atom& a : g.atoms.collect(g.domain.lower, g.domain.upper))
      atoms.push_back({-a.location, a.weight});
    out.atoms = AtomSource::list(std::move(atoms));
  }
  out.dright_hints.lower = g.dright_hints.upper;
  out.dright_hints.upper = g.dright_hints.lower;
  out.second_hints.lower = g.second_hints.upper;
  out.second_hints.upper = g.second_hints.lower;
  out.curvature = g.curvature;
  out.value_from_integral = g.value_from_integral;
  return out;
}

DiffusionSpec reflect(const DiffusionSpec& d) {
  DiffusionSpec out;
  out.state_space = {-d.state_space.upper, -d.state_space.lower};
  CoefficientFunction mu = d.drift;
  CoefficientFunction sigma = d.diffusion;
  EndpointHints mu_hints{mu.hints().upper, mu.hints().lower};
  EndpointHints sigma_hints{sigma.hints().upper, sigma.hints().lower};
  out.drift = CoefficientFunction([mu](double x) { return -mu(-x); }, mu_hints);
  out.diffusion =
      CoefficientFunction([sigma](double x) { return sigma(-x); }, sigma_hints);
  out.start = -d.start;
  out.reference = -d.reference;
  out.rho_power_lower = d.rho_power_upper;
  out.rho_power_upper = d.rho_power_lower;
  return out;
}

// -------------------------------------------------------------- validation

void DiffusionSpec::validate(const QuadratureEngine& engine) const {
  state_space.check();
  if (!state_space.contains(start))
    throw std::invalid_argument("x0 outside the state interval");
  if (!state_space.contains(reference))
    throw std::invalid_argument("reference point outside the state interval");

  // probe grid: linear across the bulk plus geometric tails toward finite
  // endpoints
  std::vector<double> probes;
  double lo = state_space.lower, hi = state_space.upper;
  double a = std::isfinite(lo) ? lo : reference - 64.0;
  double b = std::isfinite(hi) ? hi : reference + 64.0;
  for (int i = 1; i <= 31; ++i) probes.push_back(a + (b - a) * i / 32.0);
  for (int k = 1; k <= 12; ++k) {
    if (std::isfinite(lo))
      probes.push_back(lo + (reference - lo) * std::ldexp(1.0, -k));
    if (std::isfinite(hi))
      probes.push_back(hi - (hi - reference) * std::ldexp(1.0, -k));
  }
  for (double x : probes) {
    if (!state_space.contains(x)) continue;
    double s = diffusion(x);
    if (s == 0.0)
      throw std::invalid_argument("sigma vanishes at x=" + std::to_string(x));
    drift(x);  // must evaluate finite
  }
  // local integrability of 1/sigma^2 and mu/sigma^2 on probe compacts
  CoefficientFunction mu = drift;
  CoefficientFunction sigma = diffusion;
  auto inv_s2 = [sigma](double x) {
    double s = sigma(x);
    return 1.0 / (s * s);
  };
  auto mu_s2 = [mu, sigma](double x) {
    double s = sigma(x);
    return mu(x) / (s * s);
  };
  double mid_a = 0.5 * (std::max(a, reference - 4.0) + reference);
  double mid_b = 0.5 * (std::min(b, reference + 4.0) + reference);
  for (auto [ca, cb] : {std::pair{mid_a, reference}, {reference, mid_b}}) {
    if (!(cb > ca)) continue;
    if (!engine.integrate(inv_s2, ca, cb).converged ||
        !engine.integrate(mu_s2, ca, cb).converged)
      throw std::invalid_argument(
          "Engelbert-Schmidt integrability failed on probe compact");
  }
}

namespace {
std::mutex g_scale_model_mutex;
}

const ScaleModel& DiffusionSpec::scale_model() const {
  std::lock_guard<std::mutex> lock(g_scale_model_mutex);
  if (!scale_) scale_ = std::make_shared<ScaleModel>(*this);
  return *scale_;
}

}  // namespace semimart
