#include "semimart/scale.hpp"

#include <cmath>
#include <mutex>

#include "antiderivative_cache.hpp"

namespace semimart {

namespace {

// Samples |f(x)| / |x-e|^p on a dyadic ladder toward the endpoint and
// checks the ratio stays inside a generous band. Guards composed hints
// against blatantly wrong exponents.
bool power_band_plausible(const std::function<double(double)>& f,
                          double endpoint, double anchor, double p) {
  if (!std::isfinite(endpoint)) return true;  // only used at finite endpoints
  double lo = kInf, hi = 0.0;
  for (int k = 4; k <= 24; k += 2) {
    double x = endpoint + (anchor - endpoint) * std::ldexp(1.0, -k);
    double dist = std::fabs(x - endpoint);
    double v;
    try {
      v = std::fabs(f(x));
    } catch (...) {
      return false;
    }
    double ratio = v / std::pow(dist, p);
    if (!std::isfinite(ratio)) return false;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  if (hi == 0.0) return true;  // identically zero is fine for any p
  return lo > 0.0 && hi / lo < 1e4;
}

}  // namespace

struct ScaleModel::Impl {
  DiffusionSpec spec;
  ShellRuleOptions sopts;
  QuadratureOptions qopts;
  std::shared_ptr<detail::AntiderivativeCache> log_rho;  // int_c^x 2mu/sigma^2
  std::shared_ptr<detail::AntiderivativeCache> s_cache;  // int_c^x rho
  std::shared_ptr<const ScaleModel> base;                // natural coordinates
  mutable std::mutex limit_mu;
  mutable std::optional<Limit> limits[2];

  double rho(double x) const {
    if (base) {
      const auto& nc = *spec.natural;
      double u = nc.map_inverse(x);
      double d = nc.map_derivative(u);
      if (d <= 0.0) throw DomainError("coordinate map not increasing", x);
      return base->rho(u) / d;
    }
    double v = std::exp(-log_rho->value(x));
    if (!(v > 0.0) || !std::isfinite(v))
      throw DomainError("scale density overflow", x);
    return v;
  }

  double scale(double x) const {
    if (base) return base->scale(spec.natural->map_inverse(x));
    return s_cache->value(x);
  }

  std::optional<double> rho_power(EndpointSide side) const {
    if (base) return std::nullopt;  // powers live in base coordinates
    if (auto p = spec.rho_power(side)) {
      auto self = [this](double x) { return rho(x); };
      if (power_band_plausible(self, spec.state_space.endpoint(side),
                               spec.reference, *p))
        return p;
      return std::nullopt;
    }
    // rho is continuous and positive up to a finite endpoint whenever
    // 2mu/sigma^2 stays integrable there; certify the constant cases
    if (spec.drift.is_zero()) return 0.0;
    if (spec.drift.constant_value() && spec.diffusion.constant_value() &&
        spec.state_space.endpoint_finite(side))
      return 0.0;
    return std::nullopt;
  }

  Limit compute_limit(EndpointSide side) const {
    if (base) {
      // s = s_base o map^{-1}; the endpoint limit transports unchanged
      return base->limit(side);
    }
    double e = spec.state_space.endpoint(side);
    SignedMeasure m;
    m.density = [this](double x) { return rho(x); };
    if (auto p = rho_power(side)) m.density_hints.at(side).power_exponent = *p;
    Integrand one;
    if (auto p = m.density_hints.at(side).power_exponent)
      one.power_exponent = p;
    ShellRuleOptions so = sopts;
    so.want_signed = false;
    ConvergenceVerdict v =
        l1loc_test(one, m, e, spec.reference, so, QuadratureEngine(qopts));
    Limit out;
    out.verdict = v;
    if (v.convergent()) {
      out.finite = true;
      out.value = side == EndpointSide::Lower ? -v.estimate : v.estimate;
    } else if (v.divergent()) {
      out.finite = false;
      out.value = side == EndpointSide::Lower ? -kInf : kInf;
    } else {
      out.finite = false;
      out.value = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
  }
};

ScaleModel::ScaleModel(const DiffusionSpec& d, QuadratureOptions qopts,
                       ShellRuleOptions sopts)
    : impl_(std::make_shared<Impl>()) {
  impl_->spec = d;
  impl_->sopts = sopts;
  impl_->qopts = qopts;
  if (d.natural && d.natural->base) {
    impl_->base = std::make_shared<ScaleModel>(*d.natural->base, qopts, sopts);
    return;
  }
  CoefficientFunction mu = d.drift;
  CoefficientFunction sigma = d.diffusion;
  auto integrand = [mu, sigma](double x) {
    double s = sigma(x);
    if (s == 0.0) throw DomainError("sigma vanishes", x);
    return 2.0 * mu(x) / (s * s);
  };
  EndpointHints drift_hints = d.drift.hints();
  BreakpointsFn bps;
  if (d.drift.expr()) {
    Expr e = *d.drift.expr();
    bps = [e](double lo, double hi, std::size_t cap, std::vector<double>& out) {
      return e.breakpoints(lo, hi, cap, out);
    };
  }
  impl_->log_rho = std::make_shared<detail::AntiderivativeCache>(
      d.state_space, d.reference, 0.0, integrand, drift_hints, bps, false,
      qopts);
  auto log_rho = impl_->log_rho;
  auto rho_fn = [log_rho](double x) {
    double v = std::exp(-log_rho->value(x));
    if (!(v > 0.0) || !std::isfinite(v))
      throw DomainError("scale density overflow", x);
    return v;
  };
  impl_->s_cache = std::make_shared<detail::AntiderivativeCache>(
      d.state_space, d.reference, 0.0, rho_fn, EndpointHints{}, BreakpointsFn{},
      /*positive_integrand=*/true, qopts);
}

double ScaleModel::rho(double x) const { return impl_->rho(x); }
double ScaleModel::scale(double x) const { return impl_->scale(x); }

const ScaleModel::Limit& ScaleModel::limit(EndpointSide side) const {
  int idx = side == EndpointSide::Lower ? 0 : 1;
  std::lock_guard<std::mutex> lock(impl_->limit_mu);
  if (!impl_->limits[idx]) impl_->limits[idx] = impl_->compute_limit(side);
  return *impl_->limits[idx];
}

std::optional<double> ScaleModel::rho_power(EndpointSide side) const {
  return impl_->rho_power(side);
}

std::optional<double> ScaleModel::scale_term_power(EndpointSide side) const {
  if (impl_->base) return impl_->base->scale_term_power(side);
  const Limit& lim = limit(side);
  if (!lim.finite) return std::nullopt;
  auto p_rho = rho_power(side);
  if (!p_rho || *p_rho <= -1.0) return std::nullopt;
  double e = impl_->spec.state_space.endpoint(side);
  double s_e = lim.value;
  auto term = [this, s_e](double x) { return (scale(x) - s_e) / rho(x); };
  if (!power_band_plausible(term, e, impl_->spec.reference, 1.0))
    return std::nullopt;
  return 1.0;
}

const ScaleModel* ScaleModel::base_model() const {
  return impl_->base ? impl_->base.get() : nullptr;
}

double rho(const DiffusionSpec& d, double x) { return d.scale_model().rho(x); }
double scale(const DiffusionSpec& d, double x) {
  return d.scale_model().scale(x);
}
ScaleModel::Limit scale_limit(const DiffusionSpec& d, EndpointSide side) {
  return d.scale_model().limit(side);
}

}  // namespace semimart
