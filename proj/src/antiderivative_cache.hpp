#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "semimart/funcmodel.hpp"
#include "semimart/quadrature.hpp"

namespace semimart::detail {

// Antiderivative F(x) = base + int_anchor^x fn, cached on a deterministic
// dyadic ladder of checkpoints from the anchor toward each endpoint.
// Segment values are keyed by integer index, so cached results do not
// depend on query order or thread interleaving. Queries beyond the
// oscillation-resolution frontier clamp to the deepest resolvable
// checkpoint.
class AntiderivativeCache {
 public:
  AntiderivativeCache(Interval domain, double anchor, double base_value,
                      std::function<double(double)> fn, EndpointHints hints,
                      BreakpointsFn breakpoints, bool positive_integrand = false,
                      QuadratureOptions qopts = {})
      : domain_(domain),
        anchor_(anchor),
        base_value_(base_value),
        fn_(std::move(fn)),
        hints_(std::move(hints)),
        breakpoints_(std::move(breakpoints)),
        positive_(positive_integrand),
        engine_(qopts) {}

  double value(double x) const {
    if (x == anchor_) return base_value_;
    EndpointSide side = x < anchor_ ? EndpointSide::Lower : EndpointSide::Upper;
    double sign = x < anchor_ ? -1.0 : 1.0;
    std::lock_guard<std::mutex> lock(mu_);
    double cum = 0.0;
    double prev = anchor_;
    for (int i = 1; i < 1100; ++i) {
      double q = ladder_point(side, i);
      bool past = side == EndpointSide::Lower ? (q <= x) : (q >= x);
      if (past) {
        auto [v, ok] = integrate_piece(prev, x, side);
        return base_value_ + sign * (cum + (ok ? v : 0.0));
      }
      auto [v, ok] = cached_segment(side, i, prev, q);
      if (!ok) return base_value_ + sign * cum;  // frontier clamp
      cum += v;
      prev = q;
    }
    return base_value_ + sign * cum;
  }

  double ladder_point(EndpointSide side, int i) const {
    double e = domain_.endpoint(side);
    if (std::isfinite(e)) return e + (anchor_ - e) * std::ldexp(1.0, -i);
    double step = std::ldexp(1.0, i) - 1.0;
    return side == EndpointSide::Lower ? anchor_ - step : anchor_ + step;
  }

 private:
  static long key(EndpointSide side, int i) {
    return side == EndpointSide::Lower ? -i : i;
  }

  std::pair<double, bool> cached_segment(EndpointSide side, int i, double from,
                                         double to) const {
    auto it = segments_.find(key(side, i));
    if (it != segments_.end()) return it->second;
    auto v = integrate_piece(from, to, side);
    segments_.emplace(key(side, i), v);
    return v;
  }

  std::pair<double, bool> integrate_piece(double from, double to,
                                          EndpointSide side) const {
    double lo = std::min(from, to), hi = std::max(from, to);
    if (!(hi > lo)) return {0.0, true};
    std::vector<double> bps;
    if (breakpoints_) breakpoints_(lo, hi, 1 << 17, bps);
    const EndpointHint& h = hints_.at(side);
    QuadratureResult r;
    if (h.oscillatory && h.phase) {
      r = engine_.integrate_oscillatory(fn_, lo, hi, h.phase, 1 << 17, bps);
    } else {
      r = engine_.integrate(fn_, lo, hi, bps);
    }
    if (positive_ && r.converged && r.value <= 0.0 && hi - lo > 0.0 &&
        r.value < -1e-14 * (1.0 + std::fabs(base_value_)))
      throw std::runtime_error("antiderivative lost monotonicity on [" +
                               std::to_string(lo) + ", " + std::to_string(hi) +
                               "]");
    return {r.value, r.converged};
  }

  Interval domain_;
  double anchor_;
  double base_value_;
  std::function<double(double)> fn_;
  EndpointHints hints_;
  BreakpointsFn breakpoints_;
  bool positive_;
  QuadratureEngine engine_;
  mutable std::mutex mu_;
  mutable std::map<long, std::pair<double, bool>> segments_;
};

}  // namespace semimart::detail
