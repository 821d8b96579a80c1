#include "semimart/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace semimart {
namespace {

// Gauss 7 / Kronrod 15 nodes and weights on [-1,1] (QUADPACK values).
constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};
constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};
constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

struct PanelResult {
  double value;
  double error;
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b,
                 long& evals) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double fc = f(mid);
  double kronrod = kKronrodWeights[7] * fc;
  double gauss = kGaussWeights[3] * fc;
  double fabs_sum = kKronrodWeights[7] * std::fabs(fc);
  for (int i = 0; i < 7; ++i) {
    double dx = half * kKronrodNodes[i];
    double f1 = f(mid - dx);
    double f2 = f(mid + dx);
    kronrod += kKronrodWeights[i] * (f1 + f2);
    fabs_sum += kKronrodWeights[i] * (std::fabs(f1) + std::fabs(f2));
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (f1 + f2);
  }
  evals += 15;
  double value = kronrod * half;
  double diff = std::fabs((kronrod - gauss) * half);
  // QUADPACK-style error sharpening
  double scale = fabs_sum * std::fabs(half);
  double err = diff;
  if (scale > 0.0 && diff > 0.0) {
    double r = std::pow(200.0 * diff / scale, 1.5);
    err = (r < 1.0) ? scale * r : diff;
  }
  return {value, err};
}

struct Segment {
  double a, b, value, error;
};

struct SegmentOrder {
  bool operator()(const Segment& x, const Segment& y) const {
    if (x.error != y.error) return x.error < y.error;
    return x.a > y.a;  // deterministic tie-break
  }
};

}  // namespace

QuadratureResult QuadratureEngine::run(
    const std::function<double(double)>& f,
    std::vector<std::pair<double, double>> segments) const {
  QuadratureResult result;
  std::priority_queue<Segment, std::vector<Segment>, SegmentOrder> queue;
  double total = 0.0, total_err = 0.0;
  for (auto [a, b] : segments) {
    if (!(b > a)) continue;
    PanelResult p = gk15(f, a, b, result.evaluations);
    queue.push({a, b, p.value, p.error});
    total += p.value;
    total_err += p.error;
  }
  int splits = 0;
  while (!queue.empty() && splits < opts_.max_subdivisions) {
    double target = std::max(opts_.abs_tol, opts_.rel_tol * std::fabs(total));
    if (total_err <= target) break;
    Segment worst = queue.top();
    if (worst.error <= target / ((double)queue.size() + 1.0)) break;
    queue.pop();
    double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // interval at floating-point resolution; keep as-is
      queue.push({worst.a, worst.b, worst.value, 0.0});
      total_err -= worst.error;
      continue;
    }
    PanelResult left = gk15(f, worst.a, mid, result.evaluations);
    PanelResult right = gk15(f, mid, worst.b, result.evaluations);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    queue.push({worst.a, mid, left.value, left.error});
    queue.push({mid, worst.b, right.value, right.error});
    ++splits;
  }
  // Recompute the sums in deterministic (left-endpoint) order to keep the
  // result independent of heap ordering.
  std::vector<Segment> rest;
  rest.reserve(queue.size());
  while (!queue.empty()) {
    rest.push_back(queue.top());
    queue.pop();
  }
  std::sort(rest.begin(), rest.end(),
            [](const Segment& x, const Segment& y) { return x.a < y.a; });
  double sum = 0.0, comp = 0.0, err = 0.0;
  for (const Segment& s : rest) {
    double y = s.value - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    err += s.error;
  }
  result.value = sum;
  result.error = err;
  result.subdivisions = splits;
  result.converged =
      err <= std::max(opts_.abs_tol, opts_.rel_tol * std::fabs(sum)) * 1.0001 ||
      err <= std::max(opts_.abs_tol, opts_.rel_tol * std::fabs(sum)) +
                 1e-300;
  return result;
}

QuadratureResult QuadratureEngine::integrate(const Fn& f, double a,
                                             double b) const {
  return integrate(f, a, b, {});
}

QuadratureResult QuadratureEngine::integrate(
    const Fn& f, double a, double b,
    std::span<const double> breakpoints) const {
  if (!(b > a)) return {0.0, 0.0, true, 0, 0};
  std::vector<std::pair<double, double>> segments;
  double prev = a;
  for (double p : breakpoints) {
    if (p > prev && p < b) {
      segments.emplace_back(prev, p);
      prev = p;
    }
  }
  segments.emplace_back(prev, b);
  return run(f, std::move(segments));
}

QuadratureResult QuadratureEngine::integrate_oscillatory(
    const Fn& f, double a, double b, const Fn& phase, std::size_t max_panels,
    std::span<const double> breakpoints) const {
  QuadratureResult failed;
  if (!(b > a)) return {0.0, 0.0, true, 0, 0};
  const double step =
      3.14159265358979323846 / std::max(1, opts_.oscillation_panels_per_period);

  // Split until each piece spans at most ~step of phase. Cuts are snapped
  // to multiples of step so kinks of |sin|/|cos|-type integrands land on
  // panel boundaries, keeping the Kronrod error estimate honest.
  std::vector<std::pair<double, double>> panels;
  struct Piece {
    double lo, hi, plo, phi;
  };
  std::vector<Piece> stack;
  double prev = a;
  for (double p : breakpoints)
    if (p > prev && p < b) {
      stack.push_back({prev, p, 0.0, 0.0});
      prev = p;
    }
  stack.push_back({prev, b, 0.0, 0.0});
  for (auto& piece : stack) {
    piece.plo = phase(piece.lo);
    piece.phi = phase(piece.hi);
  }
  std::reverse(stack.begin(), stack.end());
  while (!stack.empty()) {
    Piece p = stack.back();
    stack.pop_back();
    double span = std::fabs(p.phi - p.plo);
    double mid = 0.5 * (p.lo + p.hi);
    if (span <= 1.25 * step || !(mid > p.lo && mid < p.hi)) {
      panels.emplace_back(p.lo, p.hi);
      if (panels.size() > max_panels) return failed;  // unresolved
      continue;
    }
    // phase-grid multiple nearest the midpoint of the phase span
    double mid_phase = 0.5 * (p.plo + p.phi);
    double target = std::round(mid_phase / step) * step;
    double lo_ph = std::min(p.plo, p.phi), hi_ph = std::max(p.plo, p.phi);
    if (!(target > lo_ph + 0.25 * step && target < hi_ph - 0.25 * step))
      target = mid_phase;
    // monotone bisection for phase(x) = target
    double xl = p.lo, xr = p.hi;
    bool increasing = p.phi > p.plo;
    double x = mid;
    for (int it = 0; it < 40; ++it) {
      x = 0.5 * (xl + xr);
      if (!(x > xl && x < xr)) break;
      double ph = phase(x);
      if ((ph < target) == increasing)
        xl = x;
      else
        xr = x;
    }
    x = 0.5 * (xl + xr);
    if (!(x > p.lo && x < p.hi)) x = mid;
    double px = phase(x);
    stack.push_back({x, p.hi, px, p.phi});
    stack.push_back({p.lo, x, p.plo, px});
  }
  return run(f, std::move(panels));
}

}  // namespace semimart
