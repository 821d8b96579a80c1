#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "semimart/expr.hpp"
#include "semimart/quadrature.hpp"

namespace semimart {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class EndpointSide { Lower, Upper };

inline EndpointSide other_side(EndpointSide s) {
  return s == EndpointSide::Lower ? EndpointSide::Upper : EndpointSide::Lower;
}

// Open state interval (l, r); endpoints may be infinite.
struct Interval {
  double lower = -kInf;
  double upper = kInf;

  bool contains(double x) const { return x > lower && x < upper; }
  double endpoint(EndpointSide s) const {
    return s == EndpointSide::Lower ? lower : upper;
  }
  bool endpoint_finite(EndpointSide s) const {
    return std::isfinite(endpoint(s));
  }
  void check() const {
    if (!(lower < upper)) throw std::invalid_argument("interval needs l < r");
  }
};

struct DomainError : std::runtime_error {
  DomainError(const std::string& what_happened, double at)
      : std::runtime_error(what_happened + " at x=" + std::to_string(at)),
        point(at) {}
  double point;
};

// Optional metadata describing how a function behaves toward one endpoint:
// a certified power exponent p (|f(x)| / |x-e|^p stays in a bounded band)
// and/or an oscillation phase such as 1/x for sin(1/x)-type terms.
struct EndpointHint {
  std::optional<double> power_exponent;
  bool oscillatory = false;
  std::function<double(double)> phase;  // strictly monotone near the endpoint
};

struct EndpointHints {
  EndpointHint lower, upper;
  const EndpointHint& at(EndpointSide s) const {
    return s == EndpointSide::Lower ? lower : upper;
  }
  EndpointHint& at(EndpointSide s) {
    return s == EndpointSide::Lower ? lower : upper;
  }
};

// Scalar coefficient on the state interval. Wraps either a parsed
// expression or an arbitrary closure; evaluation failures surface as
// DomainError naming the queried point.
class CoefficientFunction {
 public:
  CoefficientFunction() = default;
  CoefficientFunction(std::function<double(double)> fn, EndpointHints hints = {})
      : fn_(std::move(fn)), hints_(std::move(hints)) {}

  static CoefficientFunction constant(double v) {
    CoefficientFunction c([v](double) { return v; });
    c.constant_ = v;
    return c;
  }
  static CoefficientFunction from_expr(Expr e, EndpointHints hints = {});

  double operator()(double x) const {
    double v;
    try {
      v = fn_(x);
    } catch (const EvalError& err) {
      throw DomainError(err.what(), x);
    }
    if (!std::isfinite(v)) throw DomainError("coefficient not finite", x);
    return v;
  }

  std::optional<double> constant_value() const { return constant_; }
  bool is_zero() const { return constant_ && *constant_ == 0.0; }
  const EndpointHints& hints() const { return hints_; }
  const std::optional<Expr>& expr() const { return expr_; }

 private:
  std::function<double(double)> fn_;
  EndpointHints hints_;
  std::optional<double> constant_;
  std::optional<Expr> expr_;
};

class ScaleModel;
struct NaturalCoordinates;
struct DCFunction;

// Diffusion dY = mu(Y) dt + sigma(Y) dW on J, started at x0, with the
// reference point c anchoring the scale function.
struct DiffusionSpec {
  Interval state_space;
  CoefficientFunction drift;
  CoefficientFunction diffusion;
  double start = 0.0;
  double reference = 0.0;

  // Optional certified exponents of the scale density rho toward each
  // endpoint (|rho(x)| / |x-e|^p bounded); lets convergence tests be exact.
  std::optional<double> rho_power_lower, rho_power_upper;

  // Optional closed-form scale data through a monotone change of variable
  // (used for diffusions defined as images of a base diffusion).
  std::shared_ptr<const NaturalCoordinates> natural;

  std::optional<double> rho_power(EndpointSide s) const {
    return s == EndpointSide::Lower ? rho_power_lower : rho_power_upper;
  }

  // Samples the Engelbert-Schmidt conditions: sigma != 0 at interior points
  // and local integrability of 1/sigma^2, mu/sigma^2 on probe compacts.
  // Throws on violation.
  void validate(const QuadratureEngine& engine = QuadratureEngine()) const;

  // Lazily built scale model (rho, s, endpoint limits); cached and shared.
  const ScaleModel& scale_model() const;

 private:
  mutable std::shared_ptr<ScaleModel> scale_;
};

// Y = map(x) image of a base diffusion, with closed-form scale data.
struct NaturalCoordinates {
  std::function<double(double)> map;           // strictly increasing
  std::function<double(double)> map_inverse;
  std::function<double(double)> map_derivative;
  std::shared_ptr<const DiffusionSpec> base;   // base diffusion (x-space)
  std::shared_ptr<const DCFunction> map_dc;    // the map as a DC function
};

struct Atom {
  double location;
  double weight;
};

// Finite list or lazily enumerated stream of atoms. Generator-backed
// sources must yield locations weakly monotone toward their accumulation
// endpoint so enumeration over an interval can stop.
class AtomSource {
 public:
  AtomSource() = default;

  static AtomSource none() { return AtomSource(); }
  static AtomSource list(std::vector<Atom> atoms);
  // gen(n) returns the n-th atom or nullopt when exhausted; locations
  // weakly decreasing (or increasing) toward the accumulation endpoint.
  static AtomSource generator(
      std::function<std::optional<Atom>(std::size_t)> gen, bool decreasing);

  AtomSource scaled(double factor) const;  // weights multiplied by factor
  AtomSource absolute() const;             // weights replaced by |weight|

  bool empty() const { return !list_ && !gen_; }

  // Visits atoms with location in (lo, hi]. Returns false if the
  // enumeration budget was exhausted before the interval was covered.
  bool for_each_in(double lo, double hi, std::size_t budget,
                   const std::function<void(const Atom&)>& visit) const;

  // All atoms in (lo, hi] (budget-capped; throws if budget exhausted).
  std::vector<Atom> collect(double lo, double hi,
                            std::size_t budget = 1 << 20) const;

 private:
  std::shared_ptr<const std::vector<Atom>> list_;
  std::function<std::optional<Atom>(std::size_t)> gen_;
  bool decreasing_ = true;
  double scale_ = 1.0;
  bool abs_ = false;
};

using BreakpointsFn =
    std::function<bool(double lo, double hi, std::size_t cap,
                       std::vector<double>& out)>;

// Locally finite signed measure: density + atoms, plus declared interior
// points where local finiteness fails.
struct SignedMeasure {
  std::function<double(double)> density = [](double) { return 0.0; };
  AtomSource atoms;
  std::vector<double> infinite_points;
  BreakpointsFn breakpoints;              // piecewise structure of density
  EndpointHints density_hints;            // power/oscillation of |density|
  bool density_is_zero = false;

  static SignedMeasure zero() {
    SignedMeasure m;
    m.density_is_zero = true;
    return m;
  }
  static SignedMeasure lebesgue() {
    SignedMeasure m;
    m.density = [](double) { return 1.0; };
    EndpointHint h;
    h.power_exponent = 0.0;
    m.density_hints.lower = h;
    m.density_hints.upper = h;
    return m;
  }
};

SignedMeasure variation_measure(const SignedMeasure& m);

// Difference of convex functions g on J, given by value, right derivative
// and the second-derivative measure (density + atoms).
struct DCFunction {
  enum class Curvature { Unknown, Convex, Concave };

  Interval domain;
  std::function<double(double)> value;
  std::function<double(double)> dright;
  std::function<double(double)> second_density = [](double) { return 0.0; };
  AtomSource atoms;
  EndpointHints dright_hints, second_hints;
  Curvature curvature = Curvature::Unknown;
  std::optional<Expr> dright_expr, second_expr;
  bool second_density_is_zero = false;
  bool value_from_integral = false;    // value synthesized from dright
  std::optional<double> anchor;        // preferred interior reference point
  std::optional<double> affine_slope;  // set when g(x) = slope*x + offset

  double eval(double x) const { return value(x); }

  // Second-derivative measure g''(dy) as a SignedMeasure.
  SignedMeasure second_measure() const;
};

// Builds g with value integrated from dright: g(x) = value_at_anchor +
// int_anchor^x dright. Uses a synchronized antiderivative cache; the
// integration is breakpoint- and oscillation-aware via the hints. Queries
// deeper than the oscillation-resolution frontier are clamped to the
// deepest resolvable ladder point.
DCFunction make_integral_dc(Interval domain,
                            std::function<double(double)> dright,
                            std::function<double(double)> second_density,
                            AtomSource atoms, double anchor,
                            double value_at_anchor,
                            EndpointHints dright_hints = {},
                            EndpointHints second_hints = {},
                            BreakpointsFn dright_breakpoints = {});

// The classification measure nu_g(dy) = (g' mu / sigma^2 + g''/2) dy
// + (1/2) g''_s(dy).
SignedMeasure nu_g(const DiffusionSpec& d, const DCFunction& g);

struct ConsistencyReport {
  bool ok = false;
  bool quadrature_ok = true;
  double derivative_residual = 0.0;  // g'_+(b)-g'_+(a) vs g''((a,b])
  double value_residual = 0.0;       // g(b)-g(a) vs int_a^b g'_+
  std::string note;
};

// Validates the defining identities of a DCFunction on [a,b].
ConsistencyReport dc_consistency_check(
    const DCFunction& g, double a, double b, double rel_tol = 1e-8,
    double abs_tol = 1e-12, const QuadratureEngine& engine = QuadratureEngine());

// Interior reference point for probes and shell anchors.
double pick_anchor(const DCFunction& g);

// g |-> alpha*g + beta (affine image; flips curvature when alpha < 0).
DCFunction affine_image(const DCFunction& g, double alpha, double beta);

// g |-> g(-x) on the reflected domain; used by mirror-symmetry checks.
DCFunction reflect(const DCFunction& g);
DiffusionSpec reflect(const DiffusionSpec& d);

}  // namespace semimart
