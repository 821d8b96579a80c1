#include "semimart/catalog.hpp"

#include <cmath>
#include <stdexcept>

#include "semimart/boundary.hpp"

namespace semimart {

namespace {

EndpointHint hint(std::optional<double> power, bool oscillatory = false,
                  std::function<double(double)> phase = {}) {
  EndpointHint h;
  h.power_exponent = power;
  h.oscillatory = oscillatory;
  h.phase = std::move(phase);
  return h;
}

DCFunction identity_on(Interval J) {
  DCFunction g;
  g.domain = J;
  g.value = [](double x) { return x; };
  g.dright = [](double) { return 1.0; };
  g.second_density_is_zero = true;
  g.dright_expr = Expr::parse("1");
  g.second_expr = Expr::parse("0");
  g.affine_slope = 1.0;
  g.dright_hints.lower = hint(0.0);
  g.dright_hints.upper = hint(0.0);
  return g;
}

DCFunction sqrt_dc() {
  DCFunction g;
  g.domain = {0.0, kInf};
  g.value = [](double x) { return std::sqrt(x); };
  g.dright = [](double x) { return 0.5 / std::sqrt(x); };
  g.second_density = [](double x) { return -0.25 * std::pow(x, -1.5); };
  g.dright_expr = Expr::parse("0.5/sqrt(x)");
  g.second_expr = Expr::parse("(-0.25)/x^(1.5)");
  g.curvature = DCFunction::Curvature::Concave;
  g.dright_hints.lower = hint(-0.5);
  g.second_hints.lower = hint(-1.5);
  g.anchor = 1.0;
  return g;
}

std::function<double(double)> phase_inv_x() {
  return [](double x) { return 1.0 / x; };
}
std::function<double(double)> phase_inv_sqrt_x() {
  return [](double x) { return 1.0 / std::sqrt(x); };
}

// g(x) = int_1^x (2+sin(1/y))/sqrt(y) dy
DCFunction example41_dc() {
  Expr dright = Expr::parse("(2+sin(1/x))/sqrt(x)");
  Expr second = Expr::parse("(-1)*cos(1/x)/x^(2.5)-0.5*(2+sin(1/x))/x^(1.5)");
  EndpointHints dright_hints, second_hints;
  dright_hints.lower = hint(-0.5, true, phase_inv_x());
  second_hints.lower = hint(std::nullopt, true, phase_inv_x());
  Expr d_copy = dright, s_copy = second;
  DCFunction g = make_integral_dc(
      {0.0, kInf}, [d_copy](double x) { return d_copy.eval(x); },
      [s_copy](double x) { return s_copy.eval(x); }, AtomSource::none(), 1.0,
      0.0, dright_hints, second_hints);
  g.dright_expr = dright;
  g.second_expr = second;
  g.anchor = 1.0;
  return g;
}

// g(x) = int_1^x (2+sin(1/sqrt(y))) dy
DCFunction remark36_dc() {
  Expr dright = Expr::parse("2+sin(1/sqrt(x))");
  Expr second = Expr::parse("(-0.5)*cos(1/sqrt(x))/x^(1.5)");
  EndpointHints dright_hints, second_hints;
  dright_hints.lower = hint(0.0, true, phase_inv_sqrt_x());
  second_hints.lower = hint(std::nullopt, true, phase_inv_sqrt_x());
  Expr d_copy = dright, s_copy = second;
  DCFunction g = make_integral_dc(
      {0.0, kInf}, [d_copy](double x) { return d_copy.eval(x); },
      [s_copy](double x) { return s_copy.eval(x); }, AtomSource::none(), 1.0,
      0.0, dright_hints, second_hints);
  g.dright_expr = dright;
  g.second_expr = second;
  g.anchor = 1.0;
  return g;
}

// spike interval (a_n, b_n) around 1/n
std::pair<double, double> spike_interval(long long n) {
  double dn = static_cast<double>(n);
  double w = 1.0 / (dn * dn * dn * dn);
  return {1.0 / dn - w, 1.0 / dn + w};
}

// g(x) = int_1^x hbar, hbar = x^{-2} on the spike set E, x^{-1/2} off E.
// The unsmoothed hbar jumps at the spike junctions, so g'' carries atoms
// there in addition to the piecewise density.
DCFunction example42_dc() {
  Expr dright = Expr::parse("spikes(x,(-2),(-0.5))");
  Expr second_structure = Expr::parse("spikes(x,(-3),(-1.5))");
  auto dright_fn = [](double x) {
    return std::pow(x, in_spike_set(x) ? -2.0 : -0.5);
  };
  auto second_fn = [](double x) {
    return in_spike_set(x) ? -2.0 * std::pow(x, -3.0)
                           : -0.5 * std::pow(x, -1.5);
  };
  // atoms: jump of hbar at b_n (enter from above) and a_n, descending
  auto gen = [](std::size_t k) -> std::optional<Atom> {
    long long n = 2 + static_cast<long long>(k / 2);
    auto [a, b] = spike_interval(n);
    if (b <= a) return std::nullopt;  // spike width under double resolution
    if (k % 2 == 0) {
      double w = std::pow(b, -0.5) - std::pow(b, -2.0);  // right minus left
      return Atom{b, w};
    }
    double w = std::pow(a, -2.0) - std::pow(a, -0.5);
    return Atom{a, w};
  };
  EndpointHints dright_hints, second_hints;  // spikes carry no usable band
  Expr bp = dright;
  DCFunction g = make_integral_dc(
      {0.0, kInf}, dright_fn, second_fn,
      AtomSource::generator(gen, /*decreasing=*/true), 1.0, 0.0, dright_hints,
      second_hints,
      [bp](double lo, double hi, std::size_t cap, std::vector<double>& out) {
        return bp.breakpoints(lo, hi, cap, out);
      });
  g.dright_expr = dright;
  g.second_expr = second_structure;
  g.anchor = 1.0;
  return g;
}

DCFunction mild_osc_dc() {
  Expr dright = Expr::parse("2+sin(1/x)");
  Expr second = Expr::parse("(-1)*cos(1/x)/x^2");
  EndpointHints dright_hints, second_hints;
  dright_hints.lower = hint(0.0, true, phase_inv_x());
  second_hints.lower = hint(std::nullopt, true, phase_inv_x());
  Expr d_copy = dright, s_copy = second;
  DCFunction g = make_integral_dc(
      {0.0, kInf}, [d_copy](double x) { return d_copy.eval(x); },
      [s_copy](double x) { return s_copy.eval(x); }, AtomSource::none(), 1.0,
      0.0, dright_hints, second_hints);
  g.dright_expr = dright;
  g.second_expr = second;
  g.anchor = 1.0;
  return g;
}

DCFunction from_exprs(Interval J, const char* value, const char* dright,
                      const char* second, DCFunction::Curvature curv,
                      std::vector<Atom> atoms = {}) {
  DCFunction g;
  g.domain = J;
  Expr v = Expr::parse(value);
  Expr dp = Expr::parse(dright);
  Expr dd = Expr::parse(second);
  g.value = [v](double x) { return v.eval(x); };
  g.dright = [dp](double x) { return dp.eval(x); };
  g.second_density = [dd](double x) { return dd.eval(x); };
  g.second_density_is_zero = dd.is_constant_zero();
  g.dright_expr = dp;
  g.second_expr = dd;
  g.curvature = curv;
  if (!atoms.empty()) g.atoms = AtomSource::list(std::move(atoms));
  if (auto c = dp.constant_value()) g.affine_slope = *c;
  return g;
}

// piecewise-linear convex g with derivative jumps 2^{-n} at 1/n
DCFunction atom_stairs_dc() {
  auto gen = [](std::size_t k) -> std::optional<Atom> {
    if (k > 60) return std::nullopt;  // weights below double resolution
    double n = static_cast<double>(k + 1);
    return Atom{1.0 / n, std::pow(2.0, -n)};
  };
  auto dright = [](double x) {
    // sum of weights at locations <= x: 2^{-n} for n >= ceil(1/x)
    if (x >= 1.0) return 1.0;  // all jumps collected: sum 2^{-n} = 1
    double n0 = std::ceil(1.0 / x);
    return std::pow(2.0, 1.0 - n0);
  };
  DCFunction g = make_integral_dc(
      {0.0, kInf}, dright, [](double) { return 0.0; },
      AtomSource::generator(gen, /*decreasing=*/true), 1.0, 0.0);
  g.second_density_is_zero = true;
  g.curvature = DCFunction::Curvature::Convex;
  g.anchor = 1.0;
  return g;
}

DiffusionSpec brownian(Interval J, double x0, double c) {
  DiffusionSpec d;
  d.state_space = J;
  d.drift = CoefficientFunction::constant(0.0);
  d.diffusion = CoefficientFunction::constant(1.0);
  d.start = x0;
  d.reference = c;
  return d;
}

DiffusionSpec bessel_half() {
  DiffusionSpec d;
  d.state_space = {0.0, kInf};
  EndpointHints mu_hints;
  mu_hints.lower = hint(-1.0);
  d.drift = CoefficientFunction::from_expr(Expr::parse("(-0.25)/x"), mu_hints);
  d.diffusion = CoefficientFunction::constant(1.0);
  d.start = 1.0;
  d.reference = 1.0;
  d.rho_power_lower = 0.5;  // rho(x) = sqrt(x)
  return d;
}

DiffusionSpec besq(double delta) {
  DiffusionSpec d;
  d.state_space = {0.0, kInf};
  d.drift = CoefficientFunction::constant(delta);
  EndpointHints sigma_hints;
  sigma_hints.lower = hint(0.5);
  d.diffusion =
      CoefficientFunction::from_expr(Expr::parse("2*sqrt(x)"), sigma_hints);
  d.start = 1.0;
  d.reference = 1.0;
  d.rho_power_lower = -0.5 * delta;  // rho(x) = x^{-delta/2}
  return d;
}

// Y = g(B^tau) through natural coordinates; classification of the identity
// function of Y pulls back to (base, g).
DiffusionSpec transformed_diffusion(const DCFunction& base_g) {
  auto base = std::make_shared<DiffusionSpec>(brownian({0.0, kInf}, 1.0, 1.0));
  auto g_ptr = std::make_shared<DCFunction>(base_g);

  std::string limit_note;
  auto lower_limit = g_endpoint_limit_auto(base_g, EndpointSide::Lower,
                                           &limit_note);
  if (!lower_limit)
    throw std::runtime_error("transformed diffusion needs a finite g(0+)");

  auto value = base_g.value;
  auto inverse = [value, lo_y = *lower_limit](double y) {
    // monotone bisection for value(x) = y
    double lo = 1e-300, hi = 1.0;
    while (value(hi) < y) hi *= 2.0;
    double f_lo_bound = lo_y;
    (void)f_lo_bound;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * (1.0 + hi); ++i) {
      double mid = 0.5 * (lo + hi);
      if (value(mid) < y)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };
  auto dright = g_ptr->dright;
  auto second = g_ptr->second_density;

  auto nc = std::make_shared<NaturalCoordinates>();
  nc->map = value;
  nc->map_inverse = inverse;
  nc->map_derivative = dright;
  nc->base = base;
  nc->map_dc = g_ptr;

  DiffusionSpec d;
  d.state_space = {*lower_limit, kInf};
  d.drift = CoefficientFunction(
      [inverse, second](double y) { return 0.5 * second(inverse(y)); });
  d.diffusion = CoefficientFunction(
      [inverse, dright](double y) { return dright(inverse(y)); });
  d.start = base_g.value(1.0);      // = 0 for the integral-defined examples
  d.reference = base_g.value(1.0);
  d.natural = nc;
  return d;
}

Preset make(const std::string& name) {
  Preset p;
  p.name = name;
  p.nu = SignedMeasure::lebesgue();
  if (name == "bm-identity") {
    p.description = "Brownian motion on (0,inf) absorbed at 0, g(x) = x";
    p.diffusion = brownian({0.0, kInf}, 1.0, 1.0);
    p.g = identity_on(p.diffusion.state_space);
    p.expected = Verdict::Semimartingale;
  } else if (name == "sqrt-bm") {
    p.description = "Brownian motion absorbed at 0, g(x) = sqrt(x)";
    p.diffusion = brownian({0.0, kInf}, 1.0, 1.0);
    p.g = sqrt_dc();
    p.expected = Verdict::Semimartingale;
  } else if (name == "example-4.1") {
    p.description =
        "g' = (2+sin(1/x))/sqrt(x): finite limits but infinite variation at "
        "the hitting time (first kind)";
    p.diffusion = brownian({0.0, kInf}, 1.0, 1.0);
    p.g = example41_dc();
    p.expected = Verdict::NonSemiFirstKind;
  } else if (name == "example-4.2") {
    p.description =
        "g' = x^-2 on the spike set, x^-1/2 off it: oscillating martingale "
        "part at the hitting time (second kind)";
    p.diffusion = brownian({0.0, kInf}, 1.0, 1.0);
    p.g = example42_dc();
    p.expected = Verdict::NonSemiSecondKind;
    p.mc.horizon = 3.0;
  } else if (name == "question-II-first-kind") {
    p.description =
        "diffusion Y = g(B^tau) for the first-kind g, classified through "
        "natural coordinates";
    p.diffusion = transformed_diffusion(example41_dc());
    p.g = identity_on(p.diffusion.state_space);
    p.g.anchor = p.diffusion.reference + 1.0;
    p.expected = Verdict::NonSemiFirstKind;
  } else if (name == "question-II-second-kind") {
    p.description =
        "diffusion Y = g(B^tau) for the second-kind g, classified through "
        "natural coordinates";
    p.diffusion = transformed_diffusion(example42_dc());
    p.g = identity_on(p.diffusion.state_space);
    p.g.anchor = p.diffusion.reference + 1.0;
    p.expected = Verdict::NonSemiSecondKind;
  } else if (name == "bessel-half-stopped") {
    p.description =
        "Bessel(1/2) drift mu = -1/(4x) stopped at 0: semimartingale via the "
        "sign-definite shortcut";
    p.diffusion = bessel_half();
    p.g = identity_on(p.diffusion.state_space);
    p.expected = Verdict::Semimartingale;
  } else if (name == "besq-delta") {
    p.description = "squared Bessel, delta = 1/2: dY = delta dt + 2 sqrt(Y) dW";
    p.diffusion = besq(0.5);
    p.g = identity_on(p.diffusion.state_space);
    p.expected = Verdict::Semimartingale;
    p.mc.dt = 2e-4;
    p.mc.horizon = 2.0;
  } else if (name == "remark-3.6-ii") {
    p.description =
        "g' = 2+sin(1/sqrt(x)): semimartingale although nu_g oscillates in "
        "sign";
    p.diffusion = brownian({0.0, kInf}, 1.0, 1.0);
    p.g = remark36_dc();
    p.expected = Verdict::Semimartingale;
  } else if (name == "atom-kink") {
    p.description = "Brownian motion on (0,2), g(x) = |x-1| (kink atom)";
    p.diffusion = brownian({0.0, 2.0}, 1.0, 1.0);
    p.g = from_exprs({0.0, 2.0}, "abs(x-1)", "(x<1?(-1):1)", "0",
                     DCFunction::Curvature::Convex, {{1.0, 2.0}});
    p.g.affine_slope.reset();  // piecewise, not affine
    p.expected = Verdict::Semimartingale;
    p.mc.horizon = 2.0;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return p;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& preset_names() {
  static const std::vector<std::pair<std::string, std::string>> names = {
      {"bm-identity", "Brownian motion absorbed at 0, g(x) = x"},
      {"sqrt-bm", "Brownian motion absorbed at 0, g(x) = sqrt(x)"},
      {"example-4.1", "first-kind loss of the semimartingale property"},
      {"example-4.2", "second-kind loss of the semimartingale property"},
      {"question-II-first-kind", "transformed diffusion, first kind"},
      {"question-II-second-kind", "transformed diffusion, second kind"},
      {"bessel-half-stopped", "Bessel(1/2) stopped at 0"},
      {"besq-delta", "squared Bessel, delta = 1/2"},
      {"remark-3.6-ii", "sign-oscillating nu_g, still a semimartingale"},
      {"atom-kink", "|x-1| of Brownian motion on (0,2)"},
  };
  return names;
}

Preset build_preset(std::string_view name) { return make(std::string(name)); }

DiffusionSpec brownian_on(Interval J, double x0, double c) {
  return brownian(J, x0, c);
}

std::vector<std::pair<std::string, DCFunction>> classification_battery() {
  std::vector<std::pair<std::string, DCFunction>> battery;
  battery.emplace_back("identity", identity_on({0.0, kInf}));
  battery.emplace_back("sqrt", sqrt_dc());
  battery.emplace_back("example-4.1", example41_dc());
  battery.emplace_back("example-4.2", example42_dc());
  battery.emplace_back("remark-3.6-ii", remark36_dc());
  battery.emplace_back("mild-osc", mild_osc_dc());
  battery.emplace_back(
      "atom-kink", from_exprs({0.0, kInf}, "abs(x-1)", "(x<1?(-1):1)", "0",
                              DCFunction::Curvature::Convex, {{1.0, 2.0}}));
  battery.emplace_back("square",
                       from_exprs({0.0, kInf}, "x^2", "2*x", "2",
                                  DCFunction::Curvature::Convex));
  battery.emplace_back("exp", from_exprs({0.0, kInf}, "exp(x)", "exp(x)",
                                         "exp(x)",
                                         DCFunction::Curvature::Convex));
  battery.emplace_back(
      "reciprocal", from_exprs({0.0, kInf}, "1/x", "(-1)/x^2", "2/x^3",
                               DCFunction::Curvature::Convex));
  battery.emplace_back(
      "neg-quadratic",
      from_exprs({0.0, kInf}, "(-1)*(x-2)^2", "(-2)*(x-2)", "(-2)",
                 DCFunction::Curvature::Concave));
  battery.emplace_back("atom-stairs", atom_stairs_dc());
  return battery;
}

}  // namespace semimart
