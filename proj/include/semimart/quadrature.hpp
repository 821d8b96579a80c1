#pragma once

#include <functional>
#include <span>
#include <vector>

namespace semimart {

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  int max_subdivisions = 1 << 15;
  int oscillation_panels_per_period = 4;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // estimated bound on |value - true|
  bool converged = false;
  long evaluations = 0;
  int subdivisions = 0;
};

// Adaptive Gauss-Kronrod (G7,K15) integrator over finite intervals.
// Interior breakpoints seed the initial segment list so kinks and
// piecewise switches never sit inside a panel. The oscillatory variant
// pre-splits so the supplied monotone phase advances at most
// pi/oscillation_panels_per_period per panel.
class QuadratureEngine {
 public:
  using Fn = std::function<double(double)>;

  explicit QuadratureEngine(QuadratureOptions opts = {}) : opts_(opts) {}

  QuadratureResult integrate(const Fn& f, double a, double b) const;
  QuadratureResult integrate(const Fn& f, double a, double b,
                             std::span<const double> breakpoints) const;

  // `phase` must be strictly monotone on [a,b]. Fails (converged=false)
  // when more than max_panels phase panels would be required.
  QuadratureResult integrate_oscillatory(const Fn& f, double a, double b,
                                         const Fn& phase,
                                         std::size_t max_panels,
                                         std::span<const double> breakpoints =
                                             {}) const;

  const QuadratureOptions& options() const { return opts_; }

 private:
  QuadratureResult run(const Fn& f, std::vector<std::pair<double, double>>
                                        segments) const;
  QuadratureOptions opts_;
};

}  // namespace semimart
