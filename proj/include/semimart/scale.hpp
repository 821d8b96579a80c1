#pragma once

#include <memory>
#include <optional>

#include "semimart/convergence.hpp"
#include "semimart/funcmodel.hpp"

namespace semimart {

// Scale density rho(x) = exp(-int_c^x 2 mu/sigma^2) and scale function
// s(x) = int_c^x rho, with cached quadrature and shell-based endpoint
// limits. When the diffusion carries NaturalCoordinates, everything is
// delegated to the base diffusion through the coordinate map.
class ScaleModel {
 public:
  explicit ScaleModel(const DiffusionSpec& d,
                      QuadratureOptions qopts = {},
                      ShellRuleOptions sopts = {});

  double rho(double x) const;
  double scale(double x) const;

  struct Limit {
    ConvergenceVerdict verdict;
    double value = 0.0;  // +-inf when Divergent; meaningless if Inconclusive
    bool finite = false;
  };
  const Limit& limit(EndpointSide side) const;

  // Certified exponent of rho toward the endpoint (from the spec's hint,
  // from constant coefficients, or absent).
  std::optional<double> rho_power(EndpointSide side) const;

  // Certified power of (s - s(e))/rho toward endpoint e. Equals 1 whenever
  // s(e) is finite and rho is power-like with exponent > -1 (validated by
  // band sampling); absent otherwise.
  std::optional<double> scale_term_power(EndpointSide side) const;

  // Base-coordinate model when the diffusion uses natural coordinates.
  const ScaleModel* base_model() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// Free functions matching the operation names.
double rho(const DiffusionSpec& d, double x);
double scale(const DiffusionSpec& d, double x);
ScaleModel::Limit scale_limit(const DiffusionSpec& d, EndpointSide side);

}  // namespace semimart
