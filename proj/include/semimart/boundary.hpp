#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semimart/convergence.hpp"
#include "semimart/funcmodel.hpp"
#include "semimart/scale.hpp"

namespace semimart {

enum class ExitVerdict { Yes, No, Inconclusive };
const char* to_string(ExitVerdict v);

enum class CaseLabel { A, B, C, D, NotApplicable, Inconclusive };
const char* to_string(CaseLabel c);

struct ExitEvidence {
  ScaleModel::Limit scale_limit;
  std::optional<ConvergenceVerdict> feller_integral;
  // With a finite scale limit but a divergent Feller integral, the endpoint
  // attracts at infinite time instead of being exited at a finite time.
  bool attracts_without_exit = false;
};

// Feller's test: the diffusion exits at the endpoint iff the scale limit is
// finite and (s(e)-s)/(rho sigma^2) is integrable near the endpoint.
ExitVerdict feller_exit_test(const DiffusionSpec& d, EndpointSide side,
                             ExitEvidence* evidence = nullptr);

struct BoundaryReport {
  double s_l = -kInf;
  double s_r = kInf;
  ExitVerdict exits_l = ExitVerdict::Inconclusive;
  ExitVerdict exits_r = ExitVerdict::Inconclusive;
  CaseLabel case_label = CaseLabel::Inconclusive;
  std::optional<double> g_limit_l, g_limit_r;
  std::vector<ConvergenceVerdict> evidence;
  std::string notes;
};

// Combines exit tests at both endpoints with finite-limit detection for g.
BoundaryReport classify_case(const DiffusionSpec& d, const DCFunction& g);

// Cauchy-stabilized endpoint limit along a monotone probe sequence: present
// when the last 5 successive probe values differ by less than abs_tol.
std::optional<double> g_endpoint_limit(const DCFunction& g, EndpointSide side,
                                       std::span<const double> probes,
                                       double abs_tol = 1e-9);

// Default probe sequence e + (z-e) 2^{-k}, k = 0..40.
std::vector<double> default_probe_sequence(const Interval& domain,
                                           EndpointSide side, double z);

// Robust limit used by classify_case: decides existence through the
// integrability of |g'| near the endpoint (with probe fallback), which also
// works for oscillatory integral-defined g where deep probes are
// unresolvable.
std::optional<double> g_endpoint_limit_auto(const DCFunction& g,
                                            EndpointSide side,
                                            std::string* note = nullptr);

}  // namespace semimart
