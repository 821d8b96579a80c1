#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semimart/convergence.hpp"
#include "semimart/funcmodel.hpp"

namespace semimart {

// Points where local finiteness of nu fails, plus endpoint labels, and the
// reduced interval (alpha, beta) around the start point.
struct NonLocalFinitenessSet {
  std::vector<double> interior_points;  // declared, confirmed where possible
  Interval reduced;                     // (alpha, beta); degenerate if x0 in D
  bool start_inside_d = false;
  std::vector<std::string> confirmations;  // one note per declared point
};

NonLocalFinitenessSet non_local_finiteness_set(const SignedMeasure& nu,
                                               const Interval& J, double x0);

struct AdditiveFunctionalReport {
  NonLocalFinitenessSet d_nu;
  // a.s. statements from the reduction: finite before hitting D^nu,
  // infinite strictly after
  std::string before_clause;
  std::string after_clause;
  // on the reduced interval: when both scale limits are infinite the
  // functional is infinite at the exit time for any nonzero nu
  bool recurrent_case = false;
  std::optional<ConvergenceVerdict> verdict_at_lower, verdict_at_upper;
  bool lower_reachable = false, upper_reachable = false;
  std::string notes;
};

// Finiteness classification of int_J L^y_t(Y) nu(dy) per the reduction to
// (alpha, beta) and the scale-weighted integrability tests at reachable
// endpoints.
AdditiveFunctionalReport classify_additive_functional(const DiffusionSpec& d,
                                                      const SignedMeasure& nu);

// Brownian zero-one criterion: int_I L^y_{tau_l}(B) nu(dy) is a.s. finite
// iff (x - l) is nu-integrable at l+.
ConvergenceVerdict brownian_local_time_criterion(const SignedMeasure& nu,
                                                 double l, double z);

}  // namespace semimart
