#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "semimart/boundary.hpp"
#include "semimart/convergence.hpp"
#include "semimart/funcmodel.hpp"

namespace semimart {

enum class Verdict {
  Semimartingale,
  NonSemiFirstKind,
  NonSemiSecondKind,
  NotDetermined,
  NotApplicable,
};
const char* to_string(Verdict v);

enum class ShortcutResult { AppliesPositive, AppliesNegative, NotApplicable };
const char* to_string(ShortcutResult s);

// Integrability of (s-s(e))/rho * (g'_+)^2 with respect to Lebesgue near the
// exit endpoint: violated iff g(Y) is a non-semimartingale of the second
// kind.
ConvergenceVerdict necessary_condition(const DiffusionSpec& d,
                                       const DCFunction& g,
                                       EndpointSide side = EndpointSide::Lower);

// Integrability of (s-s(e))/rho with respect to |nu_g| near the exit
// endpoint: holds iff g(Y) is a semimartingale (on the exit side).
ConvergenceVerdict full_condition(const DiffusionSpec& d, const DCFunction& g,
                                  EndpointSide side = EndpointSide::Lower);

// Certifies a sign-definite neighborhood of nu_g next to the endpoint
// (sufficient for the semimartingale property). Conservative: any observed
// sign mixing or unresolved atom stream yields NotApplicable.
ShortcutResult sign_definite_shortcut(const DiffusionSpec& d,
                                      const DCFunction& g,
                                      EndpointSide side = EndpointSide::Lower);

struct EndpointAnalysis {
  EndpointSide side = EndpointSide::Lower;
  ShortcutResult shortcut = ShortcutResult::NotApplicable;
  std::optional<ConvergenceVerdict> necessary;
  std::optional<ConvergenceVerdict> full;
  enum class Outcome { Ok, FirstKind, SecondKind, NotDetermined } outcome =
      Outcome::NotDetermined;
};

struct SemimartingaleVerdict {
  Verdict verdict = Verdict::NotDetermined;
  ConvergenceVerdict cond_necessary;
  ConvergenceVerdict cond_full;
  bool shortcut_used = false;
  BoundaryReport boundary;
  std::vector<EndpointAnalysis> endpoints;
  std::string notes;
};

// Full decision chain: boundary case, then per exit endpoint
// shortcut -> necessary -> full; case D needs both endpoints.
SemimartingaleVerdict classify(const DiffusionSpec& d, const DCFunction& g);

// When d is a monotone image of a base diffusion and g is affine, the
// equivalent base-coordinate problem (classifying (g o map)(X)); nullopt
// otherwise.
std::optional<std::pair<DiffusionSpec, DCFunction>> natural_pullback(
    const DiffusionSpec& d, const DCFunction& g);

// Brownian specialization on (0,inf): the pair of tests
// (x |g''| incl. atoms, x (g'_+)^2). Verdict-equal to
// (full_condition, necessary_condition) under mu=0, sigma=1.
std::pair<ConvergenceVerdict, ConvergenceVerdict> brownian_conditions(
    const DCFunction& g);

// Constructive convex decomposition g = H1 - H2 with H_i convex on (0,inf)
// and finite at 0, available iff x is |g''|-integrable at 0+.
struct ConvexDecomposition {
  bool ok = false;
  ConvergenceVerdict precondition;
  DCFunction h1, h2;
  std::string note;
};
ConvexDecomposition convex_decompose(const DCFunction& g);

// Real-analysis implication suite over a battery of DC functions on (0,a):
//  - integrable x|g''| implies a finite limit at 0 and integrable x (g')^2
//  - convex/concave with a finite limit implies integrable x|g''|
struct LemmaCheck {
  std::string name;
  ConvergenceVerdict x_gpp;   // x in L1(0+,|g''|)
  ConvergenceVerdict x_gp2;   // x (g')^2 in L1(0+)
  bool limit_exists = false;
  bool lemra1_applicable = false;
  bool lemra1_violated = false;
  bool lemra2_applicable = false;
  bool lemra2_violated = false;
};
struct LemmaSuiteReport {
  std::vector<LemmaCheck> checks;
  int violations = 0;
};
LemmaSuiteReport lemma_implication_suite(
    const std::vector<std::pair<std::string, DCFunction>>& battery);

}  // namespace semimart
