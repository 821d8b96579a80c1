#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semimart/funcmodel.hpp"
#include "semimart/semimart.hpp"

namespace semimart {

struct McDefaults {
  std::uint64_t seed = 20240901;
  std::size_t paths = 200;
  double dt = 1e-3;
  double horizon = 4.0;
};

struct Preset {
  std::string name;
  std::string description;
  DiffusionSpec diffusion;
  DCFunction g;
  SignedMeasure nu;  // measure for additive-functional runs
  Verdict expected = Verdict::NotDetermined;
  McDefaults mc;
};

const std::vector<std::pair<std::string, std::string>>& preset_names();

// Builds a preset by name; throws std::invalid_argument for unknown names.
Preset build_preset(std::string_view name);

// Brownian motion (mu=0, sigma=1) on the interval, started at x0 = c = mid.
DiffusionSpec brownian_on(Interval J, double x0, double c);

// The g-battery on (0,inf) used by the implication and lemma suites:
// every preset g plus extra convex/concave and oscillatory members.
std::vector<std::pair<std::string, DCFunction>> classification_battery();

}  // namespace semimart
