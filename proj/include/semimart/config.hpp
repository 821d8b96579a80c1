#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "semimart/funcmodel.hpp"

namespace semimart {

// All schema violations reported at once, each with its JSON path.
struct ConfigError : std::runtime_error {
  explicit ConfigError(std::vector<std::string> issues_in)
      : std::runtime_error(join(issues_in)), issues(std::move(issues_in)) {}
  std::vector<std::string> issues;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid configuration:";
    for (const auto& s : v) out += "\n  " + s;
    return out;
  }
};

struct McSettings {
  std::uint64_t seed = 1;
  std::size_t paths = 200;
  double dt = 1e-3;
  std::vector<double> dt_factors = {1.0, 0.25, 0.0625};
  double horizon = 4.0;
};

struct ProblemConfig {
  DiffusionSpec diffusion;
  std::optional<DCFunction> g;
  std::optional<SignedMeasure> nu;
  McSettings mc;
  nlohmann::json raw;
  std::string config_hash;  // FNV-1a of the canonical dump
};

ProblemConfig load_config(const nlohmann::json& j);
ProblemConfig load_config_file(const std::string& path);

std::string fnv1a_hex(const std::string& data);

}  // namespace semimart
