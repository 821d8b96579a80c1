#pragma once

#include <string>

#include <json.hpp>

#include "semimart/addfun.hpp"
#include "semimart/boundary.hpp"
#include "semimart/mc.hpp"
#include "semimart/semimart.hpp"

namespace semimart {

// Machine-readable report: `body` is deterministic (byte-identical for the
// same configuration and seed); `meta` carries timings and other
// run-dependent information.
struct Report {
  nlohmann::json body;
  nlohmann::json meta;

  std::string to_json_string() const;
  std::string to_text() const;
};

Report make_report(const std::string& command, const std::string& config_hash,
                   std::uint64_t seed);

nlohmann::json to_json(const ConvergenceVerdict& v);
nlohmann::json to_json(const BoundaryReport& b);
nlohmann::json to_json(const SemimartingaleVerdict& v);
nlohmann::json to_json(const AdditiveFunctionalReport& r);
nlohmann::json to_json(const DivergenceProbeReport& r);
nlohmann::json to_json(const RayKnightReport& r);
nlohmann::json to_json(const AbsorptionReport& r);

}  // namespace semimart
