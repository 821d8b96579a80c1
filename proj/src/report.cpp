#include "semimart/report.hpp"

#include <cmath>
#include <sstream>

#include "semimart/version.hpp"

namespace semimart {

using nlohmann::json;

namespace {

json finite_or_string(double v) {
  if (std::isnan(v)) return "nan";
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

}  // namespace

json to_json(const ConvergenceVerdict& v) {
  json shells = json::array();
  for (const ShellMass& s : v.shells) {
    shells.push_back({{"k", s.index},
                      {"lo", finite_or_string(s.lo)},
                      {"hi", finite_or_string(s.hi)},
                      {"mass", s.abs_mass},
                      {"resolved", s.resolved}});
  }
  json out = {
      {"status", to_string(v.status)},
      {"cap_hit", v.cap_hit},
      {"hint_used", v.hint_used},
      {"decision_note", v.decision_note},
      {"shells", std::move(shells)},
  };
  if (v.convergent()) {
    out["estimate"] = v.estimate;
    out["estimate_error"] = v.estimate_error;
  }
  return out;
}

json to_json(const BoundaryReport& b) {
  json out = {
      {"s_l", finite_or_string(b.s_l)},
      {"s_r", finite_or_string(b.s_r)},
      {"exits_at_l", to_string(b.exits_l)},
      {"exits_at_r", to_string(b.exits_r)},
      {"case", to_string(b.case_label)},
      {"notes", b.notes},
  };
  if (b.g_limit_l) out["g_limit_l"] = *b.g_limit_l;
  if (b.g_limit_r) out["g_limit_r"] = *b.g_limit_r;
  json evidence = json::array();
  for (const auto& v : b.evidence) evidence.push_back(to_json(v));
  out["evidence"] = std::move(evidence);
  return out;
}

json to_json(const SemimartingaleVerdict& v) {
  json endpoints = json::array();
  for (const auto& ea : v.endpoints) {
    json e = {
        {"side", ea.side == EndpointSide::Lower ? "l" : "r"},
        {"shortcut", to_string(ea.shortcut)},
    };
    if (ea.necessary) e["necessary"] = to_json(*ea.necessary);
    if (ea.full) e["full"] = to_json(*ea.full);
    switch (ea.outcome) {
      case EndpointAnalysis::Outcome::Ok: e["outcome"] = "ok"; break;
      case EndpointAnalysis::Outcome::FirstKind:
        e["outcome"] = "first-kind";
        break;
      case EndpointAnalysis::Outcome::SecondKind:
        e["outcome"] = "second-kind";
        break;
      default: e["outcome"] = "not-determined"; break;
    }
    endpoints.push_back(std::move(e));
  }
  return {
      {"verdict", to_string(v.verdict)},
      {"cond_necessary", to_json(v.cond_necessary)},
      {"cond_full", to_json(v.cond_full)},
      {"shortcut_used", v.shortcut_used},
      {"case", to_string(v.boundary.case_label)},
      {"boundary", to_json(v.boundary)},
      {"endpoints", std::move(endpoints)},
      {"notes", v.notes},
  };
}

json to_json(const AdditiveFunctionalReport& r) {
  json out = {
      {"d_nu_interior", r.d_nu.interior_points},
      {"reduced_interval",
       {{"alpha", finite_or_string(r.d_nu.reduced.lower)},
        {"beta", finite_or_string(r.d_nu.reduced.upper)}}},
      {"start_inside_d", r.d_nu.start_inside_d},
      {"before_clause", r.before_clause},
      {"after_clause", r.after_clause},
      {"recurrent_case", r.recurrent_case},
      {"lower_reachable", r.lower_reachable},
      {"upper_reachable", r.upper_reachable},
      {"confirmations", r.d_nu.confirmations},
      {"notes", r.notes},
  };
  if (r.verdict_at_lower) out["verdict_at_lower"] = to_json(*r.verdict_at_lower);
  if (r.verdict_at_upper) out["verdict_at_upper"] = to_json(*r.verdict_at_upper);
  return out;
}

json to_json(const DivergenceProbeReport& r) {
  return {
      {"dts", r.dts},
      {"qv_medians", r.qv_medians},
      {"var_a_medians", r.var_a_medians},
      {"kind", to_string(r.kind)},
      {"note", r.note},
  };
}

json to_json(const RayKnightReport& r) {
  json levels = json::array();
  for (const auto& s : r.levels) {
    levels.push_back({{"level", s.level},
                      {"mean", s.mean},
                      {"variance", s.variance},
                      {"expected_mean", s.expected_mean},
                      {"expected_variance", s.expected_variance},
                      {"z_mean", s.z_mean},
                      {"z_variance", s.z_variance}});
  }
  return {{"levels", std::move(levels)},
          {"paths", r.paths},
          {"unfinished_paths", r.unfinished_paths},
          {"dt", r.dt},
          {"eps", r.eps}};
}

json to_json(const AbsorptionReport& r) {
  return {{"empirical", r.empirical},
          {"expected", r.expected},
          {"std_error", r.std_error},
          {"paths", r.paths},
          {"bias_note", r.bias_note}};
}

Report make_report(const std::string& command, const std::string& config_hash,
                   std::uint64_t seed) {
  Report rep;
  rep.body["schema_version"] = kReportSchemaVersion;
  rep.body["command"] = command;
  rep.body["provenance"] = {
      {"config_hash", config_hash},
      {"seed", seed},
      {"version", kVersion},
  };
  rep.meta = json::object();
  return rep;
}

std::string Report::to_json_string() const {
  json combined = body;
  combined["meta"] = meta;
  return combined.dump(2) + "\n";
}

namespace {

void render_convergence(std::ostringstream& os, const std::string& label,
                        const json& v, int indent) {
  std::string pad(indent, ' ');
  os << pad << label << ": " << v["status"].get<std::string>();
  if (v.contains("estimate"))
    os << "  estimate=" << v["estimate"].get<double>() << " (+/- "
       << v["estimate_error"].get<double>() << ")";
  os << "\n" << pad << "  " << v["decision_note"].get<std::string>() << "\n";
  const auto& shells = v["shells"];
  if (!shells.empty()) {
    os << pad << "  shells:";
    std::size_t n = shells.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (n > 12 && i == 6) {
        os << " ...";
        i = n - 6;
      }
      os << " " << shells[i]["mass"].get<double>();
    }
    os << "\n";
  }
}

}  // namespace

std::string Report::to_text() const {
  std::ostringstream os;
  os.precision(10);
  os << "command: " << body["command"].get<std::string>() << "\n";
  os << "config:  " << body["provenance"]["config_hash"].get<std::string>()
     << "  seed " << body["provenance"]["seed"] << "\n";
  if (body.contains("boundary")) {
    const auto& b = body["boundary"];
    os << "boundary: case " << b["case"].get<std::string>() << "  s_l="
       << b["s_l"].dump() << "  s_r=" << b["s_r"].dump() << "  exits(l,r)=("
       << b["exits_at_l"].get<std::string>() << ","
       << b["exits_at_r"].get<std::string>() << ")\n";
    if (b.contains("g_limit_l")) os << "  g(l+) = " << b["g_limit_l"] << "\n";
    if (b.contains("g_limit_r")) os << "  g(r-) = " << b["g_limit_r"] << "\n";
  }
  if (body.contains("semimartingale")) {
    const auto& s = body["semimartingale"];
    os << "verdict: " << s["verdict"].get<std::string>();
    if (s["shortcut_used"].get<bool>()) os << "  (sign-definite shortcut)";
    os << "\n";
    render_convergence(os, "necessary condition", s["cond_necessary"], 2);
    render_convergence(os, "full condition", s["cond_full"], 2);
    if (!s["notes"].get<std::string>().empty())
      os << "  notes: " << s["notes"].get<std::string>() << "\n";
  }
  if (body.contains("addfun")) {
    const auto& a = body["addfun"];
    os << "additive functional:\n";
    os << "  reduced interval: (" << a["reduced_interval"]["alpha"].dump()
       << ", " << a["reduced_interval"]["beta"].dump() << ")\n";
    os << "  " << a["before_clause"].get<std::string>() << "\n";
    os << "  " << a["after_clause"].get<std::string>() << "\n";
    if (a["recurrent_case"].get<bool>())
      os << "  recurrent: infinite at the exit time for any nonzero measure\n";
    if (a.contains("verdict_at_lower"))
      render_convergence(os, "at lower exit", a["verdict_at_lower"], 2);
    if (a.contains("verdict_at_upper"))
      render_convergence(os, "at upper exit", a["verdict_at_upper"], 2);
  }
  if (body.contains("probe")) {
    const auto& p = body["probe"];
    os << "divergence probe: " << p["kind"].get<std::string>() << "\n";
    os << "  qv medians:   ";
    for (const auto& v : p["qv_medians"]) os << v.get<double>() << " ";
    os << "\n  var medians:  ";
    for (const auto& v : p["var_a_medians"]) os << v.get<double>() << " ";
    os << "\n";
  }
  if (body.contains("simulate")) {
    const auto& s = body["simulate"];
    os << "simulation: paths=" << s["paths"] << " dt=" << s["dt"]
       << " horizon=" << s["horizon"] << "\n";
    os << "  absorbed fraction: " << s["absorbed_fraction"] << "\n";
    os << "  terminal mean/var: " << s["terminal_mean"] << " / "
       << s["terminal_variance"] << "\n";
  }
  if (body.contains("verify")) {
    const auto& v = body["verify"];
    os << "verify: deterministic " << v["deterministic"].get<std::string>()
       << " vs empirical " << v["empirical"].get<std::string>() << " -> "
       << (v["agree"].get<bool>() ? "AGREE" : "DISAGREE") << "\n";
  }
  if (meta.contains("timings_ms")) {
    os << "timings (ms):";
    for (auto it = meta["timings_ms"].begin(); it != meta["timings_ms"].end();
         ++it)
      os << " " << it.key() << "=" << it.value();
    os << "\n";
  }
  return os.str();
}

}  // namespace semimart
