#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semimart/funcmodel.hpp"

namespace semimart {

struct Absorption {
  double time;
  EndpointSide endpoint;
};

struct PathSample {
  std::vector<double> times;   // strictly increasing grid
  std::vector<double> values;  // Y at grid times; constant after absorption
  std::optional<Absorption> absorbed;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double dt = 0.0;
};

struct SimOptions {
  // coefficients are frozen at the endpoint value after absorption
  enum class Boundary { Absorb, Clamp } boundary = Boundary::Absorb;
  // when finite, steps above this height are coarsened as
  // dt * max(1, ((y - coarsen_above)/coarsen_width)^2); exact in law for
  // Brownian coefficients, used by long-horizon first-passage runs
  double coarsen_above = kInf;
  double coarsen_width = 1.0;
  std::uint64_t max_steps = 200'000'000;
};

// Euler-Maruyama path with linear-interpolated boundary crossing.
PathSample simulate_path(const DiffusionSpec& d, double dt, double horizon,
                         std::uint64_t seed, std::uint64_t stream,
                         const SimOptions& opts = {});

// Occupation-time local-time estimate at level y with bandwidth eps:
// (1/2eps) sum 1{|Y_s - y| < eps} sigma^2(Y_s) dt up to absorption.
double estimate_local_time(const PathSample& path, const DiffusionSpec& d,
                           double y, double eps);

struct PathFunctionals {
  std::vector<double> qv;      // running <M,M>_t estimate
  std::vector<double> a_path;  // running A_t
  std::vector<double> var_a;   // running total variation of A
  std::vector<double> g_path;  // g(Y_t)
};

// Riemann-sum path functionals; g'' atoms enter through local-time
// estimates at the atom locations.
PathFunctionals path_functionals(const PathSample& path,
                                 const DiffusionSpec& d, const DCFunction& g,
                                 double local_time_eps);

struct LevelStats {
  double level = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double z_mean = 0.0;      // against the squared-Bessel(2) moments
  double z_variance = 0.0;
  double expected_mean = 0.0;
  double expected_variance = 0.0;
};

struct RayKnightReport {
  std::vector<LevelStats> levels;
  std::size_t paths = 0;
  std::size_t unfinished_paths = 0;  // hit the step cap before absorbing
  double dt = 0.0;
  double eps = 0.0;
};

// Brownian motion from x0 absorbed at l: compares empirical local-time
// moments at the given levels with the first Ray-Knight theorem's
// squared-Bessel(2) moments (mean 2u, variance 4u^2).
RayKnightReport ray_knight_check(double x0, double l,
                                 const std::vector<double>& levels,
                                 std::size_t n_paths, double dt,
                                 std::uint64_t seed, int threads = 0);

struct AbsorptionReport {
  double empirical = 0.0;
  double expected = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
  std::string bias_note;
};

// Empirical P(tau_l <= horizon) for Brownian motion from x0.
AbsorptionReport absorption_probability_check(double x0, double l,
                                              double horizon,
                                              std::size_t n_paths, double dt,
                                              std::uint64_t seed,
                                              int threads = 0);

// Occupation identity sum_y Lhat^y_t * h vs t ^ zeta for sigma = 1 paths.
double occupation_identity_residual(const PathSample& path,
                                    const DiffusionSpec& d, double t,
                                    double eps);

enum class EmpiricalKind {
  SemimartingaleLike,
  FirstKindLike,
  SecondKindLike,
  Inconclusive,
};
const char* to_string(EmpiricalKind k);

struct ProbeThresholds {
  // pilot-calibrated defaults; a refinement step multiplies dt by 1/4 and
  // the first-kind variation signal grows by ~sqrt(2) per step
  double stabilize_below = 1.12;
  double grow_above = 1.30;
};

struct DivergenceProbeReport {
  std::vector<double> dts;
  std::vector<double> qv_medians;
  std::vector<double> var_a_medians;
  EmpiricalKind kind = EmpiricalKind::Inconclusive;
  std::string note;
};

struct ProbeOptions {
  std::vector<double> dt_factors = {1.0, 0.25, 0.0625};
  std::size_t paths = 200;
  double horizon = 4.0;
  ProbeThresholds thresholds;
  int threads = 0;
};

// Empirical corroboration of the deterministic verdicts: medians of the
// occupation-form qv and Var A across a dt-refinement schedule. Heuristic
// by construction; never overrides the deterministic classification.
DivergenceProbeReport divergence_probe(const DiffusionSpec& d,
                                       const DCFunction& g, double dt,
                                       std::uint64_t seed,
                                       const ProbeOptions& opts = {});

// Occupation fraction near zero for the Bessel demonstration: simulates the
// squared process, takes square roots, and reports the time fraction the
// path spends within each band.
std::vector<double> bessel_zero_occupation(double delta, double x0,
                                           const std::vector<double>& bands,
                                           double dt, double horizon,
                                           std::size_t n_paths,
                                           std::uint64_t seed);

int resolve_threads(int requested);

}  // namespace semimart
