#include "semimart/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "semimart/rng.hpp"
#include "semimart/semimart.hpp"

namespace semimart {

const char* to_string(EmpiricalKind k) {
  switch (k) {
    case EmpiricalKind::SemimartingaleLike: return "semimartingale-like";
    case EmpiricalKind::FirstKindLike: return "first-kind-like";
    case EmpiricalKind::SecondKindLike: return "second-kind-like";
    default: return "inconclusive";
  }
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SEMIMART_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

namespace {

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  threads = resolve_threads(threads);
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

struct CoefficientFast {
  bool is_const;
  double value;
  const CoefficientFunction* fn;
  double operator()(double x) const { return is_const ? value : (*fn)(x); }
};

CoefficientFast fast(const CoefficientFunction& c) {
  auto v = c.constant_value();
  return {v.has_value(), v.value_or(0.0), &c};
}

// One Euler-Maruyama path; visit(t, y, dt_step) is called with the state at
// the start of each (possibly partial) step.
template <class Visitor>
std::optional<Absorption> run_path(const DiffusionSpec& d, double dt,
                                   double horizon, std::uint64_t seed,
                                   std::uint64_t stream, const SimOptions& opts,
                                   Visitor&& visit) {
  CounterRng rng(seed, stream);
  CoefficientFast mu = fast(d.drift);
  CoefficientFast sigma = fast(d.diffusion);
  const double lo = d.state_space.lower, hi = d.state_space.upper;
  double t = 0.0, y = d.start;
  for (std::uint64_t step = 0; step < opts.max_steps && t < horizon; ++step) {
    double dt_step = dt;
    if (std::isfinite(opts.coarsen_above) && y > opts.coarsen_above) {
      double f = (y - opts.coarsen_above) / opts.coarsen_width;
      dt_step = dt * std::min(1e6, std::max(1.0, f * f));
    }
    if (t + dt_step > horizon) dt_step = horizon - t;
    double m = mu(y);
    double s = sigma(y);
    double z = rng.normal(step);
    double y_next = y + m * dt_step + s * std::sqrt(dt_step) * z;
    bool cross_lo = std::isfinite(lo) && y_next <= lo;
    bool cross_hi = std::isfinite(hi) && y_next >= hi;
    if ((cross_lo || cross_hi) && opts.boundary == SimOptions::Boundary::Absorb) {
      double target = cross_lo ? lo : hi;
      double theta = (y_next == y) ? 1.0 : (y - target) / (y - y_next);
      theta = std::min(1.0, std::max(0.0, theta));
      visit(t, y, theta * dt_step);
      return Absorption{t + theta * dt_step,
                        cross_lo ? EndpointSide::Lower : EndpointSide::Upper};
    }
    if (opts.boundary == SimOptions::Boundary::Clamp) {
      if (cross_lo) y_next = lo;
      if (cross_hi) y_next = hi;
    }
    visit(t, y, dt_step);
    t += dt_step;
    y = y_next;
  }
  return std::nullopt;
}

}  // namespace

PathSample simulate_path(const DiffusionSpec& d, double dt, double horizon,
                         std::uint64_t seed, std::uint64_t stream,
                         const SimOptions& opts) {
  PathSample path;
  path.seed = seed;
  path.stream = stream;
  path.dt = dt;
  path.times.reserve(static_cast<std::size_t>(horizon / dt) + 2);
  path.values.reserve(path.times.capacity());
  auto absorbed = run_path(d, dt, horizon, seed, stream, opts,
                           [&](double t, double y, double) {
                             path.times.push_back(t);
                             path.values.push_back(y);
                           });
  path.absorbed = absorbed;
  if (absorbed) {
    path.times.push_back(absorbed->time);
    path.values.push_back(d.state_space.endpoint(absorbed->endpoint));
  } else if (!path.times.empty()) {
    double last_dt = std::min(dt, horizon - path.times.back());
    path.times.push_back(path.times.back() + std::max(last_dt, 0.0));
    path.values.push_back(path.values.back());
  }
  return path;
}

double estimate_local_time(const PathSample& path, const DiffusionSpec& d,
                           double y, double eps) {
  CoefficientFast sigma = fast(d.diffusion);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < path.times.size(); ++i) {
    double dt = path.times[i + 1] - path.times[i];
    double v = path.values[i];
    if (std::fabs(v - y) < eps) {
      double s = sigma(v);
      acc += s * s * dt;
    }
  }
  return acc / (2.0 * eps);
}

PathFunctionals path_functionals(const PathSample& path,
                                 const DiffusionSpec& d, const DCFunction& g,
                                 double local_time_eps) {
  PathFunctionals out;
  std::size_t n = path.times.size();
  out.qv.assign(n, 0.0);
  out.a_path.assign(n, 0.0);
  out.var_a.assign(n, 0.0);
  out.g_path.assign(n, 0.0);
  if (n == 0) return out;

  CoefficientFast mu = fast(d.drift);
  CoefficientFast sigma = fast(d.diffusion);
  double range_lo = *std::min_element(path.values.begin(), path.values.end());
  double range_hi = *std::max_element(path.values.begin(), path.values.end());
  std::vector<Atom> atoms;
  if (!g.atoms.empty())
    atoms = g.atoms.collect(range_lo - local_time_eps,
                            range_hi + local_time_eps);

  out.g_path[0] = g.value(path.values[0]);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double dt = path.times[i + 1] - path.times[i];
    double y = path.values[i];
    double s = sigma(y);
    double gp = g.dright(y);
    double drift_term = gp * mu(y);
    double second_term =
        g.second_density_is_zero ? 0.0 : 0.5 * g.second_density(y) * s * s;
    double da = (drift_term + second_term) * dt;
    // atoms act through local time at their locations (weight/2 each)
    for (const Atom& a : atoms) {
      if (std::fabs(y - a.location) < local_time_eps)
        da += 0.5 * a.weight * s * s * dt / (2.0 * local_time_eps);
    }
    out.qv[i + 1] = out.qv[i] + gp * gp * s * s * dt;
    out.a_path[i + 1] = out.a_path[i] + da;
    out.var_a[i + 1] = out.var_a[i] + std::fabs(da);
    out.g_path[i + 1] = g.value(path.values[i + 1]);
  }
  return out;
}

RayKnightReport ray_knight_check(double x0, double l,
                                 const std::vector<double>& levels,
                                 std::size_t n_paths, double dt,
                                 std::uint64_t seed, int threads) {
  RayKnightReport rep;
  rep.dt = dt;
  rep.eps = 0.5 * std::sqrt(dt);
  rep.paths = n_paths;

  DiffusionSpec bm;
  bm.state_space = {l, kInf};
  bm.drift = CoefficientFunction::constant(0.0);
  bm.diffusion = CoefficientFunction::constant(1.0);
  bm.start = x0;
  bm.reference = x0;

  SimOptions opts;
  opts.boundary = SimOptions::Boundary::Absorb;
  opts.coarsen_above = x0 + 0.5 * (x0 - l);
  opts.coarsen_width = 0.25 * (x0 - l);
  opts.max_steps = 400'000'000;

  const double eps = rep.eps;
  const std::size_t n_levels = levels.size();
  std::vector<double> samples(n_paths * n_levels, 0.0);
  std::vector<std::uint8_t> finished(n_paths, 0);

  parallel_for(n_paths, threads, [&](std::size_t i) {
    std::vector<double> acc(n_levels, 0.0);
    auto absorbed = run_path(bm, dt, kInf, seed, i, opts,
                             [&](double, double y, double dt_step) {
                               for (std::size_t j = 0; j < n_levels; ++j)
                                 if (std::fabs(y - levels[j]) < eps)
                                   acc[j] += dt_step;
                             });
    finished[i] = absorbed.has_value();
    for (std::size_t j = 0; j < n_levels; ++j)
      samples[i * n_levels + j] = acc[j] / (2.0 * eps);
  });

  std::size_t used = 0;
  for (std::size_t i = 0; i < n_paths; ++i)
    if (finished[i]) ++used;
  rep.unfinished_paths = n_paths - used;

  for (std::size_t j = 0; j < n_levels; ++j) {
    LevelStats st;
    st.level = levels[j];
    double u = levels[j] - l;
    st.expected_mean = 2.0 * std::min(u, x0 - l);
    st.expected_variance = 4.0 * u * u;
    double sum = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i)
      if (finished[i]) sum += samples[i * n_levels + j];
    double mean = used ? sum / used : 0.0;
    double m2 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) {
      if (!finished[i]) continue;
      double c = samples[i * n_levels + j] - mean;
      m2 += c * c;
      m4 += c * c * c * c;
    }
    double var = used > 1 ? m2 / (used - 1) : 0.0;
    st.mean = mean;
    st.variance = var;
    double se_mean = used > 1 ? std::sqrt(var / used) : 0.0;
    double se_var =
        used > 1 ? std::sqrt(std::max(m4 / used - var * var, 0.0) / used) : 0.0;
    st.z_mean = se_mean > 0 ? (mean - st.expected_mean) / se_mean : 0.0;
    st.z_variance =
        se_var > 0 ? (var - st.expected_variance) / se_var : 0.0;
    rep.levels.push_back(st);
  }
  return rep;
}

AbsorptionReport absorption_probability_check(double x0, double l,
                                              double horizon,
                                              std::size_t n_paths, double dt,
                                              std::uint64_t seed, int threads) {
  AbsorptionReport rep;
  rep.paths = n_paths;
  double a = (x0 - l) / std::sqrt(horizon);
  rep.expected = std::erfc(a / std::sqrt(2.0));

  DiffusionSpec bm;
  bm.state_space = {l, kInf};
  bm.drift = CoefficientFunction::constant(0.0);
  bm.diffusion = CoefficientFunction::constant(1.0);
  bm.start = x0;
  bm.reference = x0;
  SimOptions opts;

  std::vector<std::uint8_t> hit(n_paths, 0);
  parallel_for(n_paths, threads, [&](std::size_t i) {
    auto absorbed =
        run_path(bm, dt, horizon, seed, i, opts, [](double, double, double) {});
    hit[i] = absorbed && absorbed->time <= horizon;
  });
  std::size_t count = 0;
  for (auto h : hit) count += h;
  rep.empirical = static_cast<double>(count) / static_cast<double>(n_paths);
  rep.std_error =
      std::sqrt(rep.empirical * (1.0 - rep.empirical) / n_paths);
  std::ostringstream os;
  os << "discrete monitoring shifts the effective barrier by ~0.583*sqrt(dt)="
     << 0.5826 * std::sqrt(dt)
     << ", biasing the empirical probability low by O(sqrt(dt))";
  rep.bias_note = os.str();
  return rep;
}

double occupation_identity_residual(const PathSample& path,
                                    const DiffusionSpec& d, double t,
                                    double eps) {
  // sum over grid levels (spacing h = eps) of Lhat^y * h, computed per step:
  // each step contributes (h * n_window / (2 eps)) * sigma^2 * dt with
  // n_window the number of grid points within eps of the state
  CoefficientFast sigma = fast(d.diffusion);
  double h = eps;
  double acc = 0.0;
  double t_end = t;
  if (path.absorbed) t_end = std::min(t_end, path.absorbed->time);
  for (std::size_t i = 0; i + 1 < path.times.size(); ++i) {
    if (path.times[i] >= t_end) break;
    double dt = std::min(path.times[i + 1], t_end) - path.times[i];
    double y = path.values[i];
    // grid points k*h with |k*h - y| < eps
    double k_lo = std::ceil((y - eps) / h);
    double k_hi = std::floor((y + eps) / h);
    double n_window = std::max(0.0, k_hi - k_lo + 1.0);
    double s = sigma(y);
    acc += (h * n_window / (2.0 * eps)) * s * s * dt;
  }
  return std::fabs(acc - t_end);
}

// ------------------------------------------------------ divergence probe

namespace {

// Exact integrals of (g')^2 and |nu_g| over occupation cells of width eps.
class CellTable {
 public:
  CellTable(const DiffusionSpec& d, const DCFunction& g, double eps)
      : eps_(eps), nu_(variation_measure(nu_g(d, g))) {
    const Interval& J = d.state_space;
    origin_ = std::isfinite(J.lower) ? J.lower + 0.5 * eps : d.start;
    upper_cut_ = std::isfinite(J.upper) ? J.upper - 0.5 * eps : kInf;
    auto gp = g.dright;
    qv_fn_ = [gp](double x) {
      double v = gp(x);
      return v * v;
    };
    if (g.dright_expr) {
      Expr e = *g.dright_expr;
      qv_bps_ = [e](double lo, double hi, std::size_t cap,
                    std::vector<double>& out) {
        return e.breakpoints(lo, hi, cap, out);
      };
    }
    lower_cut_ = origin_;
  }

  // cell index for a state, or nullopt when outside the truncation window
  std::optional<long> cell(double y) const {
    if (y < lower_cut_ || y > upper_cut_) return std::nullopt;
    return static_cast<long>(std::floor((y - origin_) / eps_));
  }

  double qv_weight(long j) {
    auto it = qv_.find(j);
    if (it != qv_.end()) return it->second;
    auto [lo, hi] = bounds(j);
    std::vector<double> bps;
    if (qv_bps_) qv_bps_(lo, hi, 1 << 14, bps);
    double v = engine_.integrate(qv_fn_, lo, hi, bps).value;
    qv_.emplace(j, v);
    return v;
  }

  double var_weight(long j) {
    auto it = var_.find(j);
    if (it != var_.end()) return it->second;
    auto [lo, hi] = bounds(j);
    double v = 0.0;
    if (!nu_.density_is_zero) {
      std::vector<double> bps;
      if (nu_.breakpoints) nu_.breakpoints(lo, hi, 1 << 14, bps);
      v = engine_.integrate(nu_.density, lo, hi, bps).value;
    }
    nu_.atoms.for_each_in(lo, hi, 1 << 16,
                          [&](const Atom& a) { v += std::fabs(a.weight); });
    var_.emplace(j, v);
    return v;
  }

  double eps() const { return eps_; }

 private:
  std::pair<double, double> bounds(long j) const {
    return {origin_ + j * eps_, origin_ + (j + 1) * eps_};
  }

  double eps_;
  SignedMeasure nu_;
  std::function<double(double)> qv_fn_;
  BreakpointsFn qv_bps_;
  double origin_, lower_cut_, upper_cut_;
  QuadratureEngine engine_;
  std::map<long, double> qv_, var_;
};

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[mid];
}

double guarded_growth_ratio(double prev, double next) {
  if (std::fabs(prev) < 1e-12 && std::fabs(next) < 1e-12) return 1.0;
  if (std::fabs(prev) < 1e-12) return kInf;
  return next / prev;
}

}  // namespace

DivergenceProbeReport divergence_probe(const DiffusionSpec& d,
                                       const DCFunction& g, double dt,
                                       std::uint64_t seed,
                                       const ProbeOptions& opts) {
  if (auto pb = natural_pullback(d, g)) {
    DivergenceProbeReport rep = divergence_probe(pb->first, pb->second, dt,
                                                 seed, opts);
    rep.note += " (probed in base coordinates)";
    return rep;
  }

  DivergenceProbeReport rep;
  SimOptions sim;
  for (double factor : opts.dt_factors) {
    double dt_level = dt * factor;
    double eps = 0.5 * std::sqrt(dt_level);
    // cells are shared across paths of a level; guard with a mutex and
    // merge per-path scalars in stream order
    CellTable table(d, g, eps);
    std::mutex table_mu;
    std::vector<double> qv_samples(opts.paths, 0.0);
    std::vector<double> var_samples(opts.paths, 0.0);
    parallel_for(opts.paths, opts.threads, [&](std::size_t i) {
      std::map<long, double> occupation;
      CoefficientFast sigma = fast(d.diffusion);
      run_path(d, dt_level, opts.horizon, seed, i, sim,
               [&](double, double y, double dt_step) {
                 if (auto j = table.cell(y)) {
                   double s = sigma(y);
                   occupation[*j] += s * s * dt_step;
                 }
               });
      double qv = 0.0, var = 0.0;
      std::lock_guard<std::mutex> lock(table_mu);
      for (const auto& [j, occ] : occupation) {
        double density = occ / eps;  // average local time over the cell
        qv += density * table.qv_weight(j);
        var += density * table.var_weight(j);
      }
      qv_samples[i] = qv;
      var_samples[i] = var;
    });
    rep.dts.push_back(dt_level);
    rep.qv_medians.push_back(median(std::move(qv_samples)));
    rep.var_a_medians.push_back(median(std::move(var_samples)));
  }

  bool qv_stable = true, qv_grows = true;
  bool var_stable = true, var_grows = true;
  for (std::size_t i = 0; i + 1 < rep.qv_medians.size(); ++i) {
    double rq = guarded_growth_ratio(rep.qv_medians[i], rep.qv_medians[i + 1]);
    double rv =
        guarded_growth_ratio(rep.var_a_medians[i], rep.var_a_medians[i + 1]);
    qv_stable &= rq < opts.thresholds.stabilize_below;
    qv_grows &= rq > opts.thresholds.grow_above;
    var_stable &= rv < opts.thresholds.stabilize_below;
    var_grows &= rv > opts.thresholds.grow_above;
  }
  std::ostringstream note;
  note << "medians over " << opts.paths << " paths, horizon " << opts.horizon;
  rep.note = note.str();
  if (qv_grows) {
    rep.kind = EmpiricalKind::SecondKindLike;
  } else if (qv_stable && var_grows) {
    rep.kind = EmpiricalKind::FirstKindLike;
  } else if (qv_stable && var_stable) {
    rep.kind = EmpiricalKind::SemimartingaleLike;
  } else {
    rep.kind = EmpiricalKind::Inconclusive;
  }
  return rep;
}

std::vector<double> bessel_zero_occupation(double delta, double x0,
                                           const std::vector<double>& bands,
                                           double dt, double horizon,
                                           std::size_t n_paths,
                                           std::uint64_t seed) {
  // squared process dY = delta dt + 2 sqrt(Y) dW, clamped at 0; the path of
  // interest is rho = sqrt(Y)
  DiffusionSpec besq;
  besq.state_space = {0.0, kInf};
  besq.drift = CoefficientFunction::constant(delta);
  besq.diffusion = CoefficientFunction(
      [](double y) { return 2.0 * std::sqrt(std::max(y, 0.0)); });
  besq.start = x0 * x0;
  besq.reference = std::max(x0 * x0, 1.0);
  SimOptions opts;
  opts.boundary = SimOptions::Boundary::Clamp;

  std::vector<double> fractions(bands.size(), 0.0);
  for (std::size_t i = 0; i < n_paths; ++i) {
    std::vector<double> occ(bands.size(), 0.0);
    double total = 0.0;
    run_path(besq, dt, horizon, seed, i, opts,
             [&](double, double y, double dt_step) {
               double rho_val = std::sqrt(std::max(y, 0.0));
               total += dt_step;
               for (std::size_t b = 0; b < bands.size(); ++b)
                 if (rho_val <= bands[b]) occ[b] += dt_step;
             });
    for (std::size_t b = 0; b < bands.size(); ++b)
      fractions[b] += total > 0 ? occ[b] / total : 0.0;
  }
  for (double& f : fractions) f /= static_cast<double>(n_paths);
  return fractions;
}

}  // namespace semimart
