// Gain tuning for the two-vector configuration: a 14-entry parameter vector
// with box bounds, integral performance indices evaluated by simulation, and
// a bound-projected Nelder-Mead search restarted from several points.
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "vecstab/error.hpp"
#include "vecstab/sim.hpp"

namespace vecstab {

inline constexpr std::size_t kParamCount = 14;

/// Order: ρ1, ρ2, a10, a11, a12, a20, a21, a22, γ11, γ12, γ13, γ21, γ22, γ23.
using ParamVector = std::array<double, kParamCount>;

inline const std::array<const char*, kParamCount>& param_names() {
  static const std::array<const char*, kParamCount> names{"rho1", "rho2", "a10",    "a11",    "a12",
                                                          "a20",  "a21",  "a22",    "gamma11", "gamma12",
                                                          "gamma13", "gamma21", "gamma22", "gamma23"};
  return names;
}

struct Bounds {
  ParamVector lower{};
  ParamVector upper{};

  void validate() const {
    for (std::size_t i = 0; i < kParamCount; ++i)
      if (!(lower[i] > 0.0) || !(lower[i] <= upper[i]) || !std::isfinite(upper[i]))
        throw ConfigError(std::string("tuning.bounds: need 0 < lower <= upper for ") + param_names()[i]);
  }

  bool contains(const ParamVector& k) const {
    for (std::size_t i = 0; i < kParamCount; ++i)
      if (k[i] < lower[i] || k[i] > upper[i]) return false;
    return true;
  }
};

/// Gains ↔ parameter vector. Λ_i = diag(γ_i1, γ_i2, γ_i3), P_i(x) = a_i0 + a_i1 x + a_i2 x².
inline GainSet unpack_kappa(const ParamVector& k) {
  for (std::size_t i = 0; i < kParamCount; ++i)
    if (!(k[i] > 0.0) || !std::isfinite(k[i]))
      throw ConfigError(std::string("kappa.") + param_names()[i] + ": must be positive");
  GainSet g;
  g.control.rho = {k[0], k[1]};
  g.filter.poly = {FilterPolynomial{k[2], k[3], k[4]}, FilterPolynomial{k[5], k[6], k[7]}};
  g.filter.lambda = {Mat3::diag(k[8], k[9], k[10]), Mat3::diag(k[11], k[12], k[13])};
  return g;
}

inline ParamVector pack_kappa(const GainSet& g) {
  if (g.control.rho.size() != 2 || g.filter.lambda.size() != 2 || g.filter.poly.size() != 2)
    throw ConfigError("pack_kappa: the parameter vector describes exactly two measured vectors");
  ParamVector k{};
  k[0] = g.control.rho[0];
  k[1] = g.control.rho[1];
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& p = g.filter.poly[i];
    k[2 + 3 * i] = p.c0;
    k[3 + 3 * i] = p.c1;
    k[4 + 3 * i] = p.c2;
    const Mat3& l = g.filter.lambda[i];
    if (l(0, 1) != 0.0 || l(0, 2) != 0.0 || l(1, 2) != 0.0 || l(1, 0) != 0.0 || l(2, 0) != 0.0 || l(2, 1) != 0.0)
      throw ConfigError("pack_kappa: filter weights must be diagonal");
    k[8 + 3 * i] = l(0, 0);
    k[9 + 3 * i] = l(1, 1);
    k[10 + 3 * i] = l(2, 2);
  }
  return k;
}

inline ParamVector project_to_bounds(ParamVector k, const Bounds& b) {
  for (std::size_t i = 0; i < kParamCount; ++i) k[i] = std::clamp(k[i], b.lower[i], b.upper[i]);
  return k;
}

enum class ObjectiveKind { ise, iae, itae };

inline const char* to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::ise: return "ISE";
    case ObjectiveKind::iae: return "IAE";
    case ObjectiveKind::itae: return "ITAE";
  }
  return "?";
}

inline ObjectiveKind parse_objective_kind(const std::string& s) {
  if (s == "ISE" || s == "ise") return ObjectiveKind::ise;
  if (s == "IAE" || s == "iae") return ObjectiveKind::iae;
  if (s == "ITAE" || s == "itae") return ObjectiveKind::itae;
  throw ConfigError("tuning.kind: expected ISE, IAE or ITAE, got '" + s + "'");
}

inline double norm1(const Vec3& x) { return std::fabs(x[0]) + std::fabs(x[1]) + std::fabs(x[2]); }

inline double objective_integrand(ObjectiveKind kind, double sigma, double t, const Vec3& q_bar, const Vec3& tau) {
  switch (kind) {
    case ObjectiveKind::ise: return dot(q_bar, q_bar) + sigma * dot(tau, tau);
    case ObjectiveKind::iae: return norm1(q_bar) + sigma * norm1(tau);
    case ObjectiveKind::itae: return t * (norm1(q_bar) + sigma * norm1(tau));
  }
  return 0.0;
}

/// Finite-horizon performance index of the gains `kappa` on the scenario in
/// `scenario` (plant, dt, horizon, initial state). Trapezoid rule over the
/// simulation grid. Returns +∞ if the simulation blows up.
inline double objective(const ParamVector& kappa, const SimConfig& scenario, ObjectiveKind kind, double sigma) {
  SimConfig cfg{scenario.plant, unpack_kappa(kappa), scenario.dt, scenario.t_final, scenario.initial};
  try {
    const ClosedLoop loop(cfg.plant, cfg.gains);
    cfg.validate();
    const std::size_t steps = cfg.steps();
    SimState s = cfg.initial;
    double acc = 0.0;
    double prev = 0.0;
    for (std::size_t k = 0;; ++k) {
      const double t = static_cast<double>(k) * cfg.dt;
      const auto sig = loop.signals(s);
      const double f = objective_integrand(kind, sigma, t, loop.q_bar(s).v, sig.tau);
      if (k > 0) acc += 0.5 * cfg.dt * (prev + f);
      prev = f;
      if (k == steps) break;
      s = rk4_step(s, cfg.dt, loop);
    }
    return std::isfinite(acc) ? acc : std::numeric_limits<double>::infinity();
  } catch (const IntegrationError&) {
    return std::numeric_limits<double>::infinity();
  } catch (const DegenerateError&) {
    return std::numeric_limits<double>::infinity();
  }
}

struct TuneOptions {
  int max_iterations = 500;          // per start
  double tolerance = 1e-4;           // simplex diameter in normalized log-coordinates
  double initial_step = 0.1;         // simplex edge in normalized log-coordinates
  unsigned threads = 1;              // concurrent starts
  /// Called for every objective evaluation; may be invoked concurrently when threads > 1.
  std::function<void(const ParamVector&, double)> on_evaluate;
  /// Called once per finished start; may be invoked concurrently when threads > 1.
  std::function<void(std::size_t start, double best)> on_start_done;
};

struct StartRecord {
  ParamVector initial{};
  ParamVector final{};
  double initial_objective = 0.0;
  double final_objective = 0.0;
  int iterations = 0;
  int evaluations = 0;
  int restarts = 0;
  std::vector<double> best_history;  // best objective after each iteration
};

struct TuneResult {
  ParamVector best_kappa{};
  double best_objective = std::numeric_limits<double>::infinity();
  std::size_t best_start = 0;
  std::size_t starts = 0;
  std::vector<StartRecord> per_start;
  std::uint64_t rng_seed = 0;
};

namespace detail {

/// Affine map between κ and u ∈ [0,1]^14 in log-space.
struct LogBox {
  const Bounds& b;

  ParamVector to_kappa(const std::array<double, kParamCount>& u) const {
    ParamVector k{};
    for (std::size_t i = 0; i < kParamCount; ++i) {
      const double lo = std::log(b.lower[i]);
      const double hi = std::log(b.upper[i]);
      const double t = std::clamp(u[i], 0.0, 1.0);
      k[i] = t == 0.0 ? b.lower[i] : t == 1.0 ? b.upper[i] : std::exp(lo + t * (hi - lo));
    }
    return project_to_bounds(k, b);
  }

  std::array<double, kParamCount> to_unit(const ParamVector& k) const {
    std::array<double, kParamCount> u{};
    for (std::size_t i = 0; i < kParamCount; ++i) {
      const double lo = std::log(b.lower[i]);
      const double hi = std::log(b.upper[i]);
      u[i] = hi > lo ? std::clamp((std::log(k[i]) - lo) / (hi - lo), 0.0, 1.0) : 0.0;
    }
    return u;
  }
};

/// Uniform double in [0, 1) from the top 53 bits, independent of the standard
/// library's distribution implementation.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::mt19937_64 start_stream(std::uint64_t seed, std::size_t start) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(start), static_cast<std::uint32_t>(static_cast<std::uint64_t>(start) >> 32)};
  return std::mt19937_64(seq);
}

using Point = std::array<double, kParamCount>;

inline StartRecord nelder_mead(const Point& start, const LogBox& box, const std::function<double(const ParamVector&)>& f,
                               const TuneOptions& opt) {
  constexpr std::size_t n = kParamCount;
  StartRecord rec;
  auto clamp01 = [](Point p) {
    for (double& e : p) e = std::clamp(e, 0.0, 1.0);
    return p;
  };
  auto eval = [&](const Point& p) {
    ++rec.evaluations;
    return f(box.to_kappa(p));
  };

  std::vector<Point> simplex(n + 1);
  std::vector<double> fv(n + 1);
  auto build_simplex = [&](const Point& base, double base_value) {
    simplex[0] = base;
    fv[0] = base_value;
    for (std::size_t i = 0; i < n; ++i) {
      Point p = base;
      p[i] = (p[i] + opt.initial_step <= 1.0) ? p[i] + opt.initial_step : p[i] - opt.initial_step;
      simplex[i + 1] = clamp01(p);
      fv[i + 1] = eval(simplex[i + 1]);
    }
  };

  const Point x0 = clamp01(start);
  rec.initial = box.to_kappa(x0);
  rec.initial_objective = eval(x0);
  build_simplex(x0, rec.initial_objective);

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<Point> s2(n + 1);
    std::vector<double> f2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      s2[i] = simplex[order[i]];
      f2[i] = fv[order[i]];
    }
    simplex.swap(s2);
    fv.swap(f2);
  };
  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t j = 0; j < n; ++j) d = std::max(d, std::fabs(simplex[i][j] - simplex[0][j]));
    return d;
  };

  double value_at_last_restart = std::numeric_limits<double>::infinity();
  sort_simplex();
  while (rec.iterations < opt.max_iterations) {
    if (diameter() < opt.tolerance) {
      // Collapsed simplex: restart around the best vertex while that still pays off.
      const bool improved = fv[0] < value_at_last_restart - 1e-10 * std::max(1.0, std::fabs(fv[0]));
      if (!improved || !std::isfinite(fv[0])) break;
      value_at_last_restart = fv[0];
      ++rec.restarts;
      build_simplex(simplex[0], fv[0]);
      sort_simplex();
    }
    ++rec.iterations;

    Point centroid{};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);
    auto along = [&](double t) {
      Point p;
      for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (simplex[n][j] - centroid[j]);
      return clamp01(p);
    };

    const Point xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < fv[0]) {
      const Point xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[n] = xe;
        fv[n] = fe;
      } else {
        simplex[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      simplex[n] = xr;
      fv[n] = fr;
    } else {
      const bool outside = fr < fv[n];
      const Point xc = along(outside ? -0.5 : 0.5);
      const double fc = eval(xc);
      if (fc < (outside ? fr : fv[n])) {
        simplex[n] = xc;
        fv[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j) simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
          fv[i] = eval(simplex[i]);
        }
      }
    }
    sort_simplex();
    rec.best_history.push_back(fv[0]);
  }
  rec.final = box.to_kappa(simplex[0]);
  rec.final_objective = fv[0];
  return rec;
}

}  // namespace detail

/// Bounded derivative-free multistart search. Start 0 begins at `initial`
/// (projected into the box); the others at log-uniform random points drawn
/// from per-start streams seeded by (rng_seed, start index), so the result
/// does not depend on evaluation order or thread count.
inline TuneResult multistart_optimize(const SimConfig& scenario, const Bounds& bounds, ObjectiveKind kind, double sigma,
                                      std::size_t n_starts, std::uint64_t rng_seed, const ParamVector& initial,
                                      const TuneOptions& opt = {}) {
  bounds.validate();
  if (n_starts < 1) throw ConfigError("tuning.n_starts: must be at least 1");
  const detail::LogBox box{bounds};

  std::vector<detail::Point> starts(n_starts);
  starts[0] = box.to_unit(project_to_bounds(initial, bounds));
  for (std::size_t s = 1; s < n_starts; ++s) {
    auto rng = detail::start_stream(rng_seed, s);
    for (double& e : starts[s]) e = detail::unit_uniform(rng);
  }

  const std::function<double(const ParamVector&)> f = [&](const ParamVector& k) {
    const double v = objective(k, scenario, kind, sigma);
    if (opt.on_evaluate) opt.on_evaluate(k, v);
    return v;
  };

  TuneResult result;
  result.rng_seed = rng_seed;
  result.starts = n_starts;
  result.per_start.resize(n_starts);

  auto run_start = [&](std::size_t s) {
    result.per_start[s] = detail::nelder_mead(starts[s], box, f, opt);
    if (opt.on_start_done) opt.on_start_done(s, result.per_start[s].final_objective);
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(n_starts)));
  if (workers == 1) {
    for (std::size_t s = 0; s < n_starts; ++s) run_start(s);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t s = next++; s < n_starts; s = next++) run_start(s);
      });
    for (auto& t : pool) t.join();
  }

  for (std::size_t s = 0; s < n_starts; ++s) {
    if (result.per_start[s].final_objective < result.best_objective) {
      result.best_objective = result.per_start[s].final_objective;
      result.best_kappa = result.per_start[s].final;
      result.best_start = s;
    }
  }
  if (!std::isfinite(result.best_objective)) throw IntegrationError("every tuning start diverged");
  return result;
}

}  // namespace vecstab
