// Acceptance checks 1-11. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

using namespace vecstab;
using vecstab::testing::Rng;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes{};  // informational, not part of the verdict
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

GainSet tuned() { return unpack_kappa(presets::tuned_kappa()); }

ClosedLoop tuned_loop() { return ClosedLoop(presets::reference_plant(), tuned()); }

// Largest one-step increase of V along a run, scaled by max(1, V), and where it happened.
struct Monotonicity {
  double worst = -std::numeric_limits<double>::infinity();
  double time = 0.0;
};

Monotonicity lyapunov_monotonicity(const Trajectory& tr) {
  Monotonicity m;
  for (std::size_t k = 1; k < tr.samples.size(); ++k) {
    const double prev = tr.samples[k - 1].lyapunov;
    const double rel = (tr.samples[k].lyapunov - prev) / std::max(1.0, prev);
    if (rel > m.worst) m = {rel, tr.samples[k].t};
  }
  return m;
}

constexpr double kMonotoneTol = 1e-8;

Outcome criterion1() {
  const WRho w = w_rho(tuned().control, presets::reference_plant().reference_vectors());
  const Mat3 golden = Mat3::rows({24.3144, 0, -1.7736}, {0, 26.0881, 0}, {-1.7736, 0, 1.7736});
  const std::array<double, 3> eig{1.6349, 24.4531, 26.0881};
  const std::array<Vec3, 3> vec{Vec3{0.0780, 0, 0.9970}, Vec3{-0.9970, 0, 0.0780}, Vec3{0, -1, 0}};
  double de = 0.0;
  double dl = 0.0;
  double dc = 0.0;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) de = std::max(de, std::fabs(w.matrix(r, c) - golden(r, c)));
  for (std::size_t k = 0; k < 3; ++k) {
    dl = std::max(dl, std::fabs(w.eigenvalues[k] - eig[k]));
    dc = std::max(dc, 1.0 - std::fabs(dot(w.eigenvectors[k], vec[k]) / norm(vec[k])));
  }
  return {de <= 1e-3 && dl <= 1e-3 && dc <= 1e-2,
          fmt("max entry error %.2e, max eigenvalue error %.2e, max 1-|cos| %.2e", de, dl, dc)};
}

Outcome convergence_case(const UnitQuaternion& q0, const std::string& target) {
  const ClosedLoop loop = tuned_loop();
  const SimConfig cfg = presets::scenario(q0, tuned());
  const Trajectory tr = simulate(cfg, loop);
  const RunSummary s = summarize(tr, loop);
  const Monotonicity m = lyapunov_monotonicity(tr);
  const Monotonicity fine = lyapunov_monotonicity(simulate(presets::scenario(q0, tuned(), 0.005), loop));
  const bool converged = s.convergence_time.has_value();
  const bool ok = converged && s.terminal_equilibrium == target && m.worst <= kMonotoneTol;
  return {ok,
          fmt("converged %s at t=%.2f s to %s (distance %.1e); worst per-step V increase / max(1,V) %.2e at t=%.2f",
                  converged ? "yes" : "no", converged ? *s.convergence_time : -1.0, s.terminal_equilibrium.c_str(),
              s.terminal_distance, m.worst, m.time),
          {fmt("at dt=0.005 the worst per-step V increase / max(1,V) is %.2e", fine.worst)}};
}

Outcome criterion2() { return convergence_case(UnitQuaternion{0.8, 0, 0, 0.6}, "Omega1+"); }
Outcome criterion3() { return convergence_case(UnitQuaternion{-0.8, 0, 0, 0.6}, "Omega1-"); }

struct LyapunovSuite {
  int integration_failures = 0;
  int monotone_failures = 0;
  int terminal_failures = 0;
  int fd_failures = 0;
  double worst_increase = -std::numeric_limits<double>::infinity();
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  std::string first_error;
};

LyapunovSuite lyapunov_suite(double dt) {
  const ClosedLoop loop = tuned_loop();
  Rng rng(4004);
  LyapunovSuite r;
  const auto flow = [&](const SimState& y) { return loop.derivative(y); };
  for (int k = 0; k < 100; ++k) {
    const UnitQuaternion q = rng.quaternion();
    const Vec3 w = rng.in_ball(1.0);
    const SimConfig cfg{loop.plant(), loop.gains(), dt, 60.0, make_initial_state(loop.plant(), q, w)};

    // Central differences of V along the flow at t = 0.2 s, step h and h/2.
    // The flow over ±h is resolved with 50 substeps.
    SimState mid = cfg.initial;
    for (int i = 0; i < 400; ++i) mid = rk4_step(mid, 0.0005, loop);
    auto advance = [&](double h) {
      SimState x = mid;
      for (int i = 0; i < 50; ++i) x = rk4_step(x, h / 50, flow);
      return x;
    };
    auto fd_error = [&](double h) {
      const double vp = loop.lyapunov(advance(h));
      const double vm = loop.lyapunov(advance(-h));
      return std::fabs((vp - vm) / (2 * h) - loop.lyapunov_rate(mid));
    };
    const double ratio = fd_error(0.002) / fd_error(0.001);
    r.min_ratio = std::min(r.min_ratio, ratio);
    r.max_ratio = std::max(r.max_ratio, ratio);
    if (!(ratio > 3.0 && ratio < 5.0)) ++r.fd_failures;

    try {
      const Trajectory tr = simulate(cfg, loop);
      const Monotonicity m = lyapunov_monotonicity(tr);
      r.worst_increase = std::max(r.worst_increase, m.worst);
      if (m.worst > kMonotoneTol) ++r.monotone_failures;
      if (summarize(tr, loop).terminal_equilibrium == "none") ++r.terminal_failures;
    } catch (const Error& e) {
      if (r.first_error.empty()) r.first_error = e.what();
      ++r.integration_failures;
    }
  }
  return r;
}

std::string describe(const LyapunovSuite& r, double dt) {
  return fmt("dt=%.3g: %d/100 runs aborted by the integrator%s%s%s; V increase > 1e-8 max(1,V) in %d of the rest "
             "(worst %.2e); %d not within 1e-3 of an equilibrium at 60 s; FD error ratio under halving in "
             "[%.2f, %.2f], %d outside [3, 5]",
             dt, r.integration_failures, r.first_error.empty() ? "" : " (first: ", r.first_error.c_str(),
             r.first_error.empty() ? "" : ")", r.monotone_failures, r.worst_increase, r.terminal_failures,
             r.min_ratio, r.max_ratio, r.fd_failures);
}

bool passed(const LyapunovSuite& r) {
  return r.integration_failures == 0 && r.monotone_failures == 0 && r.terminal_failures == 0 && r.fd_failures == 0;
}

Outcome criterion4() {
  const LyapunovSuite r = lyapunov_suite(0.01);
  const LyapunovSuite fine = lyapunov_suite(0.005);
  return {passed(r), describe(r, 0.01), {"same suite at " + describe(fine, 0.005)}};
}

struct AttractionCheck {
  int drawn = 0;
  int failures = 0;
  int crossings = 0;
  int aborted = 0;
  double level = 0.0;
  double v_max = 0.0;
};

AttractionCheck attraction(double dt) {
  const ClosedLoop loop = tuned_loop();
  AttractionCheck r;
  r.level = 4.0 * loop.w_rho().lambda_min();
  Rng rng(5005);
  int accepted = 0;
  while (accepted < 50) {
    ++r.drawn;
    UnitQuaternion q = rng.quaternion();
    if (q.w < 0) q = -q;
    SimState s = make_initial_state(loop.plant(), q, rng.in_ball(1.0));
    for (Vec3& b : s.filter.b_hat) b -= rng.in_ball(0.05);
    const double v0 = loop.lyapunov(s);
    if (!(v0 < r.level)) continue;
    ++accepted;
    r.v_max = std::max(r.v_max, v0);
    for (int sign : {1, -1}) {
      SimState x = s;
      x.plant.attitude = sign > 0 ? q : -q;
      const SimConfig cfg{loop.plant(), loop.gains(), dt, 40.0, x};
      bool crossed = false;
      try {
        const SimState end = simulate_each(cfg, loop, [&](const Sample& smp) {
          if (sign * smp.q_bar.w <= 0.0) crossed = true;
        });
        const NearestEquilibrium ne = nearest_equilibrium(end, loop);
        if (ne.distance >= 1e-3 || ne.equilibrium.label != (sign > 0 ? "Omega1+" : "Omega1-")) ++r.failures;
      } catch (const Error&) {
        ++r.aborted;
        ++r.failures;
      }
      if (crossed) ++r.crossings;
    }
  }
  return r;
}

std::string describe(const AttractionCheck& r, double dt) {
  return fmt("dt=%.3g: 50 states (of %d drawn) with V(0) < 4 lambda_min = %.4f, max V(0) %.4f; %d/100 runs "
             "(incl. mirrored) failed to reach their Omega1 (%d aborted by the integrator), %d crossed q0 = 0",
             dt, r.drawn, r.level, r.v_max, r.failures, r.aborted, r.crossings);
}

Outcome criterion5() {
  const AttractionCheck r = attraction(0.01);
  const AttractionCheck fine = attraction(0.005);
  return {r.failures == 0 && r.crossings == 0, describe(r, 0.01), {"same check at " + describe(fine, 0.005)}};
}

Outcome criterion6() {
  const ClosedLoop loop = tuned_loop();
  const LinearizationResult s = linearize_stable(loop);
  bool ok = s.max_real_part < 0.0;
  std::string detail = fmt("stable block max Re %.4f", s.max_real_part);
  for (const Equilibrium& e : enumerate_equilibria(loop.w_rho())) {
    if (e.axis < 0) continue;
    const LinearizationResult u = linearize_unstable(e, loop);
    const double thr = 1e-7 * u.spectral_radius;
    ok = ok && u.max_real_part > thr && u.min_abs_real_part > thr;
    detail += fmt("; %s max Re %.4f min|Re| %.4f", e.label.c_str(), u.max_real_part, u.min_abs_real_part);
  }
  return {ok, detail};
}

Outcome criterion7() {
  const auto refs = presets::reference_plant().reference_vectors();
  const Bounds b = presets::default_bounds();
  Rng rng(7007);
  int fail = 0;
  double min_rel_gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 1000; ++k) {
    const ControlGains g{{rng.log_uniform(b.lower[0], b.upper[0]), rng.log_uniform(b.lower[1], b.upper[1])}};
    const GenReport r = check_gen(w_rho(g, refs));
    min_rel_gap = std::min(min_rel_gap, r.min_gap / r.eigenvalues[2]);
    if (!r.simple) ++fail;
  }
  const bool table = check_gen(w_rho(tuned().control, refs)).simple;
  return {fail < 10 && table,
          fmt("%d/1000 samples fail (min relative gap %.2e); tuned rho %s", fail, min_rel_gap,
              table ? "passes" : "fails")};
}

Outcome criterion8() {
  const ClosedLoop loop = tuned_loop();
  const auto& lambda = loop.gains().filter.lambda;
  Rng rng(8008);
  double e_exact = 0.0;
  double e_forms = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const UnitQuaternion q = rng.quaternion();
    const Vec3 w = rng.in_ball(2.0);
    const auto b = body_vectors(q, loop.plant().reference_vectors());
    std::vector<Vec3> bdot;
    for (const Vec3& bi : b) bdot.push_back(reduced_kinematics(bi, w));
    e_exact = std::max(e_exact, norm(reconstruct_omega(b, lambda, bdot) - w));

    FilterState f;
    for (const Vec3& bi : b) f.b_hat.push_back(bi - rng.in_ball(0.5));
    const Vec3 via_rates = reconstruct_omega(b, lambda, filter_derivative(f, b, loop.a_matrices()));
    e_forms = std::max(e_forms, norm(via_rates - observe(f, b, lambda, loop.a_matrices()).omega_hat));
  }
  return {e_exact <= 1e-12 && e_forms <= 1e-12,
          fmt("max |omega_rec - omega| %.2e; max |filter-rate form - closed form| %.2e over 1e4 states", e_exact,
              e_forms)};
}

Outcome criterion9() {
  Rng rng(9009);
  double ez = 0.0;
  double et = 0.0;
  const PlantConfig base = presets::reference_plant();
  for (int k = 0; k < 10000; ++k) {
    const UnitQuaternion qd = k % 2 == 0 ? UnitQuaternion::identity() : rng.quaternion();
    const ClosedLoop loop(PlantConfig::make(base.inertia(), base.reference_vectors(), qd), tuned());
    SimState s = make_initial_state(loop.plant(), rng.quaternion(), rng.in_ball(1.0));
    for (Vec3& b : s.filter.b_hat) b -= rng.in_ball(0.3);
    const auto sig = loop.signals(s);
    const Vec3 zq = z_rho_quat(loop.w_rho(), loop.q_bar(s), qd);
    ez = std::max(ez, norm(z_rho_measured(loop.gains().control, sig.measured, loop.plant().desired_body_vectors()) - zq));
    const Vec3 tq = torque_quat(loop.w_rho(), loop.q_bar(s), qd, sig.observer.m, sig.observer.omega_hat);
    et = std::max(et, norm(sig.tau - tq));
  }
  const WRho unit = w_rho(ControlGains{{1, 1}}, base.reference_vectors());
  const Vec3 zw = z_rho_quat(unit, UnitQuaternion{0.8, Vec3{0, 0, 0.6}}, UnitQuaternion::identity());
  const double ew = norm(zw - Vec3{0.96, -0.72, -0.96});
  return {ez <= 1e-12 && et <= 1e-12 && ew <= 1e-12,
          fmt("max z_rho form gap %.2e, max torque form gap %.2e over 1e4 states; worked value error %.2e", ez, et,
              ew)};
}

Outcome criterion10() {
  const SimConfig scenario = presets::tuning_scenario();
  const double sigma = 0.1;
  const double g0 = objective(presets::initial_kappa(), scenario, ObjectiveKind::ise, sigma);
  const double gf = objective(presets::tuned_kappa(), scenario, ObjectiveKind::ise, sigma);
  const TuneResult r = multistart_optimize(scenario, presets::default_bounds(), ObjectiveKind::ise, sigma, 8, 20240611,
                                           presets::initial_kappa());
  const bool below = r.best_objective < g0;
  const bool close = std::fabs(r.best_objective - gf) <= 0.1 * gf;
  return {below && close,
          fmt("tuned g = %.6f, g(kappa0) = %.6f (%s), g(kappa_final) = %.6f, relative gap %+.1f%% (%s 10%%)",
              r.best_objective, g0, below ? "below" : "not below", gf, 100.0 * (r.best_objective - gf) / gf,
              close ? "within" : "outside")};
}

std::vector<double> flatten(const SimState& s) {
  std::vector<double> v{s.plant.attitude.w, s.plant.attitude.v[0], s.plant.attitude.v[1], s.plant.attitude.v[2],
                        s.plant.omega[0],   s.plant.omega[1],      s.plant.omega[2]};
  for (const Vec3& b : s.filter.b_hat) v.insert(v.end(), {b[0], b[1], b[2]});
  return v;
}

Outcome criterion11() {
  const ClosedLoop loop = tuned_loop();
  const SimState x0 = make_initial_state(loop.plant(), UnitQuaternion{0.8, 0, 0, 0.6}, Vec3{});
  const double t_end = 2.0;
  const double dt = 0.01;
  // States at every multiple of dt over [0, 2].
  auto run = [&](double h) {
    std::vector<std::vector<double>> out;
    const auto per = static_cast<std::size_t>(std::llround(dt / h));
    SimState s = x0;
    const auto steps = static_cast<std::size_t>(std::llround(t_end / h));
    for (std::size_t k = 0; k <= steps; ++k) {
      if (k % per == 0) out.push_back(flatten(s));
      if (k < steps) s = rk4_step(s, h, loop);
    }
    return out;
  };
  const auto ref = run(dt / 16);
  auto error = [&](const std::vector<std::vector<double>>& x) {
    double e = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k)
      for (std::size_t i = 0; i < x[k].size(); ++i) e = std::max(e, std::fabs(x[k][i] - ref[k][i]));
    return e;
  };
  const double e1 = error(run(dt));
  const double e2 = error(run(dt / 2));
  const double ratio = e1 / e2;
  const double e3 = error(run(dt / 4));
  return {ratio >= 12.0 && ratio <= 20.0,
          fmt("max error dt=0.01: %.3e, dt=0.005: %.3e, ratio %.2f (required 12-20)", e1, e2, ratio),
          {fmt("next halving, dt=0.005 -> 0.0025: error %.3e, ratio %.2f", e3, e2 / e3)}};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"W_rho golden values", criterion1},
      {"convergence from Q(0)=(0.8,0,0,0.6)", criterion2},
      {"convergence from Q(0)=(-0.8,0,0,0.6)", criterion3},
      {"Lyapunov property suite", criterion4},
      {"domain of attraction", criterion5},
      {"spectral classification", criterion6},
      {"genericity of W_rho", criterion7},
      {"observer exactness", criterion8},
      {"dual-form controller equivalence", criterion9},
      {"tuning descent", criterion10},
      {"RK4 order", criterion11},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::cout << "criterion " << (i + 1) << " [" << (o.pass ? "PASS" : "FAIL") << "] " << criteria[i].first << ": "
              << o.detail << fmt(" (%.1f s)", secs) << std::endl;
    for (const std::string& n : o.notes) std::cout << "    note: " << n << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
