// Closed-loop assembly, fixed-step RK4 integration and Lyapunov monitoring.
//
// The integrated state is physical: attitude Q, body rate ω and the filter
// states b̂_i. Error coordinates (ξ, Q̄) are derived per sample.
#pragma once

#include <charconv>
#include <concepts>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "vecstab/controller.hpp"
#include "vecstab/error.hpp"
#include "vecstab/observer.hpp"
#include "vecstab/plant.hpp"
#include "vecstab/so3.hpp"

namespace vecstab {

struct GainSet {
  ControlGains control;
  FilterGains filter;
};

struct SimState {
  PlantState plant;
  FilterState filter;
};

struct SimRate {
  QuatRate attitude;
  Vec3 omega;
  std::vector<Vec3> b_hat;
};

inline SimRate operator+(SimRate a, const SimRate& b) {
  a.attitude.w += b.attitude.w;
  a.attitude.v += b.attitude.v;
  a.omega += b.omega;
  for (std::size_t i = 0; i < a.b_hat.size(); ++i) a.b_hat[i] += b.b_hat[i];
  return a;
}

inline SimRate operator*(double s, SimRate a) {
  a.attitude.w *= s;
  a.attitude.v *= s;
  a.omega *= s;
  for (Vec3& e : a.b_hat) e *= s;
  return a;
}

inline SimState operator+(SimState x, const SimRate& r) {
  x.plant.attitude.w += r.attitude.w;
  x.plant.attitude.v += r.attitude.v;
  x.plant.omega += r.omega;
  for (std::size_t i = 0; i < x.filter.b_hat.size(); ++i) x.filter.b_hat[i] += r.b_hat[i];
  return x;
}

inline bool is_finite(const SimState& s) {
  if (!is_finite(s.plant.attitude) || !is_finite(s.plant.omega)) return false;
  for (const Vec3& b : s.filter.b_hat)
    if (!is_finite(b)) return false;
  return true;
}

/// Initial state with b̂_i(0) = b_i(0) unless an explicit filter state is given.
inline SimState make_initial_state(const PlantConfig& plant, const UnitQuaternion& attitude, const Vec3& omega,
                                   std::optional<std::vector<Vec3>> b_hat = std::nullopt) {
  SimState s;
  s.plant.attitude = attitude.renormalized();
  s.plant.omega = omega;
  if (b_hat) {
    if (b_hat->size() != plant.vector_count()) throw ConfigError("sim.initial_filter: wrong number of vectors");
    s.filter.b_hat = std::move(*b_hat);
  } else {
    s.filter.b_hat = body_vectors(s.plant.attitude, plant.reference_vectors());
  }
  return s;
}

struct SimConfig {
  PlantConfig plant;
  GainSet gains;
  double dt = 0.01;
  double t_final = 20.0;
  SimState initial;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("sim.dt: must be positive");
    if (!(t_final >= dt) || !std::isfinite(t_final)) throw ConfigError("sim.t_final: must be at least dt");
    if (initial.filter.b_hat.size() != plant.vector_count())
      throw ConfigError("sim.initial_filter: wrong number of vectors");
    if (!is_finite(initial)) throw ConfigError("sim.initial: non-finite state");
    if (std::fabs(initial.plant.attitude.norm() - 1.0) > 1e-9)
      throw ConfigError("sim.initial_attitude: not a unit quaternion");
  }

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(t_final / dt)); }
};

/// Everything recorded for one grid point.
struct Sample {
  double t = 0.0;
  UnitQuaternion attitude;
  UnitQuaternion q_bar;
  Vec3 omega;
  Vec3 omega_hat;
  std::vector<Vec3> xi;
  Vec3 tau;
  double lyapunov = 0.0;
};

/// Plant + observer + controller with the gain-derived matrices precomputed.
class ClosedLoop {
 public:
  ClosedLoop(PlantConfig plant, GainSet gains) : plant_(std::move(plant)), gains_(std::move(gains)) {
    const std::size_t n = plant_.vector_count();
    gains_.control.validate(n);
    gains_.filter.validate(n);
    a_ = build_a_matrices(gains_.filter, plant_.desired_attitude());
    w_ = vecstab::w_rho(gains_.control, plant_.reference_vectors());
    const Mat3& rd = plant_.desired_rotation().m;
    gamma_a_d_.reserve(n);
    lyap_rate_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Mat3 a_d = rd * a_[i] * rd.transposed();
      gamma_a_d_.push_back(gains_.filter.lambda[i] * a_d);
      lyap_rate_.push_back(2.0 * (gains_.filter.lambda[i] * a_d * a_d));
    }
  }

  const PlantConfig& plant() const { return plant_; }
  const GainSet& gains() const { return gains_; }
  const std::vector<Mat3>& a_matrices() const { return a_; }
  const WRho& w_rho() const { return w_; }

  struct Signals {
    std::vector<Vec3> measured;
    ObserverOutput observer;
    Vec3 tau;
  };

  /// Measurements, observer output and torque at a state.
  Signals signals(const SimState& s) const {
    Signals out;
    out.measured = body_vectors(s.plant.attitude, plant_.reference_vectors());
    out.observer = observe(s.filter, out.measured, gains_.filter.lambda, a_);
    out.tau = torque(gains_.control, out.measured, plant_.desired_body_vectors(), out.observer.m,
                     out.observer.omega_hat);
    return out;
  }

  SimRate derivative(const SimState& s) const {
    const Signals sig = signals(s);
    SimRate r;
    r.attitude = quat_kinematics(s.plant);
    r.omega = euler_dynamics(s.plant.omega, sig.tau, plant_);
    r.b_hat = filter_derivative(s.filter, sig.measured, a_);
    return r;
  }

  UnitQuaternion q_bar(const SimState& s) const { return error_quaternion(s.plant.attitude, plant_.desired_attitude()); }

  /// V = Σ ξ_iᵀ R_dᵀ Λ_i A_d,i R_d ξ_i + 4 q̄ᵀ W_ρ q̄ + ωᵀ J ω.
  double lyapunov(const SimState& s) const {
    const auto measured = body_vectors(s.plant.attitude, plant_.reference_vectors());
    return lyapunov(s, measured);
  }

  /// V̇ = −Σ ξ_iᵀ R_dᵀ (2 Λ_i A_d,i²) R_d ξ_i.
  double lyapunov_rate(const SimState& s) const {
    const auto measured = body_vectors(s.plant.attitude, plant_.reference_vectors());
    const RotationMatrix& rd = plant_.desired_rotation();
    double v = 0.0;
    for (std::size_t i = 0; i < measured.size(); ++i) {
      const Vec3 xi_d = rd.apply(measured[i] - s.filter.b_hat[i]);
      v -= dot(xi_d, lyap_rate_[i] * xi_d);
    }
    return v;
  }

  Sample sample(double t, const SimState& s) const {
    const Signals sig = signals(s);
    Sample out;
    out.t = t;
    out.attitude = s.plant.attitude;
    out.q_bar = q_bar(s);
    out.omega = s.plant.omega;
    out.omega_hat = sig.observer.omega_hat;
    out.xi = filter_error(sig.measured, s.filter);
    out.tau = sig.tau;
    out.lyapunov = lyapunov(s, sig.measured);
    return out;
  }

 private:
  double lyapunov(const SimState& s, const std::vector<Vec3>& measured) const {
    const RotationMatrix& rd = plant_.desired_rotation();
    double v = 0.0;
    for (std::size_t i = 0; i < measured.size(); ++i) {
      const Vec3 xi_d = rd.apply(measured[i] - s.filter.b_hat[i]);
      v += dot(xi_d, gamma_a_d_[i] * xi_d);
    }
    const UnitQuaternion qb = q_bar(s);
    v += 4.0 * dot(qb.v, w_.matrix * qb.v);
    v += dot(s.plant.omega, plant_.inertia() * s.plant.omega);
    return v;
  }

  PlantConfig plant_;
  GainSet gains_;
  std::vector<Mat3> a_;
  WRho w_;
  std::vector<Mat3> gamma_a_d_;
  std::vector<Mat3> lyap_rate_;
};

/// Classical four-stage Runge-Kutta step for any state supporting
/// `State + Rate` and `double * Rate`.
template <class State, class Derivative>
  requires std::invocable<Derivative&, const State&>
State rk4_step(const State& x, double h, Derivative&& f) {
  const auto k1 = f(x);
  const auto k2 = f(x + (0.5 * h) * k1);
  const auto k3 = f(x + (0.5 * h) * k2);
  const auto k4 = f(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Largest quaternion norm deviation tolerated before renormalization.
inline constexpr double kMaxNormDrift = 1e-6;

/// One RK4 step of the closed loop followed by quaternion renormalization.
inline SimState rk4_step(const SimState& s, double dt, const ClosedLoop& loop) {
  if (!(dt > 0.0)) throw ConfigError("rk4_step: dt must be positive");
  SimState next = rk4_step(s, dt, [&loop](const SimState& x) { return loop.derivative(x); });
  if (!is_finite(next)) throw IntegrationError("integration produced a non-finite state");
  const double n = next.plant.attitude.norm();
  if (std::fabs(n - 1.0) > kMaxNormDrift)
    throw IntegrationError("quaternion norm drifted by " + std::to_string(std::fabs(n - 1.0)) + " in one step");
  next.plant.attitude = next.plant.attitude.renormalized();
  return next;
}

inline SimState rk4_step(const SimState& s, double dt, const SimConfig& config) {
  const ClosedLoop loop(config.plant, config.gains);
  return rk4_step(s, dt, loop);
}

inline SimRate closed_loop_derivative(const SimState& s, const SimConfig& config) {
  return ClosedLoop(config.plant, config.gains).derivative(s);
}

/// Runs the configured simulation, handing each grid sample to `visit`.
/// Returns the terminal state.
inline SimState simulate_each(const SimConfig& config, const ClosedLoop& loop,
                              const std::function<void(const Sample&)>& visit) {
  config.validate();
  const std::size_t steps = config.steps();
  SimState s = config.initial;
  for (std::size_t k = 0;; ++k) {
    visit(loop.sample(static_cast<double>(k) * config.dt, s));
    if (k == steps) break;
    s = rk4_step(s, config.dt, loop);
  }
  return s;
}

struct Trajectory {
  std::vector<Sample> samples;
  SimState final_state;
};

inline Trajectory simulate(const SimConfig& config, const ClosedLoop& loop) {
  Trajectory traj;
  traj.samples.reserve(config.steps() + 1);
  traj.final_state = simulate_each(config, loop, [&traj](const Sample& s) { traj.samples.push_back(s); });
  return traj;
}

inline Trajectory simulate(const SimConfig& config) { return simulate(config, ClosedLoop(config.plant, config.gains)); }

inline double lyapunov_V(const SimState& s, const SimConfig& config) {
  return ClosedLoop(config.plant, config.gains).lyapunov(s);
}

inline double lyapunov_Vdot(const SimState& s, const SimConfig& config) {
  return ClosedLoop(config.plant, config.gains).lyapunov_rate(s);
}

/// First grid time from which ‖q̄‖ < tol and ‖ω‖ < tol hold for `hold`
/// seconds (and up to the end of the record if shorter). Empty if never.
inline std::optional<double> convergence_time(const Trajectory& traj, double tol = 1e-3, double hold = 1.0) {
  const auto& s = traj.samples;
  std::optional<std::size_t> start;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const bool inside = norm(s[k].q_bar.v) < tol && norm(s[k].omega) < tol;
    if (!inside) {
      start.reset();
      continue;
    }
    if (!start) start = k;
    if (s[k].t - s[*start].t >= hold - 1e-12) return s[*start].t;
  }
  return std::nullopt;
}

/// Trapezoid-rule integral of f(sample) over the sampled grid.
template <class F>
double integrate_samples(const Trajectory& traj, F&& f) {
  double acc = 0.0;
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    const double h = traj.samples[k].t - traj.samples[k - 1].t;
    acc += 0.5 * h * (f(traj.samples[k - 1]) + f(traj.samples[k]));
  }
  return acc;
}

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kTrajectoryCsvHeader =
    "t,q0,q1,q2,q3,qbar0,qbar1,qbar2,qbar3,wx,wy,wz,what_x,what_y,what_z,tau_x,tau_y,tau_z,V";

inline void write_csv(std::ostream& os, const Trajectory& traj) {
  os << kTrajectoryCsvHeader << '\n';
  for (const Sample& s : traj.samples) {
    const double row[] = {s.t,          s.attitude.w, s.attitude.v[0], s.attitude.v[1], s.attitude.v[2],
                          s.q_bar.w,    s.q_bar.v[0], s.q_bar.v[1],    s.q_bar.v[2],    s.omega[0],
                          s.omega[1],   s.omega[2],   s.omega_hat[0],  s.omega_hat[1],  s.omega_hat[2],
                          s.tau[0],     s.tau[1],     s.tau[2],        s.lyapunov};
    for (std::size_t i = 0; i < std::size(row); ++i) {
      if (i) os << ',';
      os << format_double(row[i]);
    }
    os << '\n';
  }
}

}  // namespace vecstab
