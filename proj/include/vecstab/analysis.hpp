// Equilibrium structure and local stability of the closed loop.
//
// Linearizations are written in the rotated error coordinates
// (ξ_d = R_d ξ, q̄ or the shifted quaternion x, ω_d = R_d ω). With R_d = I
// these coincide with the plain physical coordinates.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "vecstab/controller.hpp"
#include "vecstab/error.hpp"
#include "vecstab/linalg.hpp"
#include "vecstab/sim.hpp"
#include "vecstab/so3.hpp"

namespace vecstab {

struct GenReport {
  bool simple = false;                  // all eigenvalue gaps > 1e-9 λ_max
  std::array<double, 3> eigenvalues{};  // ascending
  double min_gap = 0.0;
  double discriminant = 0.0;            // of the characteristic cubic
  int discriminant_sign = 0;            // +1, 0 (within round-off) or -1
};

/// Discriminant of det(xI − W) computed from its coefficients.
inline double characteristic_discriminant(const Mat3& w) {
  const double b = -w.trace();
  const double c = w(0, 0) * w(1, 1) - w(0, 1) * w(1, 0) + w(0, 0) * w(2, 2) - w(0, 2) * w(2, 0) +
                   w(1, 1) * w(2, 2) - w(1, 2) * w(2, 1);
  const double d = -w.det();
  return 18.0 * b * c * d - 4.0 * b * b * b * d + b * b * c * c - 4.0 * c * c * c - 27.0 * d * d;
}

inline GenReport check_gen(const WRho& w) {
  GenReport r;
  r.eigenvalues = w.eigenvalues;
  const double lmax = std::max(std::fabs(w.eigenvalues[2]), std::numeric_limits<double>::min());
  r.min_gap = std::min(w.eigenvalues[1] - w.eigenvalues[0], w.eigenvalues[2] - w.eigenvalues[1]);
  r.simple = r.min_gap > 1e-9 * lmax;
  r.discriminant = characteristic_discriminant(w.matrix);
  // Coefficient round-off is O(eps) relative to λ_max^6.
  const double floor = 1e-12 * std::pow(lmax, 6);
  r.discriminant_sign = r.discriminant > floor ? 1 : (r.discriminant < -floor ? -1 : 0);
  return r;
}

enum class Stability { stable, hyperbolic_unstable };

inline const char* to_string(Stability s) { return s == Stability::stable ? "stable" : "hyperbolic-unstable"; }

struct Equilibrium {
  std::string label;     // "Omega1+", "Omega1-", "Omega2+" ... "Omega4-"
  UnitQuaternion q_bar;  // (±1, 0) or (0, ±v_k)
  Stability stability = Stability::stable;
  int axis = -1;         // eigenvector index k for Ω_{k+2}, -1 for Ω1
  int sign = 1;
};

/// The eight zeros of z_ρ with ξ = 0, ω = 0. Ω2..Ω4 follow the ascending
/// eigenvalue order of W_ρ. Throws GenericityError if W_ρ has a repeated eigenvalue.
inline std::vector<Equilibrium> enumerate_equilibria(const WRho& w) {
  if (!check_gen(w).simple) throw GenericityError("W_rho has a repeated eigenvalue; equilibria form a continuum");
  std::vector<Equilibrium> eq;
  eq.push_back({"Omega1+", UnitQuaternion{1.0, Vec3{}}, Stability::stable, -1, 1});
  eq.push_back({"Omega1-", UnitQuaternion{-1.0, Vec3{}}, Stability::stable, -1, -1});
  for (int k = 0; k < 3; ++k) {
    const Vec3& v = w.eigenvectors[static_cast<std::size_t>(k)];
    const std::string base = "Omega" + std::to_string(k + 2);
    eq.push_back({base + "+", UnitQuaternion{0.0, v}, Stability::hyperbolic_unstable, k, 1});
    eq.push_back({base + "-", UnitQuaternion{0.0, -v}, Stability::hyperbolic_unstable, k, -1});
  }
  return eq;
}

/// Physical state (Q = q̄ ⊙ Q_d, ω = 0, b̂ = b) of an equilibrium.
inline SimState to_physical(const Equilibrium& e, const PlantConfig& plant) {
  return make_initial_state(plant, quat_mul(e.q_bar, plant.desired_attitude()), Vec3{});
}

/// Distance in (ξ_d, Q̄, ω_d) between a physical state and an equilibrium.
inline double equilibrium_distance(const SimState& s, const Equilibrium& e, const ClosedLoop& loop) {
  const auto measured = body_vectors(s.plant.attitude, loop.plant().reference_vectors());
  double acc = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const Vec3 xi = measured[i] - s.filter.b_hat[i];
    acc += dot(xi, xi);
  }
  const double dq = quat_distance(loop.q_bar(s), e.q_bar);
  acc += dq * dq + dot(s.plant.omega, s.plant.omega);
  return std::sqrt(acc);
}

struct NearestEquilibrium {
  Equilibrium equilibrium;
  double distance = 0.0;
};

inline NearestEquilibrium nearest_equilibrium(const SimState& s, const ClosedLoop& loop) {
  const auto eqs = enumerate_equilibria(loop.w_rho());
  NearestEquilibrium best{eqs.front(), std::numeric_limits<double>::infinity()};
  for (const auto& e : eqs) {
    const double d = equilibrium_distance(s, e, loop);
    if (d < best.distance) best = {e, d};
  }
  return best;
}

enum class SpectralClass { hurwitz, hyperbolic_unstable, marginal };

inline const char* to_string(SpectralClass c) {
  switch (c) {
    case SpectralClass::hurwitz: return "hurwitz";
    case SpectralClass::hyperbolic_unstable: return "hyperbolic-unstable";
    case SpectralClass::marginal: return "marginal-inconclusive";
  }
  return "unknown";
}

struct LinearizationResult {
  Matrix matrix;
  std::vector<std::complex<double>> eigenvalues;
  double max_real_part = 0.0;
  double min_abs_real_part = 0.0;
  double spectral_radius = 0.0;
  double max_residual = 0.0;  // max ‖Mz − λz‖ over the spectrum, z unit
  SpectralClass classification = SpectralClass::marginal;
};

/// Relative distance to the imaginary axis below which a spectrum is marginal.
inline constexpr double kHyperbolicThreshold = 1e-7;

inline LinearizationResult classify_spectrum(Matrix m) {
  LinearizationResult r;
  r.eigenvalues = eigenvalues_dense(m);
  r.max_real_part = -std::numeric_limits<double>::infinity();
  r.min_abs_real_part = std::numeric_limits<double>::infinity();
  for (const auto& l : r.eigenvalues) {
    r.max_real_part = std::max(r.max_real_part, l.real());
    r.min_abs_real_part = std::min(r.min_abs_real_part, std::fabs(l.real()));
    r.spectral_radius = std::max(r.spectral_radius, std::abs(l));
    r.max_residual = std::max(r.max_residual, eigen_residual(m, l));
  }
  const double thr = kHyperbolicThreshold * r.spectral_radius;
  if (r.min_abs_real_part <= thr)
    r.classification = SpectralClass::marginal;
  else if (r.max_real_part < 0.0)
    r.classification = SpectralClass::hurwitz;
  else
    r.classification = SpectralClass::hyperbolic_unstable;
  r.matrix = std::move(m);
  return r;
}

namespace detail {

struct RotatedGains {
  std::vector<Mat3> a_d;      // R_d A_i R_dᵀ
  std::vector<Mat3> gamma_d;  // R_d Λ_i R_dᵀ
  Mat3 j_d_inv;               // (R_d J R_dᵀ)⁻¹
};

inline RotatedGains rotated_gains(const ClosedLoop& loop) {
  const Mat3& rd = loop.plant().desired_rotation().m;
  RotatedGains g;
  for (std::size_t i = 0; i < loop.a_matrices().size(); ++i) {
    g.a_d.push_back(rd * loop.a_matrices()[i] * rd.transposed());
    g.gamma_d.push_back(rd * loop.gains().filter.lambda[i] * rd.transposed());
  }
  g.j_d_inv = rd * loop.plant().inertia_inverse() * rd.transposed();
  return g;
}

/// Common block pattern
///   [ −A_d          0       K ]
///   [  0            0     I/2 ]
///   [ −J_d⁻¹KᵀΓA_d  J_d⁻¹P  0 ]
/// with K_j = S(c_j) for the supplied body directions c_j.
inline Matrix assemble(const RotatedGains& g, const std::vector<Vec3>& c, const Mat3& attitude_block) {
  const std::size_t n = c.size();
  const std::size_t dim = 3 * n + 6;
  const std::size_t qo = 3 * n;
  const std::size_t wo = 3 * n + 3;
  Matrix m(dim, dim);
  for (std::size_t j = 0; j < n; ++j) {
    const Mat3 k = skew(c[j]);
    m.set_block(3 * j, 3 * j, -g.a_d[j]);
    m.set_block(3 * j, wo, k);
    m.set_block(wo, 3 * j, -(g.j_d_inv * k.transposed() * g.gamma_d[j] * g.a_d[j]));
  }
  m.set_block(qo, wo, 0.5 * Mat3::identity());
  m.set_block(wo, qo, g.j_d_inv * attitude_block);
  return m;
}

}  // namespace detail

/// Linearization at Ω1± in the coordinates (ξ_d, q̄, ω_d). The q̄0 direction
/// is normal to the sphere and drops out.
inline LinearizationResult linearize_stable(const ClosedLoop& loop) {
  const auto g = detail::rotated_gains(loop);
  return classify_spectrum(detail::assemble(g, loop.plant().reference_vectors(), -2.0 * loop.w_rho().matrix));
}

/// Linearization at Ω_{k+2}± in the coordinates (ξ_d, x, ω_d), where
/// X = (0, −σv) ⊙ Q̄ moves the equilibrium to X = (1, 0).
inline LinearizationResult linearize_unstable(const Equilibrium& eq, const ClosedLoop& loop) {
  if (eq.axis < 0) throw ConfigError("linearize_unstable: equilibrium must be one of Omega2..4");
  const WRho& w = loop.w_rho();
  const auto k = static_cast<std::size_t>(eq.axis);
  const Vec3& v = w.eigenvectors[k];
  const double lambda = w.eigenvalues[k];
  const Mat3 sv = skew(v);
  const Mat3 g_block = lambda * Mat3::identity() + sv * w.matrix * sv;
  // R̄ at the equilibrium is I + 2S(v)², symmetric; body directions in the
  // rotated frame are R̄ᵀ r_j.
  const Mat3 r_bar = Mat3::identity() + 2.0 * (sv * sv);
  std::vector<Vec3> c;
  for (const Vec3& r : loop.plant().reference_vectors()) c.push_back(r_bar.transposed() * r);
  return classify_spectrum(detail::assemble(detail::rotated_gains(loop), c, 2.0 * g_block));
}

/// Summary of a simulated run.
struct RunSummary {
  std::optional<double> convergence_time;
  std::string terminal_equilibrium;  // label, or "none" if not within tolerance
  double terminal_distance = 0.0;
  double peak_torque = 0.0;
  double torque_energy = 0.0;  // ∫‖τ‖² dt
};

inline RunSummary summarize(const Trajectory& traj, const ClosedLoop& loop, double tol = 1e-3) {
  RunSummary s;
  s.convergence_time = convergence_time(traj, tol);
  const auto nearest = nearest_equilibrium(traj.final_state, loop);
  s.terminal_distance = nearest.distance;
  s.terminal_equilibrium = nearest.distance < tol ? nearest.equilibrium.label : "none";
  for (const auto& smp : traj.samples) s.peak_torque = std::max(s.peak_torque, norm(smp.tau));
  s.torque_energy = integrate_samples(traj, [](const Sample& smp) { return dot(smp.tau, smp.tau); });
  return s;
}

}  // namespace vecstab
