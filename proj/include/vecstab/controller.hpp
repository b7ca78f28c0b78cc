// Stabilizing torque built from measured and desired body vectors only.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "vecstab/error.hpp"
#include "vecstab/linalg.hpp"
#include "vecstab/so3.hpp"

namespace vecstab {

struct ControlGains {
  std::vector<double> rho;  // ρ_i > 0

  std::size_t size() const { return rho.size(); }

  void validate(std::size_t expected_count) const {
    if (rho.size() != expected_count)
      throw ConfigError("gains.rho: expected " + std::to_string(expected_count) + " entries");
    for (std::size_t i = 0; i < rho.size(); ++i)
      if (!(rho[i] > 0.0) || !std::isfinite(rho[i]))
        throw ConfigError("gains.rho[" + std::to_string(i) + "]: must be a positive finite number");
  }
};

/// W_ρ = Σ ρ_i (‖r_i‖² I − r_i r_iᵀ) with its symmetric eigen-decomposition.
struct WRho {
  Mat3 matrix;
  std::array<double, 3> eigenvalues{};  // ascending
  std::array<Vec3, 3> eigenvectors{};   // orthonormal, first nonzero component positive

  double lambda_min() const { return eigenvalues[0]; }
};

inline WRho w_rho(const ControlGains& gains, const std::vector<Vec3>& reference_vectors) {
  gains.validate(reference_vectors.size());
  WRho w;
  for (std::size_t i = 0; i < reference_vectors.size(); ++i) {
    const Vec3& r = reference_vectors[i];
    w.matrix += gains.rho[i] * (dot(r, r) * Mat3::identity() - outer(r, r));
  }
  const auto eig = symmetric_eigen3(w.matrix);
  if (!(eig.values[0] > 0.0)) throw DegenerateError("W_rho is not positive definite: reference vectors are collinear");
  w.eigenvalues = eig.values;
  w.eigenvectors = eig.vectors;
  const double scale = std::max(1.0, norm_fro(w.matrix));
  for (std::size_t k = 0; k < 3; ++k) {
    const Vec3 res = w.matrix * w.eigenvectors[k] - w.eigenvalues[k] * w.eigenvectors[k];
    if (norm(res) >= 1e-9 * scale) throw ConvergenceError("W_rho eigen-decomposition residual too large");
  }
  return w;
}

/// Q̄ = Q ⊙ Q_d⁻¹.
inline UnitQuaternion error_quaternion(const UnitQuaternion& attitude, const UnitQuaternion& desired) {
  return quat_mul(attitude, quat_conj(desired));
}

/// z_ρ = Σ ρ_i S(b_i^d) b_i.
inline Vec3 z_rho_measured(const ControlGains& gains, const std::vector<Vec3>& measured,
                           const std::vector<Vec3>& desired) {
  Vec3 z;
  for (std::size_t i = 0; i < measured.size(); ++i) z += gains.rho[i] * cross(desired[i], measured[i]);
  return z;
}

/// z_ρ = −2 R_dᵀ (q̄0 I − S(q̄)) W_ρ q̄, the same signal written on the error quaternion.
inline Vec3 z_rho_quat(const WRho& w, const UnitQuaternion& q_bar, const UnitQuaternion& desired_attitude) {
  const Vec3 wq = w.matrix * q_bar.v;
  const Vec3 inner = q_bar.w * wq - cross(q_bar.v, wq);
  return -2.0 * rodrigues(desired_attitude).apply_transposed(inner);
}

/// τ = z_ρ − M ω̂. The signature admits only measured/desired vectors and
/// observer outputs; ω and Q never enter.
inline Vec3 torque(const ControlGains& gains, const std::vector<Vec3>& measured, const std::vector<Vec3>& desired,
                   const Mat3& m, const Vec3& omega_hat) {
  return z_rho_measured(gains, measured, desired) - m * omega_hat;
}

inline Vec3 torque_quat(const WRho& w, const UnitQuaternion& q_bar, const UnitQuaternion& desired_attitude,
                        const Mat3& m, const Vec3& omega_hat) {
  return z_rho_quat(w, q_bar, desired_attitude) - m * omega_hat;
}

}  // namespace vecstab
