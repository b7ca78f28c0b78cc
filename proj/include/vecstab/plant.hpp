// Rigid-body rotational kinematics/dynamics and body-frame vector
// measurements b_i = R(Q)^T r_i.
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "vecstab/error.hpp"
#include "vecstab/linalg.hpp"
#include "vecstab/so3.hpp"

namespace vecstab {

/// Inertia, inertial reference directions and the desired attitude.
/// Immutable once built; construct through PlantConfig::make.
class PlantConfig {
 public:
  static PlantConfig make(const Mat3& inertia, std::vector<Vec3> reference_vectors,
                          const UnitQuaternion& desired_attitude = UnitQuaternion::identity()) {
    if (!is_finite(inertia)) throw ConfigError("plant.inertia: non-finite entry");
    if (!is_symmetric(inertia, 1e-9 * std::max(1.0, max_abs(inertia))))
      throw ConfigError("plant.inertia: matrix is not symmetric");
    const auto eig = symmetric_eigen3(inertia);
    if (!(eig.values[0] > 0.0)) throw ConfigError("plant.inertia: matrix is not positive definite");

    if (reference_vectors.size() < 2) throw ConfigError("plant.reference_vectors: at least two vectors are required");
    for (std::size_t i = 0; i < reference_vectors.size(); ++i)
      if (!is_finite(reference_vectors[i]))
        throw ConfigError("plant.reference_vectors[" + std::to_string(i) + "]: non-finite entry");
    bool independent = false;
    for (std::size_t i = 0; i < reference_vectors.size() && !independent; ++i)
      for (std::size_t j = i + 1; j < reference_vectors.size() && !independent; ++j) {
        const Vec3& ri = reference_vectors[i];
        const Vec3& rj = reference_vectors[j];
        independent = norm(cross(ri, rj)) > 1e-9 * norm(ri) * norm(rj);
      }
    if (!independent) throw ConfigError("plant.reference_vectors: all vectors are collinear");

    if (!is_finite(desired_attitude) || std::fabs(desired_attitude.norm() - 1.0) > 1e-6)
      throw ConfigError("plant.desired_attitude: not a unit quaternion");

    PlantConfig c;
    c.inertia_ = inertia;
    c.inertia_inv_ = inverse(inertia);
    c.refs_ = std::move(reference_vectors);
    c.desired_ = desired_attitude.renormalized();
    c.desired_rot_ = rodrigues(c.desired_);
    c.desired_body_.reserve(c.refs_.size());
    for (const Vec3& r : c.refs_) c.desired_body_.push_back(c.desired_rot_.apply_transposed(r));
    return c;
  }

  const Mat3& inertia() const { return inertia_; }
  const Mat3& inertia_inverse() const { return inertia_inv_; }
  const std::vector<Vec3>& reference_vectors() const { return refs_; }
  std::size_t vector_count() const { return refs_.size(); }
  const UnitQuaternion& desired_attitude() const { return desired_; }
  const RotationMatrix& desired_rotation() const { return desired_rot_; }
  /// b_i^d = R_d^T r_i.
  const std::vector<Vec3>& desired_body_vectors() const { return desired_body_; }

 private:
  PlantConfig() = default;

  Mat3 inertia_;
  Mat3 inertia_inv_;
  std::vector<Vec3> refs_;
  UnitQuaternion desired_;
  RotationMatrix desired_rot_;
  std::vector<Vec3> desired_body_;
};

struct PlantState {
  UnitQuaternion attitude;
  Vec3 omega;  // rad/s, body frame
};

/// Time derivative of a quaternion (not itself unit).
struct QuatRate {
  double w = 0.0;
  Vec3 v{};
};

inline std::vector<Vec3> body_vectors(const UnitQuaternion& attitude, const std::vector<Vec3>& reference_vectors) {
  const RotationMatrix r = rodrigues(attitude);
  std::vector<Vec3> b;
  b.reserve(reference_vectors.size());
  for (const Vec3& ri : reference_vectors) b.push_back(r.apply_transposed(ri));
  return b;
}

inline std::vector<Vec3> body_vectors(const PlantState& state, const PlantConfig& config) {
  return body_vectors(state.attitude, config.reference_vectors());
}

inline const std::vector<Vec3>& desired_body_vectors(const PlantConfig& config) { return config.desired_body_vectors(); }

/// Q̇ = [-½ qᵀω ; ½ (q0 I + S(q)) ω].
constexpr QuatRate quat_kinematics(const UnitQuaternion& q, const Vec3& omega) {
  return {-0.5 * dot(q.v, omega), 0.5 * (q.w * omega + cross(q.v, omega))};
}

constexpr QuatRate quat_kinematics(const PlantState& state) { return quat_kinematics(state.attitude, state.omega); }

/// ω̇ = J⁻¹(−S(ω) J ω + τ).
inline Vec3 euler_dynamics(const Vec3& omega, const Vec3& torque, const PlantConfig& config) {
  return config.inertia_inverse() * (torque - cross(omega, config.inertia() * omega));
}

inline Vec3 euler_dynamics(const PlantState& state, const Vec3& torque, const PlantConfig& config) {
  return euler_dynamics(state.omega, torque, config);
}

/// ḃ = −S(ω) b.
constexpr Vec3 reduced_kinematics(const Vec3& b, const Vec3& omega) { return -cross(omega, b); }

}  // namespace vecstab
