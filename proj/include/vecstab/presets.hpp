// Reference configuration: two measured directions on a symmetric body.
#pragma once

#include <cmath>
#include <numbers>

#include "vecstab/plant.hpp"
#include "vecstab/sim.hpp"
#include "vecstab/so3.hpp"
#include "vecstab/tuning.hpp"

namespace vecstab::presets {

/// J = diag(0.5, 0.5, 1), r1 = [0,0,1], r2 = [1,0,1], Q_d = identity.
inline PlantConfig reference_plant() {
  return PlantConfig::make(Mat3::diag(0.5, 0.5, 1.0), {Vec3{0.0, 0.0, 1.0}, Vec3{1.0, 0.0, 1.0}});
}

/// Tuned gain vector.
inline ParamVector tuned_kappa() {
  return {22.5408, 1.7736, 4.0, 2.0, 0.1, 3.9672, 2.0, 0.1, 50.0, 28.7599, 0.0971, 1.8614, 1.7403, 13.9601};
}

/// Starting point of the gain search.
inline ParamVector initial_kappa() { return {6, 6, 1, 0.4, 0.01, 1, 0.4, 0.01, 12, 11, 1, 10, 10, 10}; }

inline Bounds default_bounds() {
  Bounds b;
  b.lower = {0.01, 0.01, 1e-4, 1e-4, 1e-4, 1e-4, 1e-4, 1e-4, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01};
  b.upper = {30, 30, 4, 2, 0.1, 4, 2, 0.1, 50, 50, 50, 50, 50, 50};
  return b;
}

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

/// Roll 30°, pitch 10°, yaw 45°.
inline UnitQuaternion tuning_attitude() { return from_euler_xyz(deg(30.0), deg(10.0), deg(45.0)); }

/// Reference plant at rest at `attitude` with b̂(0) = b(0) and the given gains.
inline SimConfig scenario(const UnitQuaternion& attitude, const GainSet& gains, double dt = 0.01,
                          double t_final = 20.0) {
  const PlantConfig plant = reference_plant();
  SimConfig cfg{plant, gains, dt, t_final, make_initial_state(plant, attitude, Vec3{})};
  cfg.validate();
  return cfg;
}

inline SimConfig tuning_scenario() { return scenario(tuning_attitude(), unpack_kappa(initial_kappa())); }

}  // namespace vecstab::presets
