#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "vecstab/vecstab.hpp"

namespace vecstab::testing {

/// Deterministic draws for property tests.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }

  Vec3 vec(double scale = 1.0) { return Vec3{uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale)}; }

  Vec3 unit_vec() {
    Vec3 v{normal(), normal(), normal()};
    return (1.0 / norm(v)) * v;
  }

  /// Uniform in the ball of radius r.
  Vec3 in_ball(double r) { return (r * std::cbrt(uniform())) * unit_vec(); }

  /// Uniform on the unit 3-sphere.
  UnitQuaternion quaternion() { return UnitQuaternion::normalized(normal(), normal(), normal(), normal()); }

  Mat3 rotation() { return rodrigues(quaternion()).m; }

  /// Symmetric positive definite with eigenvalues in [lo, hi].
  Mat3 spd(double lo = 0.5, double hi = 5.0) {
    const Mat3 r = rotation();
    return r * Mat3::diag(uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)) * r.transposed();
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

inline double max_abs_diff(const Mat3& a, const Mat3& b) { return max_abs(a - b); }

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace vecstab::testing
