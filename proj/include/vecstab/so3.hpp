// Rotation and quaternion algebra on fixed-size 3D objects.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>

#include "vecstab/error.hpp"

namespace vecstab {

struct Vec3 {
  std::array<double, 3> v{};

  constexpr Vec3() = default;
  constexpr Vec3(double x, double y, double z) : v{x, y, z} {}

  constexpr double& operator[](std::size_t i) { return v[i]; }
  constexpr double operator[](std::size_t i) const { return v[i]; }
  constexpr double x() const { return v[0]; }
  constexpr double y() const { return v[1]; }
  constexpr double z() const { return v[2]; }

  constexpr Vec3& operator+=(const Vec3& o) {
    for (std::size_t i = 0; i < 3; ++i) v[i] += o.v[i];
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    for (std::size_t i = 0; i < 3; ++i) v[i] -= o.v[i];
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    for (auto& e : v) e *= s;
    return *this;
  }

  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator-(const Vec3& a) { return {-a[0], -a[1], -a[2]}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

  static constexpr Vec3 zero() { return {}; }
  static constexpr Vec3 unit(std::size_t axis) {
    Vec3 e;
    e[axis] = 1.0;
    return e;
  }
};

constexpr double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vec3& a) {
  return std::fmax(std::fabs(a[0]), std::fmax(std::fabs(a[1]), std::fabs(a[2])));
}

inline bool is_finite(const Vec3& a) {
  return std::isfinite(a[0]) && std::isfinite(a[1]) && std::isfinite(a[2]);
}

/// 3x3 real matrix, row-major.
struct Mat3 {
  std::array<double, 9> a{};

  constexpr double& operator()(std::size_t r, std::size_t c) { return a[3 * r + c]; }
  constexpr double operator()(std::size_t r, std::size_t c) const { return a[3 * r + c]; }

  static constexpr Mat3 zero() { return {}; }
  static constexpr Mat3 identity() { return diag(1.0, 1.0, 1.0); }
  static constexpr Mat3 diag(double d0, double d1, double d2) {
    Mat3 m;
    m(0, 0) = d0;
    m(1, 1) = d1;
    m(2, 2) = d2;
    return m;
  }
  static constexpr Mat3 diag(const Vec3& d) { return diag(d[0], d[1], d[2]); }
  static constexpr Mat3 rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
    Mat3 m;
    for (std::size_t j = 0; j < 3; ++j) {
      m(0, j) = r0[j];
      m(1, j) = r1[j];
      m(2, j) = r2[j];
    }
    return m;
  }
  static constexpr Mat3 columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
    return rows(c0, c1, c2).transposed();
  }

  constexpr Vec3 row(std::size_t r) const { return {a[3 * r], a[3 * r + 1], a[3 * r + 2]}; }
  constexpr Vec3 col(std::size_t c) const { return {a[c], a[3 + c], a[6 + c]}; }
  constexpr Vec3 diagonal() const { return {a[0], a[4], a[8]}; }

  constexpr Mat3 transposed() const {
    Mat3 t;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) t(i, j) = (*this)(j, i);
    return t;
  }

  constexpr double trace() const { return a[0] + a[4] + a[8]; }

  constexpr double det() const {
    const Mat3& m = *this;
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
  }

  constexpr Mat3& operator+=(const Mat3& o) {
    for (std::size_t i = 0; i < 9; ++i) a[i] += o.a[i];
    return *this;
  }
  constexpr Mat3& operator-=(const Mat3& o) {
    for (std::size_t i = 0; i < 9; ++i) a[i] -= o.a[i];
    return *this;
  }
  constexpr Mat3& operator*=(double s) {
    for (auto& e : a) e *= s;
    return *this;
  }

  friend constexpr Mat3 operator+(Mat3 x, const Mat3& y) { return x += y; }
  friend constexpr Mat3 operator-(Mat3 x, const Mat3& y) { return x -= y; }
  friend constexpr Mat3 operator-(Mat3 x) { return x *= -1.0; }
  friend constexpr Mat3 operator*(double s, Mat3 x) { return x *= s; }
  friend constexpr Mat3 operator*(Mat3 x, double s) { return x *= s; }
  friend constexpr bool operator==(const Mat3&, const Mat3&) = default;

  friend constexpr Mat3 operator*(const Mat3& x, const Mat3& y) {
    Mat3 r;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < 3; ++k) s += x(i, k) * y(k, j);
        r(i, j) = s;
      }
    return r;
  }

  friend constexpr Vec3 operator*(const Mat3& m, const Vec3& x) {
    return {dot(m.row(0), x), dot(m.row(1), x), dot(m.row(2), x)};
  }
};

constexpr Mat3 outer(const Vec3& x, const Vec3& y) {
  Mat3 m;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) m(i, j) = x[i] * y[j];
  return m;
}

inline double norm_fro(const Mat3& m) {
  double s = 0.0;
  for (double e : m.a) s += e * e;
  return std::sqrt(s);
}

inline double max_abs(const Mat3& m) {
  double s = 0.0;
  for (double e : m.a) s = std::fmax(s, std::fabs(e));
  return s;
}

inline bool is_finite(const Mat3& m) {
  for (double e : m.a)
    if (!std::isfinite(e)) return false;
  return true;
}

inline bool is_symmetric(const Mat3& m, double tol) {
  return std::fabs(m(0, 1) - m(1, 0)) <= tol && std::fabs(m(0, 2) - m(2, 0)) <= tol &&
         std::fabs(m(1, 2) - m(2, 1)) <= tol;
}

/// Closed-form inverse; throws DegenerateError when |det| <= det_guard.
inline Mat3 inverse(const Mat3& m, double det_guard = 1e-12) {
  const double d = m.det();
  if (!(std::fabs(d) > det_guard)) throw DegenerateError("3x3 matrix is singular (|det| <= guard)");
  Mat3 c;
  c(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  c(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
  c(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  c(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  c(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  c(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
  c(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  c(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
  c(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return (1.0 / d) * c;
}

/// S(x), the matrix with S(x) y = x × y.
constexpr Mat3 skew(const Vec3& x) {
  Mat3 m;
  m(0, 1) = -x[2];
  m(0, 2) = x[1];
  m(1, 0) = x[2];
  m(1, 2) = -x[0];
  m(2, 0) = -x[1];
  m(2, 1) = x[0];
  return m;
}

/// Quaternion (w, v). Attitudes are expected to be unit; the type itself
/// does not enforce it so that integrator stages can carry drift.
struct UnitQuaternion {
  double w = 1.0;
  Vec3 v{};

  constexpr UnitQuaternion() = default;
  constexpr UnitQuaternion(double w_, const Vec3& v_) : w(w_), v(v_) {}
  constexpr UnitQuaternion(double w_, double x, double y, double z) : w(w_), v(x, y, z) {}

  static constexpr UnitQuaternion identity() { return {}; }

  /// Builds from raw components and normalizes.
  static UnitQuaternion normalized(double w, double x, double y, double z) {
    return UnitQuaternion{w, x, y, z}.renormalized();
  }

  double norm() const { return std::sqrt(w * w + dot(v, v)); }

  UnitQuaternion renormalized() const {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw DegenerateError("cannot normalize a zero or non-finite quaternion");
    return {w / n, (1.0 / n) * v};
  }

  constexpr std::array<double, 4> components() const { return {w, v[0], v[1], v[2]}; }

  friend constexpr UnitQuaternion operator-(const UnitQuaternion& q) { return {-q.w, -q.v}; }
  friend constexpr bool operator==(const UnitQuaternion&, const UnitQuaternion&) = default;
};

inline bool is_finite(const UnitQuaternion& q) { return std::isfinite(q.w) && is_finite(q.v); }

/// Hamilton product without renormalization.
constexpr UnitQuaternion quat_mul_raw(const UnitQuaternion& p, const UnitQuaternion& q) {
  return {p.w * q.w - dot(p.v, q.v), p.w * q.v + q.w * p.v + cross(p.v, q.v)};
}

/// Hamilton product P ⊙ Q, renormalized.
inline UnitQuaternion quat_mul(const UnitQuaternion& p, const UnitQuaternion& q) {
  return quat_mul_raw(p, q).renormalized();
}

constexpr UnitQuaternion quat_conj(const UnitQuaternion& q) { return {q.w, -q.v}; }

/// Distance between two quaternions as points of R^4 (sign-sensitive).
inline double quat_distance(const UnitQuaternion& a, const UnitQuaternion& b) {
  const double dw = a.w - b.w;
  const Vec3 dv = a.v - b.v;
  return std::sqrt(dw * dw + dot(dv, dv));
}

struct RotationMatrix {
  Mat3 m = Mat3::identity();

  constexpr RotationMatrix transposed() const { return {m.transposed()}; }
  constexpr Vec3 apply(const Vec3& x) const { return m * x; }
  constexpr Vec3 apply_transposed(const Vec3& x) const { return m.transposed() * x; }
  friend constexpr RotationMatrix operator*(const RotationMatrix& a, const RotationMatrix& b) {
    return {a.m * b.m};
  }
};

/// R(Q) = I + 2 q0 S(q) + 2 S(q)^2.
constexpr RotationMatrix rodrigues(const UnitQuaternion& q) {
  const Mat3 s = skew(q.v);
  return {Mat3::identity() + 2.0 * q.w * s + 2.0 * (s * s)};
}

/// Rotation about a coordinate axis by `angle` radians, as a quaternion.
inline UnitQuaternion axis_rotation(std::size_t axis, double angle) {
  return {std::cos(0.5 * angle), std::sin(0.5 * angle) * Vec3::unit(axis)};
}

/// Quaternion of R = Rx(roll) Ry(pitch) Rz(yaw), i.e. the intrinsic x-y'-z''
/// sequence. Angles in radians.
inline UnitQuaternion from_euler_xyz(double roll, double pitch, double yaw) {
  return quat_mul(quat_mul(axis_rotation(0, roll), axis_rotation(1, pitch)), axis_rotation(2, yaw));
}

inline std::ostream& operator<<(std::ostream& os, const Vec3& x) {
  return os << '[' << x[0] << ", " << x[1] << ", " << x[2] << ']';
}

inline std::ostream& operator<<(std::ostream& os, const Mat3& m) {
  return os << '[' << m.row(0) << ", " << m.row(1) << ", " << m.row(2) << ']';
}

inline std::ostream& operator<<(std::ostream& os, const UnitQuaternion& q) {
  return os << '(' << q.w << ", " << q.v << ')';
}

}  // namespace vecstab
