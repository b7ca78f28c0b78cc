// Angular-velocity reconstruction from filtered vector measurements.
//
// Each measured direction b_i drives a first-order filter
//     d/dt b̂_i = A_i (b_i − b̂_i),
// and the filter rates stand in for the unmeasured ḃ_i in the exact identity
//     ω = −M⁻¹ Σ S(b_i) Λ_i ḃ_i,   M = Σ S(b_i)ᵀ Λ_i S(b_i).
// No gyroscope signal and no attitude estimate enter this path.
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "vecstab/error.hpp"
#include "vecstab/linalg.hpp"
#include "vecstab/so3.hpp"

namespace vecstab {

/// Coefficients of P(x) = c0 + c1 x + c2 x².
struct FilterPolynomial {
  double c0 = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;

  constexpr double operator()(double x) const { return c0 + x * (c1 + x * c2); }
  constexpr Mat3 operator()(const Mat3& m) const { return c0 * Mat3::identity() + c1 * m + c2 * (m * m); }
};

struct FilterGains {
  std::vector<Mat3> lambda;             // Λ_i, symmetric positive definite
  std::vector<FilterPolynomial> poly;   // P_i

  std::size_t size() const { return lambda.size(); }

  /// Checks SPD-ness of every Λ_i and positivity of P_i on the eigenvalues of Λ_i.
  void validate(std::size_t expected_count) const {
    if (lambda.size() != expected_count || poly.size() != expected_count)
      throw ConfigError("gains.filter: expected " + std::to_string(expected_count) + " filter weights and polynomials");
    for (std::size_t i = 0; i < lambda.size(); ++i) {
      const std::string where = "gains.lambda[" + std::to_string(i) + "]";
      if (!is_finite(lambda[i])) throw ConfigError(where + ": non-finite entry");
      if (!is_symmetric(lambda[i], 1e-9 * std::max(1.0, max_abs(lambda[i]))))
        throw ConfigError(where + ": matrix is not symmetric");
      const auto eig = symmetric_eigen3(lambda[i]);
      if (!(eig.values[0] > 0.0)) throw ConfigError(where + ": matrix is not positive definite");
      for (double l : eig.values)
        if (!(poly[i](l) > 0.0))
          throw ConfigError("gains.poly[" + std::to_string(i) + "]: polynomial is not positive on the spectrum of Λ");
    }
  }
};

struct FilterState {
  std::vector<Vec3> b_hat;
};

/// A_i = R_dᵀ P_i(Λ_i) R_d. R_d A_i R_dᵀ = P_i(Λ_i) is then SPD and commutes with Λ_i.
inline std::vector<Mat3> build_a_matrices(const FilterGains& gains, const UnitQuaternion& desired_attitude) {
  gains.validate(gains.size());
  const Mat3 rd = rodrigues(desired_attitude).m;
  std::vector<Mat3> a;
  a.reserve(gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i) a.push_back(rd.transposed() * gains.poly[i](gains.lambda[i]) * rd);
  return a;
}

/// b̃_i = b_i − b̂_i.
inline std::vector<Vec3> filter_error(const std::vector<Vec3>& measured, const FilterState& filter) {
  std::vector<Vec3> xi(measured.size());
  for (std::size_t i = 0; i < measured.size(); ++i) xi[i] = measured[i] - filter.b_hat[i];
  return xi;
}

inline std::vector<Vec3> filter_derivative(const FilterState& filter, const std::vector<Vec3>& measured,
                                           const std::vector<Mat3>& a) {
  std::vector<Vec3> rate(measured.size());
  for (std::size_t i = 0; i < measured.size(); ++i) rate[i] = a[i] * (measured[i] - filter.b_hat[i]);
  return rate;
}

/// M = Σ S(b_i)ᵀ Λ_i S(b_i). Throws DegenerateError when |det M| <= 1e-12.
inline Mat3 m_matrix(const std::vector<Vec3>& measured, const std::vector<Mat3>& lambda) {
  Mat3 m;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const Mat3 s = skew(measured[i]);
    m += s.transposed() * lambda[i] * s;
  }
  if (!(std::fabs(m.det()) > 1e-12))
    throw DegenerateError("M is singular: measured directions are collinear");
  return m;
}

/// B = [S(b_1); …; S(b_n)] (3n x 3), so that ξ̇ = −Aξ + Bω.
inline Matrix b_matrix(const std::vector<Vec3>& measured) {
  Matrix b(3 * measured.size(), 3);
  for (std::size_t i = 0; i < measured.size(); ++i) b.set_block(3 * i, 0, skew(measured[i]));
  return b;
}

/// −M⁻¹ Σ S(b_i) Λ_i rate_i. With the true ḃ_i this is exactly ω; with the
/// filter rates it is ω̂.
inline Vec3 reconstruct_omega(const std::vector<Vec3>& measured, const std::vector<Mat3>& lambda,
                              const std::vector<Vec3>& rates) {
  Vec3 s;
  for (std::size_t i = 0; i < measured.size(); ++i) s += cross(measured[i], lambda[i] * rates[i]);
  return -(inverse(m_matrix(measured, lambda)) * s);
}

struct ObserverOutput {
  Mat3 m;
  Vec3 omega_hat;
};

/// M and ω̂ = M⁻¹ Σ S(b_i)ᵀ Λ_i A_i (b_i − b̂_i) in one pass.
inline ObserverOutput observe(const FilterState& filter, const std::vector<Vec3>& measured,
                              const std::vector<Mat3>& lambda, const std::vector<Mat3>& a) {
  ObserverOutput out;
  out.m = m_matrix(measured, lambda);
  Vec3 s;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const Vec3 weighted = lambda[i] * (a[i] * (measured[i] - filter.b_hat[i]));
    s -= cross(measured[i], weighted);
  }
  out.omega_hat = inverse(out.m) * s;
  return out;
}

inline Vec3 omega_hat(const FilterState& filter, const std::vector<Vec3>& measured, const FilterGains& gains,
                      const std::vector<Mat3>& a) {
  return observe(filter, measured, gains.lambda, a).omega_hat;
}

}  // namespace vecstab
