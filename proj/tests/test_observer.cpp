#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "support.hpp"

using namespace vecstab;
using vecstab::testing::Rng;

TEST(FilterGains, BuildAMatrices) {
  FilterGains g{{Mat3::identity()}, {FilterPolynomial{1, 1, 1}}};
  EXPECT_EQ(build_a_matrices(g, UnitQuaternion::identity())[0], 3.0 * Mat3::identity());

  FilterGains t{{Mat3::diag(50, 28.7599, 0.0971)}, {FilterPolynomial{4, 2, 0.1}}};
  const Mat3 a = build_a_matrices(t, UnitQuaternion::identity())[0];
  // a0 + a1 x + a2 x² per diagonal entry.
  EXPECT_NEAR(a(0, 0), 354.0, 1e-12);
  EXPECT_NEAR(a(1, 1), 4 + 2 * 28.7599 + 0.1 * 28.7599 * 28.7599, 1e-12);
  EXPECT_NEAR(a(1, 1), 144.2329848, 1e-6);
  EXPECT_NEAR(a(2, 2), 4.19514284, 1e-8);
}

TEST(FilterGains, CommutationForRandomDesiredAttitude) {
  Rng rng(41);
  for (int k = 0; k < 200; ++k) {
    const Mat3 lam = Mat3::diag(rng.uniform(0.01, 50), rng.uniform(0.01, 50), rng.uniform(0.01, 50));
    FilterGains g{{lam}, {FilterPolynomial{rng.uniform(0.01, 4), rng.uniform(0, 2), rng.uniform(0, 0.1)}}};
    const UnitQuaternion qd = rng.quaternion();
    const Mat3 rd = rodrigues(qd).m;
    const Mat3 a_d = rd * build_a_matrices(g, qd)[0] * rd.transposed();
    EXPECT_LT(max_abs(lam * a_d - a_d * lam), 1e-9 * std::max(1.0, max_abs(lam * a_d)));
    const Mat3 ga = lam * a_d;
    EXPECT_LT(max_abs(ga - ga.transposed()), 1e-9 * std::max(1.0, max_abs(ga)));
  }
}

TEST(FilterGains, Validation) {
  EXPECT_THROW((FilterGains{{Mat3::diag(1, 0, 1)}, {FilterPolynomial{}}}.validate(1)), ConfigError);
  EXPECT_THROW((FilterGains{{Mat3::rows({1, 1, 0}, {0, 1, 0}, {0, 0, 1})}, {FilterPolynomial{}}}.validate(1)),
               ConfigError);
  EXPECT_THROW((FilterGains{{Mat3::identity()}, {FilterPolynomial{-1, 0, 0}}}.validate(1)), ConfigError);
  EXPECT_THROW((FilterGains{{Mat3::identity()}, {FilterPolynomial{}}}.validate(2)), ConfigError);
  // Negative coefficients are fine when P stays positive on the spectrum.
  EXPECT_NO_THROW((FilterGains{{Mat3::diag(1, 2, 3)}, {FilterPolynomial{10, -1, 0}}}.validate(1)));
}

TEST(FilterDerivative, Examples) {
  EXPECT_EQ(filter_derivative(FilterState{{Vec3{1, 2, 3}}}, {Vec3{1, 2, 3}}, {Mat3::identity()})[0], Vec3{});
  EXPECT_EQ(filter_derivative(FilterState{{Vec3{}}}, {Vec3{1, 0, 0}}, {2.0 * Mat3::identity()})[0], (Vec3{2, 0, 0}));
}

TEST(FilterDerivative, FrozenAttitudeMatchesMatrixExponential) {
  Rng rng(42);
  for (int k = 0; k < 20; ++k) {
    const Mat3 a = rng.spd(0.5, 5.0);
    const Vec3 b = rng.vec();
    const Vec3 xi0 = rng.vec();
    Vec3 b_hat = b - xi0;
    const double h = 0.01;
    const int steps = 100;
    for (int s = 0; s < steps; ++s)
      b_hat = rk4_step(b_hat, h, [&](const Vec3& x) { return filter_derivative(FilterState{{x}}, {b}, {a})[0]; });
    Eigen::Matrix3d ae;
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 3; ++c) ae(r, c) = a(r, c);
    const Eigen::Matrix3d e = (-ae * (h * steps)).exp();
    const Eigen::Vector3d xe = e * Eigen::Vector3d(xi0[0], xi0[1], xi0[2]);
    const Vec3 xi = b - b_hat;
    EXPECT_LT(norm(xi - Vec3{xe(0), xe(1), xe(2)}), 1e-4);
  }
}

TEST(MMatrix, ExamplesAndDegeneracy) {
  const Mat3 m = m_matrix({Vec3{0, 0, 1}, Vec3{1, 0, 1}}, {Mat3::identity(), Mat3::identity()});
  EXPECT_LT(max_abs(m - Mat3::rows({2, 0, -1}, {0, 3, 0}, {-1, 0, 1})), 1e-15);
  EXPECT_THROW(m_matrix({Vec3{0, 0, 1}}, {Mat3::identity()}), DegenerateError);
  EXPECT_THROW(m_matrix({Vec3{0, 0, 1}, Vec3{0, 0, 3}}, {Mat3::identity(), Mat3::identity()}), DegenerateError);
}

TEST(MMatrix, SymmetricPositiveDefiniteForRandomPairs) {
  Rng rng(43);
  for (int k = 0; k < 1000; ++k) {
    const std::vector<Vec3> b{rng.unit_vec(), rng.unit_vec()};
    if (norm(cross(b[0], b[1])) < 1e-3) continue;
    const Mat3 m = m_matrix(b, {rng.spd(), rng.spd()});
    EXPECT_TRUE(is_symmetric(m, 1e-12));
    EXPECT_GT(symmetric_eigen3(m).values[0], 0.0);
  }
}

TEST(BMatrix, StackAndGramIdentity) {
  const Matrix z = b_matrix({Vec3{}, Vec3{}});
  EXPECT_EQ(z.norm_fro(), 0.0);
  Rng rng(44);
  for (int k = 0; k < 200; ++k) {
    const std::vector<Vec3> b{rng.vec(), rng.vec(), rng.vec()};
    const std::vector<Mat3> lam{rng.spd(), rng.spd(), rng.spd()};
    const Matrix bm = b_matrix(b);
    ASSERT_EQ(bm.rows(), 9u);
    ASSERT_EQ(bm.cols(), 3u);
    Matrix gamma(9, 9);
    for (std::size_t i = 0; i < 3; ++i) gamma.set_block(3 * i, 3 * i, lam[i]);
    const Matrix btgb = bm.transposed() * gamma * bm;
    const Mat3 m = m_matrix(b, lam);
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(btgb(r, c), m(r, c), 1e-12 * std::max(1.0, max_abs(m)));
    // Error dynamics: ξ̇ = −Aξ + Bω, since ḃ = S(b)ω.
    const Vec3 w = rng.vec();
    for (std::size_t i = 0; i < 3; ++i) {
      Vec3 bw;
      for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) bw[r] += bm(3 * i + r, c) * w[c];
      EXPECT_LT(norm(bw - reduced_kinematics(b[i], w)), 1e-15);
    }
  }
  const Matrix par = b_matrix({Vec3{0, 0, 1}, Vec3{0, 0, 2}});
  Vec3 w{0, 0, 3};
  for (std::size_t r = 0; r < 6; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 3; ++c) s += par(r, c) * w[c];
    EXPECT_EQ(s, 0.0);
  }
}

TEST(OmegaHat, ZeroFilterErrorGivesZero) {
  const std::vector<Vec3> b{{0, 0, 1}, {1, 0, 1}};
  const FilterGains g{{Mat3::identity(), Mat3::identity()}, {FilterPolynomial{}, FilterPolynomial{}}};
  const auto a = build_a_matrices(g, UnitQuaternion::identity());
  EXPECT_EQ(omega_hat(FilterState{b}, b, g, a), Vec3{});
}

TEST(OmegaHat, ExactWithTrueRatesAndBothFormsAgree) {
  Rng rng(45);
  for (int k = 0; k < 2000; ++k) {
    const int n = rng.integer(2, 4);
    std::vector<Vec3> refs;
    std::vector<Mat3> lam;
    std::vector<FilterPolynomial> poly;
    for (int i = 0; i < n; ++i) {
      refs.push_back(rng.uniform(0.5, 2.0) * rng.unit_vec());
      lam.push_back(rng.spd(0.1, 10));
      poly.push_back(FilterPolynomial{rng.uniform(0.1, 4), rng.uniform(0, 2), rng.uniform(0, 0.1)});
    }
    if (norm(cross(refs[0], refs[1])) < 0.1 * norm(refs[0]) * norm(refs[1])) continue;
    const UnitQuaternion q = rng.quaternion();
    const Vec3 w = rng.vec(2.0);
    const auto b = body_vectors(q, refs);
    std::vector<Vec3> bdot;
    for (const Vec3& bi : b) bdot.push_back(reduced_kinematics(bi, w));
    EXPECT_LT(norm(reconstruct_omega(b, lam, bdot) - w), 1e-12);

    const UnitQuaternion qd = rng.quaternion();
    const FilterGains g{lam, poly};
    const auto a = build_a_matrices(g, qd);
    FilterState f;
    for (const Vec3& bi : b) f.b_hat.push_back(bi + rng.vec(0.3));
    const Vec3 eq13 = omega_hat(f, b, g, a);
    const Vec3 eq9 = reconstruct_omega(b, lam, filter_derivative(f, b, a));
    EXPECT_LT(norm(eq13 - eq9), 1e-12 * std::max(1.0, norm(eq13)));
  }
}
