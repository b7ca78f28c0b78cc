#include <gtest/gtest.h>

#include "support.hpp"

using namespace vecstab;
using vecstab::testing::Rng;

TEST(Skew, MatchesDisplayedMatrix) {
  const Mat3 s = skew(Vec3{1, 2, 3});
  const Mat3 expect = Mat3::rows({0, -3, 2}, {3, 0, -1}, {-2, 1, 0});
  EXPECT_EQ(s, expect);
  EXPECT_EQ(skew(Vec3{}), Mat3::zero());
  EXPECT_EQ((skew(Vec3{1, 0, 0}) * Vec3{0, 1, 0}), (Vec3{0, 0, 1}));
}

TEST(Skew, IdentitiesOnRandomVectors) {
  Rng rng(11);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 x = rng.vec(2.0);
    const Vec3 y = rng.vec(2.0);
    const Mat3 sx = skew(x);
    const Mat3 sy = skew(y);
    EXPECT_LT(norm(sx * y + sy * x), 1e-12);
    EXPECT_LT(norm(sx * x), 1e-12);
    EXPECT_LT(max_abs(sx * sy - (outer(y, x) - dot(x, y) * Mat3::identity())), 1e-12);
    EXPECT_LT(max_abs(sx * sx - (outer(x, x) - dot(x, x) * Mat3::identity())), 1e-12);
    EXPECT_LT(max_abs(skew(sx * y) - (sx * sy - sy * sx)), 1e-12);
    const Mat3 r = rng.rotation();
    EXPECT_LT(max_abs(skew(r * x) - r * sx * r.transposed()), 1e-12);
    EXPECT_LT(norm(sx * y - cross(x, y)), 1e-15);
  }
}

TEST(Quaternion, ProductExamples) {
  const UnitQuaternion q{0.8, 0, 0, 0.6};
  const UnitQuaternion qq = quat_mul(q, q);
  EXPECT_NEAR(qq.w, 0.28, 1e-15);
  EXPECT_NEAR(qq.v[2], 0.96, 1e-15);
  EXPECT_EQ(qq.v[0], 0.0);
  EXPECT_NEAR(qq.norm(), 1.0, 1e-15);
  EXPECT_EQ(quat_mul(UnitQuaternion::identity(), q), q);
}

TEST(Quaternion, ConjugateIsInverse) {
  EXPECT_EQ(quat_conj(UnitQuaternion::identity()), UnitQuaternion::identity());
  EXPECT_EQ(quat_conj(UnitQuaternion(0, 0, 0, 1)), UnitQuaternion(0, 0, 0, -1));
  Rng rng(12);
  for (int k = 0; k < 100; ++k) {
    const UnitQuaternion q = rng.quaternion();
    const UnitQuaternion e = quat_mul(q, quat_conj(q));
    EXPECT_NEAR(e.w, 1.0, 1e-15);
    EXPECT_LT(norm(e.v), 1e-15);
  }
}

TEST(Quaternion, RenormalizeRejectsZero) {
  EXPECT_THROW(UnitQuaternion(0, 0, 0, 0).renormalized(), DegenerateError);
}

TEST(Rodrigues, Examples) {
  EXPECT_EQ(rodrigues(UnitQuaternion::identity()).m, Mat3::identity());
  EXPECT_EQ(rodrigues(UnitQuaternion(0, 0, 0, 1)).m, Mat3::diag(-1, -1, 1));
  const Mat3 r = rodrigues(UnitQuaternion(0.8, 0, 0, 0.6)).m;
  const Mat3 expect = Mat3::rows({0.28, -0.96, 0}, {0.96, 0.28, 0}, {0, 0, 1});
  EXPECT_LT(max_abs(r - expect), 1e-15);
  EXPECT_NEAR(r.det(), 1.0, 1e-12);
}

TEST(Rodrigues, GroupProperties) {
  Rng rng(13);
  for (int k = 0; k < 1000; ++k) {
    const UnitQuaternion p = rng.quaternion();
    const UnitQuaternion q = rng.quaternion();
    const Mat3 r = rodrigues(q).m;
    EXPECT_LT(max_abs(r.transposed() * r - Mat3::identity()), 1e-9);
    EXPECT_NEAR(r.det(), 1.0, 1e-9);
    EXPECT_EQ(rodrigues(-q).m, r);
    EXPECT_LT(max_abs(rodrigues(quat_mul(p, q)).m - rodrigues(p).m * r), 1e-9);
  }
}

TEST(Euler, IntrinsicXyzSequence) {
  using vecstab::testing::deg;
  const UnitQuaternion q = from_euler_xyz(deg(30), deg(10), deg(45));
  EXPECT_NEAR(q.w, 0.8804, 1e-4);
  EXPECT_NEAR(q.v[0], 0.2704, 1e-4);
  EXPECT_NEAR(q.v[1], -0.02089, 1e-4);
  EXPECT_NEAR(q.v[2], 0.3891, 1e-4);
  const Mat3 r = rodrigues(axis_rotation(0, deg(30))).m * rodrigues(axis_rotation(1, deg(10))).m *
                 rodrigues(axis_rotation(2, deg(45))).m;
  EXPECT_LT(max_abs(rodrigues(q).m - r), 1e-14);
}

TEST(Mat3, InverseAndGuard) {
  Rng rng(14);
  for (int k = 0; k < 100; ++k) {
    const Mat3 m = rng.spd();
    EXPECT_LT(max_abs(inverse(m) * m - Mat3::identity()), 1e-12);
  }
  EXPECT_THROW(inverse(Mat3::diag(1, 1, 0)), DegenerateError);
}
