#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

#include "stochso3/quaternion.hpp"
#include "test_support.hpp"

using namespace stochso3;
using testing_support::random_rotation;

namespace {

UnitQuaternion random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double w = n(rng), x = n(rng), y = n(rng), z = n(rng);
  return UnitQuaternion(w, Vec3(x, y, z));
}

Eigen::Quaterniond to_eigen(const UnitQuaternion& q) {
  return Eigen::Quaterniond(q.w(), q.vec().x(), q.vec().y(), q.vec().z());
}

double quat_distance(const UnitQuaternion& a, const UnitQuaternion& b) {
  return std::hypot(a.w() - b.w(), (a.vec() - b.vec()).norm());
}

}  // namespace

TEST(QuatProduct, IdentityAndBasisProducts) {
  std::mt19937_64 rng(1);
  const UnitQuaternion q = random_quat(rng);
  EXPECT_LT(quat_distance(UnitQuaternion::identity() * q, q), 1e-15);
  const UnitQuaternion i(0.0, Vec3::UnitX()), j(0.0, Vec3::UnitY());
  const UnitQuaternion k = i * j;
  EXPECT_EQ(k.w(), 0.0);
  EXPECT_EQ(k.vec(), Vec3::UnitZ());
}

TEST(QuatProduct, MatchesEigenHamiltonProduct) {
  std::mt19937_64 rng(2);
  for (int n = 0; n < 100; ++n) {
    const UnitQuaternion a = random_quat(rng), b = random_quat(rng);
    const UnitQuaternion c = a * b;
    const Eigen::Quaterniond e = to_eigen(a) * to_eigen(b);
    EXPECT_NEAR(c.w(), e.w(), 1e-14);
    EXPECT_LT((c.vec() - e.vec()).norm(), 1e-14);
  }
}

TEST(QuatProduct, Homomorphism) {
  std::mt19937_64 rng(3);
  for (int n = 0; n < 100; ++n) {
    const UnitQuaternion a = random_quat(rng), b = random_quat(rng);
    const Mat3 prod = quat_to_rotation(a).matrix() * quat_to_rotation(b).matrix();
    EXPECT_LT((quat_to_rotation(a * b).matrix() - prod).norm(), 1e-10);
    EXPECT_NEAR((a * b).norm(), 1.0, 1e-9);
  }
}

TEST(QuatInverse, Values) {
  const UnitQuaternion id = quat_inverse(UnitQuaternion::identity());
  EXPECT_EQ(id.w(), 1.0);
  EXPECT_EQ(id.vec(), Vec3::Zero());
  const UnitQuaternion i = quat_inverse(UnitQuaternion(0.0, Vec3::UnitX()));
  EXPECT_EQ(i.w(), 0.0);
  EXPECT_EQ(i.vec(), -Vec3::UnitX());
  std::mt19937_64 rng(4);
  for (int n = 0; n < 100; ++n) {
    const UnitQuaternion a = random_quat(rng);
    EXPECT_LT(quat_distance(a * quat_inverse(a), UnitQuaternion::identity()), 1e-12);
  }
}

TEST(QuatToRotation, KnownValues) {
  EXPECT_EQ(quat_to_rotation(UnitQuaternion::identity()).matrix(), Mat3::Identity());
  const double c = std::cos(std::numbers::pi / 4), s = std::sin(std::numbers::pi / 4);
  Mat3 expected;
  expected << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  EXPECT_LT((quat_to_rotation(UnitQuaternion(c, Vec3(s, 0, 0))).matrix() - expected).norm(), 1e-15);
  EXPECT_LT((testing_support::eigen_angle_axis(std::numbers::pi / 2, Vec3::UnitX()) - expected).norm(),
            1e-15);
}

TEST(QuatToRotation, DoubleCoverAndEigenAgreement) {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 100; ++n) {
    const UnitQuaternion q = random_quat(rng);
    EXPECT_LT((quat_to_rotation(q).matrix() - quat_to_rotation(-q).matrix()).norm(), 1e-15);
    EXPECT_LT((quat_to_rotation(q).matrix() - to_eigen(q).toRotationMatrix()).norm(), 1e-14);
  }
}

TEST(RotationToQuat, KnownValuesAndSign) {
  const UnitQuaternion id = rotation_to_quat(Rotation::identity());
  EXPECT_EQ(id.w(), 1.0);
  EXPECT_EQ(id.vec(), Vec3::Zero());
  const UnitQuaternion half = rotation_to_quat(Rotation::from_matrix(Vec3(-1, -1, 1).asDiagonal()));
  EXPECT_NEAR(std::abs(half.w()), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(half.vec().z()), 1.0, 1e-15);
}

TEST(RotationToQuat, RoundTripIncludingNearHalfTurns) {
  std::mt19937_64 rng(6);
  for (int n = 0; n < 1000; ++n) {
    const Rotation r = random_rotation(rng);
    const UnitQuaternion q = rotation_to_quat(r);
    EXPECT_GE(q.w(), 0.0);
    EXPECT_LT((quat_to_rotation(q).matrix() - r.matrix()).norm(), 1e-9);
  }
  for (int n = 0; n < 100; ++n) {
    const Vec3 u = testing_support::unit_vec(rng);
    const Rotation r = Rotation::from_matrix(
        testing_support::eigen_angle_axis(std::numbers::pi - 1e-7 * n, u));
    EXPECT_LT((quat_to_rotation(rotation_to_quat(r)).matrix() - r.matrix()).norm(), 1e-9);
  }
}

TEST(QuatKinematics, ZeroRateLeavesQuaternionUnchanged) {
  std::mt19937_64 rng(7);
  const UnitQuaternion q = random_quat(rng);
  EXPECT_LT(quat_distance(quat_kinematics_step(q, Vec3::Zero(), 0.01), q), 1e-15);
  EXPECT_THROW(quat_kinematics_step(q, Vec3::Zero(), 0.0), std::invalid_argument);
}

TEST(QuatKinematics, HalfTurnAboutZ) {
  const UnitQuaternion q = quat_kinematics_step(UnitQuaternion::identity(),
                                                Vec3(0, 0, std::numbers::pi), 1.0);
  EXPECT_NEAR(std::abs(q.vec().z()), 1.0, 1e-12);
  EXPECT_LT((quat_to_rotation(q).matrix() - Mat3(Vec3(-1, -1, 1).asDiagonal())).norm(), 1e-12);
}

TEST(QuatKinematics, MatchesMatrixExponentialStep) {
  std::mt19937_64 rng(8);
  for (int n = 0; n < 100; ++n) {
    const UnitQuaternion q = random_quat(rng);
    const Vec3 g = testing_support::uniform_vec(rng, -3, 3);
    const Mat3 expected = quat_to_rotation(q).matrix() *
                          testing_support::eigen_angle_axis(0.01 * g.norm(), g);
    EXPECT_LT((quat_to_rotation(quat_kinematics_step(q, g, 0.01)).matrix() - expected).norm(), 1e-9);
  }
}

TEST(QuatKinematics, EulerSchemeIsFirstOrderAccurate) {
  std::mt19937_64 rng(9);
  const UnitQuaternion q = random_quat(rng);
  const Vec3 g(0.3, -0.2, 0.5);
  for (double dt : {1e-2, 1e-3}) {
    const UnitQuaternion a = quat_kinematics_step(q, g, dt, QuatIntegrator::kExact);
    const UnitQuaternion b = quat_kinematics_step(q, g, dt, QuatIntegrator::kEuler);
    EXPECT_LT(std::min(quat_distance(a, b), quat_distance(a, -b)), g.squaredNorm() * dt * dt);
    EXPECT_NEAR(b.norm(), 1.0, 1e-12);
  }
}

TEST(QuatKinematics, NormStaysUnitOverLongRuns) {
  UnitQuaternion q;
  for (int k = 0; k < 15000; ++k) {
    const double t = k * 1e-3;
    q = quat_kinematics_step(q, Vec3(std::sin(0.7 * t), 0.7 * std::sin(0.5 * t + std::numbers::pi),
                                     0.5 * std::sin(0.3 * t + std::numbers::pi / 3)),
                             1e-3);
  }
  EXPECT_NEAR(q.norm(), 1.0, 1e-9);
}

TEST(QuatSandwich, ProducesTransposedRotationOfVector) {
  std::mt19937_64 rng(10);
  for (int n = 0; n < 100; ++n) {
    const UnitQuaternion q = random_quat(rng);
    const Vec3 v = testing_support::uniform_vec(rng, -2, 2);
    const auto [s, body] = quat_sandwich(q, v);
    EXPECT_NEAR(s, 0.0, 1e-10);
    EXPECT_LT((body - to_eigen(q).toRotationMatrix().transpose() * v).norm(), 1e-10);
  }
}

TEST(UnitQuaternionType, NormalizesAndRejectsZero) {
  const UnitQuaternion q(2.0, Vec3(0, 0, 0));
  EXPECT_EQ(q.w(), 1.0);
  EXPECT_THROW(UnitQuaternion(0.0, Vec3::Zero()), std::invalid_argument);
}
