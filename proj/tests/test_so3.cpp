#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "stochso3/so3.hpp"
#include "test_support.hpp"

using namespace stochso3;
using testing_support::eigen_angle_axis;
using testing_support::random_rotation;
using testing_support::uniform_vec;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(Hat, ZeroVectorGivesZeroMatrix) { EXPECT_EQ(hat(Vec3::Zero()), Mat3::Zero()); }

TEST(Hat, MatchesHandWrittenLayout) {
  Mat3 expected;
  expected << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  EXPECT_EQ(hat(Vec3(1, 2, 3)), expected);
}

TEST(Hat, ActsAsCrossProduct) {
  EXPECT_EQ(hat(Vec3::UnitX()) * Vec3::UnitY(), Vec3::UnitZ());
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vec3 a = uniform_vec(rng, -10, 10), b = uniform_vec(rng, -10, 10);
    EXPECT_LT((hat(a) * b - a.cross(b)).norm(), 1e-12);
  }
}

TEST(Vex, InvertsHat) {
  Mat3 m;
  m << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  EXPECT_EQ(vex(m), Vec3(1, 2, 3));
  EXPECT_EQ(vex(Mat3::Zero()), Vec3::Zero());
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x = uniform_vec(rng, -10, 10);
    EXPECT_EQ(vex(hat(x)), x);
  }
}

TEST(Vex, RejectsNonAntisymmetricInput) {
  EXPECT_THROW(vex(Mat3::Identity()), std::invalid_argument);
  Mat3 almost = hat(Vec3(1, 2, 3));
  almost(0, 1) += 1e-10;
  EXPECT_NO_THROW(vex(almost));
}

TEST(AntiSymProjection, KillsSymmetricPartAndKeepsSkewPart) {
  EXPECT_EQ(anti_sym_projection(Mat3::Identity()), Mat3::Zero());
  EXPECT_EQ(anti_sym_projection(hat(Vec3(1, 2, 3))), hat(Vec3(1, 2, 3)));
  const Mat3 a = (Mat3() << 1, 2, 3, 4, 5, 6, 7, 8, 10).finished();
  EXPECT_LT(anti_sym_projection(a + a.transpose()).norm(), 1e-15);
}

TEST(UpsilonA, KnownValues) {
  EXPECT_EQ(upsilon_a(Rotation::identity()), Vec3::Zero());
  EXPECT_LT((upsilon_a(rodriguez_to_rotation(Vec3::UnitX())) - Vec3::UnitX()).norm(), 1e-15);
}

TEST(UpsilonA, RodriguezRelationAgainstAngleAxisOracle) {
  // rho = tan(theta / 2) u, so the oracle rotation comes from Eigen's
  // angle-axis map and the skew part is extracted by hand.
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const Vec3 rho = uniform_vec(rng, -5, 5);
    const Mat3 r = eigen_angle_axis(2.0 * std::atan(rho.norm()), rho);
    const Vec3 skew_part(0.5 * (r(2, 1) - r(1, 2)), 0.5 * (r(0, 2) - r(2, 0)),
                         0.5 * (r(1, 0) - r(0, 1)));
    const Vec3 expected = 2.0 * rho / (1.0 + rho.squaredNorm());
    EXPECT_LT((skew_part - expected).norm(), 1e-12);
    EXPECT_LT((upsilon_a(rodriguez_to_rotation(rho)) - expected).norm(), 1e-12);
  }
}

TEST(NormalizedDistance, KnownValues) {
  EXPECT_EQ(normalized_distance(Rotation::identity()), 0.0);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const Vec3 u = testing_support::unit_vec(rng);
    EXPECT_NEAR(normalized_distance(eigen_angle_axis(kPi, u)), 1.0, 1e-15);
  }
  const Mat3 r = rodriguez_to_rotation(Vec3(1, 1, 1)).matrix();
  EXPECT_NEAR(normalized_distance(r), 0.75, 1e-15);
  EXPECT_NEAR(0.25 * (3.0 - (r(0, 0) + r(1, 1) + r(2, 2))), 0.75, 1e-15);
}

TEST(AngleAxis, KnownValues) {
  EXPECT_LT((angle_axis_to_rotation(0.0, Vec3::UnitY()).matrix() - Mat3::Identity()).norm(), 1e-15);
  const Mat3 half_turn = Vec3(-1, -1, 1).asDiagonal();
  EXPECT_LT((angle_axis_to_rotation(kPi, Vec3::UnitZ()).matrix() - half_turn).norm(), 1e-15);
  // 180 deg about e3 is the limit of the Rodriguez map along rho = t e3; the
  // off-diagonal residue decays like 2/t.
  EXPECT_LT((rodriguez_to_rotation(Vec3(0, 0, 1e8)).matrix() - half_turn).norm(), 3e-8);
  EXPECT_LT((rodriguez_to_rotation(Vec3(0, 0, 1e13)).matrix() - half_turn).norm(), 1e-12);
}

TEST(AngleAxis, InitialEstimateOfReferenceScenario) {
  Mat3 printed;
  printed << -0.9429, 0.2848, 0.1729,
              0.2866, 0.4286, 0.8568,
              0.1700, 0.8574, -0.4857;
  const Rotation r = angle_axis_to_rotation(179.9 * kPi / 180.0, Vec3(1, 5, 3).normalized());
  EXPECT_LT((r.matrix() - printed).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(AngleAxis, MatchesEigenAndStaysOnGroup) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const Vec3 u = testing_support::unit_vec(rng);
    const double a = uniform_vec(rng, -kPi, kPi).x();
    const Rotation r = angle_axis_to_rotation(a, u);
    EXPECT_LT((r.matrix() - eigen_angle_axis(a, u)).norm(), 1e-14);
    EXPECT_LT(r.orthonormality_error(), 1e-9);
    EXPECT_NEAR(r.matrix().determinant(), 1.0, 1e-9);
  }
}

TEST(AngleAxis, RejectsNonUnitAxis) {
  EXPECT_THROW(angle_axis_to_rotation(0.3, Vec3(1, 1, 0)), std::invalid_argument);
}

TEST(Rodriguez, KnownValues) {
  EXPECT_EQ(rodriguez_to_rotation(Vec3::Zero()).matrix(), Mat3::Identity());
  Mat3 expected;
  expected << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  EXPECT_LT((rodriguez_to_rotation(Vec3::UnitX()).matrix() - expected).norm(), 1e-15);
  EXPECT_LT((eigen_angle_axis(2.0 * std::atan(1.0), Vec3::UnitX()) - expected).norm(), 1e-15);
}

TEST(Rodriguez, DistanceRelation) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const Vec3 rho = uniform_vec(rng, -5, 5);
    const double n2 = rho.squaredNorm();
    EXPECT_NEAR(normalized_distance(rodriguez_to_rotation(rho)), n2 / (1.0 + n2), 1e-12);
  }
}

TEST(Rodriguez, OutputIsOnGroupForLargeVectors) {
  std::mt19937_64 rng(8);
  for (double scale : {1.0, 1e2, 1e4, 1e6}) {
    for (int i = 0; i < 20; ++i) {
      const Rotation r = rodriguez_to_rotation(scale * testing_support::unit_vec(rng));
      EXPECT_LT(r.orthonormality_error(), 1e-9);
      EXPECT_NEAR(r.matrix().determinant(), 1.0, 1e-9);
    }
  }
}

TEST(Rodriguez, InverseRoundTrip) {
  EXPECT_EQ(rotation_to_rodriguez(Rotation::identity()), Vec3::Zero());
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    Vec3 rho = uniform_vec(rng, -50, 50);
    if (rho.norm() > 50) rho *= 50 / rho.norm();
    const Vec3 back = rotation_to_rodriguez(rodriguez_to_rotation(rho));
    EXPECT_LT((back - rho).norm(), 1e-10)
        << "rho = " << rho.transpose();
  }
  for (int i = 0; i < 100; ++i) {
    const Rotation r = random_rotation(rng);
    if (r.trace() + 1.0 < 1e-3) continue;
    EXPECT_LT((rodriguez_to_rotation(rotation_to_rodriguez(r)).matrix() - r.matrix()).norm(), 1e-9);
  }
}

TEST(Rodriguez, InverseThrowsNearHalfTurn) {
  EXPECT_THROW(rotation_to_rodriguez(angle_axis_to_rotation(kPi - 1e-8, Vec3::UnitX())),
               SingularityError);
}

TEST(ExpSO3, KnownValues) {
  EXPECT_EQ(exp_so3(Vec3::Zero(), 0.7).matrix(), Mat3::Identity());
  const Mat3 half_turn = Vec3(-1, -1, 1).asDiagonal();
  EXPECT_LT((exp_so3(Vec3(0, 0, kPi), 1.0).matrix() - half_turn).norm(), 1e-12);
  EXPECT_THROW(exp_so3(Vec3::UnitX(), -1.0), std::invalid_argument);
}

TEST(ExpSO3, OrthogonalAndMatchesEigen) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 100; ++i) {
    const Vec3 w = uniform_vec(rng, -5, 5);
    const Rotation r = exp_so3(w, 0.3);
    EXPECT_LT(r.orthonormality_error(), 1e-12);
    EXPECT_LT((r.matrix() - eigen_angle_axis(0.3 * w.norm(), w)).norm(), 1e-13);
  }
}

TEST(ExpSO3, TaylorBranchIsContinuous) {
  const Vec3 w(1e-9, -2e-9, 3e-9);
  const Rotation small = exp_so3(w, 1.0);
  EXPECT_LT((small.matrix() - (Mat3::Identity() + hat(w))).norm(), 1e-17);
  const Rotation just_above = exp_so3(Vec3(2e-8, 0, 0), 1.0);
  EXPECT_LT((just_above.matrix() - (Mat3::Identity() + hat(Vec3(2e-8, 0, 0)))).norm(), 1e-15);
}

TEST(Identities, SkewProductAndConjugation) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a = uniform_vec(rng, -1, 1), b = uniform_vec(rng, -1, 1);
    const Mat3 lhs = -hat(b) * hat(a);
    const Mat3 rhs = b.dot(a) * Mat3::Identity() - a * b.transpose();
    EXPECT_LT((lhs - rhs).norm(), 1e-12);
    const Mat3 r = testing_support::random_rotation_matrix(rng);
    EXPECT_LT((hat(r * a) - r * hat(a) * r.transpose()).norm(), 1e-12);
  }
}

TEST(RotationType, FromMatrixChecksInvariants) {
  EXPECT_THROW(Rotation::from_matrix(2.0 * Mat3::Identity()), std::invalid_argument);
  EXPECT_THROW(Rotation::from_matrix(Vec3(1, 1, -1).asDiagonal()), std::invalid_argument);
  EXPECT_NO_THROW(Rotation::from_matrix(Mat3::Identity()));
}
