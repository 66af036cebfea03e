#pragma once

/**
 * @file so3.hpp
 * @brief Exact SO(3) algebra: skew maps, the anti-symmetric projection,
 * the normalized Euclidean distance and the maps between rotation matrices,
 * angle-axis pairs and Rodriguez vectors.
 *
 * CONVENTIONS
 * ===========
 * A Rotation R maps body-frame coordinates to inertial-frame coordinates,
 * so a known inertial vector is observed in the body as R^T v.
 * Kinematics are body-rate: dR/dt = R [Omega]x.
 *
 * The Rodriguez (Gibbs) vector rho = tan(theta/2) * axis parameterizes every
 * rotation except those with Tr{R} = -1.
 */

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "stochso3/errors.hpp"

namespace stochso3 {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using RodriguezVector = Vec3;

namespace tol {
inline constexpr double kOrthonormality = 1e-9;
inline constexpr double kSkew = 1e-9;
inline constexpr double kUnitAxis = 1e-9;
// Guard on (Tr{R} + 1) for the inverse Rodriguez map.
inline constexpr double kRodriguezSingularity = 1e-6;
// Rotation angle below which exp_so3 switches to a Taylor expansion.
inline constexpr double kExpTaylor = 1e-8;
}  // namespace tol

/// Skew-symmetric matrix [a]x with [a]x b = a x b.
inline Mat3 hat(const Vec3& a) {
  Mat3 m;
  m << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return m;
}

/// Inverse of hat(). Throws std::invalid_argument when the input is not
/// antisymmetric within `tolerance` (max-abs of A + A^T).
inline Vec3 vex(const Mat3& a, double tolerance = tol::kSkew) {
  const double asym = (a + a.transpose()).cwiseAbs().maxCoeff();
  if (asym > tolerance) {
    std::ostringstream os;
    os << "vex: matrix is not antisymmetric (|A + A^T|_max = " << asym << ")";
    throw std::invalid_argument(os.str());
  }
  return Vec3(a(2, 1), a(0, 2), a(1, 0));
}

/// P_a(B) = (B - B^T) / 2.
inline Mat3 anti_sym_projection(const Mat3& b) { return 0.5 * (b - b.transpose()); }

/// Element of SO(3). Construction through from_matrix() checks the group
/// invariants; the unchecked path is for values produced by closed-form maps.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  static Rotation from_matrix(const Mat3& m, double tolerance = tol::kOrthonormality) {
    const double orth = (m.transpose() * m - Mat3::Identity()).norm();
    const double det = m.determinant();
    if (!(orth <= tolerance) || !(std::abs(det - 1.0) <= tolerance)) {
      std::ostringstream os;
      os << "Rotation: matrix is not in SO(3) (|M^T M - I|_F = " << orth << ", det = " << det
         << ")";
      throw std::invalid_argument(os.str());
    }
    return Rotation(m);
  }

  static Rotation from_matrix_unchecked(const Mat3& m) { return Rotation(m); }

  static Rotation identity() { return Rotation(); }

  const Mat3& matrix() const { return m_; }
  double operator()(int row, int col) const { return m_(row, col); }
  double trace() const { return m_.trace(); }

  Rotation transpose() const { return Rotation(m_.transpose()); }
  Rotation inverse() const { return transpose(); }

  Rotation operator*(const Rotation& other) const { return Rotation(m_ * other.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  /// |R^T R - I|_F.
  double orthonormality_error() const { return (m_.transpose() * m_ - Mat3::Identity()).norm(); }

 private:
  explicit Rotation(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

/// Upsilon_a(R) = vex(P_a(R)).
inline Vec3 upsilon_a(const Mat3& r) {
  const Mat3 pa = anti_sym_projection(r);
  return Vec3(pa(2, 1), pa(0, 2), pa(1, 0));
}
inline Vec3 upsilon_a(const Rotation& r) { return upsilon_a(r.matrix()); }

/// ||R||_I = Tr{I - R} / 4, in [0, 1] for R in SO(3).
inline double normalized_distance(const Mat3& r) { return 0.25 * (3.0 - r.trace()); }
inline double normalized_distance(const Rotation& r) { return normalized_distance(r.matrix()); }

inline Rotation angle_axis_to_rotation(double alpha, const Vec3& u) {
  if (std::abs(u.norm() - 1.0) > tol::kUnitAxis) {
    throw std::invalid_argument("angle_axis_to_rotation: axis is not a unit vector");
  }
  const Mat3 k = hat(u);
  return Rotation::from_matrix_unchecked(Mat3::Identity() + std::sin(alpha) * k +
                                         (1.0 - std::cos(alpha)) * k * k);
}

inline Rotation rodriguez_to_rotation(const RodriguezVector& rho) {
  const double n2 = rho.squaredNorm();
  const Mat3 m = ((1.0 - n2) * Mat3::Identity() + 2.0 * rho * rho.transpose() + 2.0 * hat(rho)) /
                 (1.0 + n2);
  return Rotation::from_matrix_unchecked(m);
}

/// Inverse Rodriguez chart, rho = Upsilon_a(R) / (2 (1 - ||R||_I)).
inline RodriguezVector rotation_to_rodriguez(const Rotation& r,
                                             double singularity = tol::kRodriguezSingularity) {
  const double trace_plus_one = r.trace() + 1.0;
  if (trace_plus_one <= singularity) {
    std::ostringstream os;
    os << "rotation_to_rodriguez: Tr{R} + 1 = " << trace_plus_one
       << " is inside the 180 degree singularity guard";
    throw SingularityError(os.str());
  }
  // 2 (1 - ||R||_I) = (Tr{R} + 1) / 2
  return upsilon_a(r) / (0.5 * trace_plus_one);
}

/// Exact rotation through |omega| dt about omega.
inline Rotation exp_so3(const Vec3& omega, double dt) {
  if (dt < 0.0) throw std::invalid_argument("exp_so3: dt must be nonnegative");
  const Vec3 phi = omega * dt;
  const double theta = phi.norm();
  double a = 0.0;  // sin(theta) / theta
  double b = 0.0;  // (1 - cos(theta)) / theta^2
  if (theta < tol::kExpTaylor) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  const Mat3 k = hat(phi);
  return Rotation::from_matrix_unchecked(Mat3::Identity() + a * k + b * k * k);
}

}  // namespace stochso3
