#pragma once

/**
 * @file quaternion.hpp
 * @brief Unit quaternions Q = [q0, q] (scalar first, Hamilton product) and
 * their maps to and from SO(3).
 *
 * The rotation of Q is R_Q = (q0^2 - |q|^2) I + 2 q q^T + 2 q0 [q]x, so that
 * R_Q(a (.) b) = R_Q(a) R_Q(b) and Q^-1 (.) [0, v] (.) Q = [0, R_Q^T v].
 * Q and -Q describe the same rotation; nothing in this library fixes the sign
 * of a propagated quaternion.
 */

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "stochso3/so3.hpp"

namespace stochso3 {

namespace tol {
inline constexpr double kUnitQuaternion = 1e-9;
// Products are renormalized once |Q| drifts further than this from 1.
inline constexpr double kQuaternionRenorm = 1e-12;
}  // namespace tol

class UnitQuaternion {
 public:
  UnitQuaternion() : w_(1.0), v_(Vec3::Zero()) {}

  /// Normalizes the input. Throws std::invalid_argument for a zero 4-vector.
  UnitQuaternion(double w, const Vec3& v) : w_(w), v_(v) {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw std::invalid_argument("UnitQuaternion: cannot normalize a zero or non-finite vector");
    }
    w_ /= n;
    v_ /= n;
  }

  static UnitQuaternion identity() { return {}; }

  /// Takes the components as given; the caller guarantees unit norm.
  static UnitQuaternion from_components_unchecked(double w, const Vec3& v) {
    UnitQuaternion q;
    q.w_ = w;
    q.v_ = v;
    return q;
  }

  double w() const { return w_; }
  const Vec3& vec() const { return v_; }
  double norm() const { return std::sqrt(w_ * w_ + v_.squaredNorm()); }

  UnitQuaternion operator-() const { return from_components_unchecked(-w_, -v_); }

  std::array<double, 4> coeffs() const { return {w_, v_.x(), v_.y(), v_.z()}; }

 private:
  double w_;
  Vec3 v_;
};

inline UnitQuaternion renormalized(double w, const Vec3& v) {
  const double n = std::sqrt(w * w + v.squaredNorm());
  if (std::abs(n - 1.0) > tol::kQuaternionRenorm) return UnitQuaternion(w, v);
  return UnitQuaternion::from_components_unchecked(w, v);
}

inline UnitQuaternion quat_product(const UnitQuaternion& a, const UnitQuaternion& b) {
  const double w = a.w() * b.w() - a.vec().dot(b.vec());
  const Vec3 v = a.w() * b.vec() + b.w() * a.vec() + a.vec().cross(b.vec());
  return renormalized(w, v);
}

inline UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) {
  return quat_product(a, b);
}

inline UnitQuaternion quat_inverse(const UnitQuaternion& a) {
  return UnitQuaternion::from_components_unchecked(a.w(), -a.vec());
}

inline Rotation quat_to_rotation(const UnitQuaternion& a) {
  const double w = a.w();
  const Vec3& q = a.vec();
  const Mat3 m = (w * w - q.squaredNorm()) * Mat3::Identity() + 2.0 * q * q.transpose() +
                 2.0 * w * hat(q);
  return Rotation::from_matrix_unchecked(m);
}

/// Largest-pivot (Shepperd) extraction; the result has q0 >= 0.
inline UnitQuaternion rotation_to_quat(const Rotation& rot) {
  const Mat3& r = rot.matrix();
  const double tr = r.trace();
  const std::array<double, 4> pivots = {tr, r(0, 0), r(1, 1), r(2, 2)};
  int best = 0;
  for (int i = 1; i < 4; ++i) {
    if (pivots[i] > pivots[best]) best = i;
  }

  double w = 0.0;
  Vec3 v;
  if (best == 0) {
    const double s = 2.0 * std::sqrt(1.0 + tr);  // 4 q0
    w = 0.25 * s;
    v = Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)) / s;
  } else if (best == 1) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));  // 4 q1
    w = (r(2, 1) - r(1, 2)) / s;
    v = Vec3(0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s);
  } else if (best == 2) {
    const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));  // 4 q2
    w = (r(0, 2) - r(2, 0)) / s;
    v = Vec3((r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s);
  } else {
    const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));  // 4 q3
    w = (r(1, 0) - r(0, 1)) / s;
    v = Vec3((r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s);
  }
  if (w < 0.0) {
    w = -w;
    v = -v;
  }
  return UnitQuaternion(w, v);
}

/// Quaternion of exp_so3(omega, dt).
inline UnitQuaternion quat_exp(const Vec3& omega, double dt) {
  const Vec3 phi = omega * dt;
  const double theta = phi.norm();
  const double half = 0.5 * theta;
  double s = 0.0;  // sin(theta / 2) / theta
  if (theta < tol::kExpTaylor) {
    s = 0.5 - theta * theta / 48.0;
  } else {
    s = std::sin(half) / theta;
  }
  return renormalized(std::cos(half), s * phi);
}

enum class QuatIntegrator {
  kExact,  // Q (.) quat_exp(Gamma, dt)
  kEuler,  // explicit Euler on dQ/dt = 1/2 Omega(Gamma) Q, then renormalize
};

/// One step of dQ/dt = 1/2 [0 -G^T; G -[G]x] Q, i.e. dQ/dt = 1/2 Q (.) [0, G].
inline UnitQuaternion quat_kinematics_step(const UnitQuaternion& q, const Vec3& gamma, double dt,
                                           QuatIntegrator scheme = QuatIntegrator::kExact) {
  if (!(dt > 0.0)) throw std::invalid_argument("quat_kinematics_step: dt must be positive");
  if (scheme == QuatIntegrator::kExact) return quat_product(q, quat_exp(gamma, dt));
  const double dw = -0.5 * gamma.dot(q.vec());
  const Vec3 dv = 0.5 * (gamma * q.w() - gamma.cross(q.vec()));
  return UnitQuaternion(q.w() + dw * dt, q.vec() + dv * dt);
}

/// Q^-1 (.) [0, v] (.) Q, returned as the full 4-vector [scalar, vector].
inline std::pair<double, Vec3> quat_sandwich(const UnitQuaternion& q, const Vec3& v) {
  const UnitQuaternion qi = quat_inverse(q);
  // [0, v] is not unit, so the product is expanded by hand.
  const double w1 = -qi.vec().dot(v);
  const Vec3 v1 = qi.w() * v + qi.vec().cross(v);
  const double w2 = w1 * q.w() - v1.dot(q.vec());
  const Vec3 v2 = w1 * q.vec() + q.w() * v1 + v1.cross(q.vec());
  return {w2, v2};
}

}  // namespace stochso3
