#pragma once

/**
 * @file reconstruction.hpp
 * @brief Static attitude determination from weighted vector pairs (Wahba's
 * problem) through the SVD of the attitude profile matrix
 * B = sum_i s_i v_i^B (v_i^I)^T.
 */

#include <Eigen/SVD>

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "stochso3/errors.hpp"
#include "stochso3/so3.hpp"

namespace stochso3 {

namespace tol {
inline constexpr double kUnitVector = 1e-9;
inline constexpr double kWeightSum = 1e-9;
inline constexpr double kRankDeficiency = 1e-9;
}  // namespace tol

struct VectorPairSet {
  std::vector<Vec3> inertial;
  std::vector<Vec3> body;
  std::vector<double> weights;

  static VectorPairSet equal_weights(std::vector<Vec3> inertial, std::vector<Vec3> body) {
    VectorPairSet set{std::move(inertial), std::move(body), {}};
    set.weights.assign(set.inertial.size(), set.inertial.empty() ? 0.0 : 1.0 / set.inertial.size());
    return set;
  }

  void validate() const {
    if (inertial.size() != body.size() || inertial.size() != weights.size()) {
      throw std::invalid_argument("VectorPairSet: inertial, body and weights must have equal length");
    }
    if (inertial.size() < 3) {
      throw DegenerateGeometryError("VectorPairSet: at least three pairs are required");
    }
    for (std::size_t i = 0; i < inertial.size(); ++i) {
      if (std::abs(inertial[i].norm() - 1.0) > tol::kUnitVector ||
          std::abs(body[i].norm() - 1.0) > tol::kUnitVector) {
        throw std::invalid_argument("VectorPairSet: vectors must be unit norm");
      }
      if (weights[i] < 0.0) throw std::invalid_argument("VectorPairSet: weights must be >= 0");
    }
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(sum - 1.0) > tol::kWeightSum) {
      throw std::invalid_argument("VectorPairSet: weights must sum to 1");
    }
  }
};

inline Mat3 attitude_profile_matrix(const VectorPairSet& set) {
  Mat3 b = Mat3::Zero();
  for (std::size_t i = 0; i < set.inertial.size(); ++i) {
    b += set.weights[i] * set.body[i] * set.inertial[i].transpose();
  }
  return b;
}

/// J(R) = 1 - sum_i s_i (v_i^B)^T R^T v_i^I.
inline double wahba_cost(const VectorPairSet& set, const Rotation& r) {
  double j = 1.0;
  for (std::size_t i = 0; i < set.inertial.size(); ++i) {
    j -= set.weights[i] * set.body[i].dot(r.matrix().transpose() * set.inertial[i]);
  }
  return j;
}

/// R_y = V+ U+^T with B = U S V^T and the last columns of U, V flipped by
/// their determinants, which keeps det(R_y) = +1.
inline Rotation svd_reconstruct(const VectorPairSet& set) {
  set.validate();
  const Mat3 b = attitude_profile_matrix(set);
  const Eigen::JacobiSVD<Mat3> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3& s = svd.singularValues();
  if (s(1) < tol::kRankDeficiency && s(2) < tol::kRankDeficiency) {
    std::ostringstream os;
    os << "svd_reconstruct: attitude profile matrix is rank deficient (singular values " << s(0)
       << ", " << s(1) << ", " << s(2) << ")";
    throw DegenerateGeometryError(os.str());
  }
  Mat3 u = svd.matrixU();
  Mat3 v = svd.matrixV();
  u.col(2) *= u.determinant();
  v.col(2) *= v.determinant();
  return Rotation::from_matrix_unchecked(v * u.transpose());
}

}  // namespace stochso3
