#pragma once

/**
 * @file selftest.hpp
 * @brief Fast property checks behind `stochso3 selftest`.
 *
 * Each check draws its own seeded random inputs and compares a library
 * routine with a second, independently assembled computation.
 */

#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stochso3/filters.hpp"
#include "stochso3/harness.hpp"
#include "stochso3/quaternion.hpp"
#include "stochso3/reconstruction.hpp"
#include "stochso3/scenario.hpp"
#include "stochso3/so3.hpp"
#include "stochso3/stochastic.hpp"

namespace stochso3 {

struct SelfTestResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace selftest_detail {

inline Vec3 uniform3(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  const double x = u(rng), y = u(rng), z = u(rng);
  return Vec3(x, y, z);
}

inline Rotation random_rotation(Rng& rng) {
  // Uniform on SO(3) via a normalized Gaussian quaternion.
  std::normal_distribution<double> n(0.0, 1.0);
  const double w = n(rng), x = n(rng), y = n(rng), z = n(rng);
  return quat_to_rotation(UnitQuaternion(w, Vec3(x, y, z)));
}

/// sum_k sum_j (q_j^2 / 2) g_kj dg_ij/drho_k with dg/drho_k by central
/// differences of step h.
inline Vec3 wong_zakai_fd(const Vec3& rho, const Vec3& q2, double h = 1e-5) {
  const Mat3 g = rodriguez_diffusion(rho);
  Vec3 out = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    Vec3 dp = rho, dm = rho;
    dp(k) += h;
    dm(k) -= h;
    const Mat3 dg = (rodriguez_diffusion(dp) - rodriguez_diffusion(dm)) / (2.0 * h);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) out(i) += 0.5 * q2(j) * g(k, j) * dg(i, j);
    }
  }
  return out;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

inline SelfTestResult check(const std::string& name, double worst, double bound) {
  return {name, worst < bound, "max error " + fmt(worst) + " (bound " + fmt(bound) + ")"};
}

}  // namespace selftest_detail

inline std::vector<SelfTestResult> run_selftests(std::uint64_t seed = 7) {
  using namespace selftest_detail;
  std::vector<SelfTestResult> out;
  Rng rng(seed);

  {
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
      const Vec3 a = uniform3(rng, -10, 10), b = uniform3(rng, -10, 10);
      const Rotation r = random_rotation(rng);
      worst = std::max(worst, (hat(a) * b - a.cross(b)).norm());
      worst = std::max(worst, (-hat(b) * hat(a) - (b.dot(a) * Mat3::Identity() - a * b.transpose())).norm());
      worst = std::max(worst, (hat(r * a) - r.matrix() * hat(a) * r.matrix().transpose()).norm() / 10.0);
    }
    out.push_back(check("skew-map identities", worst, 1e-12));
  }
  {
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
      const Vec3 rho = uniform3(rng, -3, 3);
      const double s = rho.squaredNorm();
      const Rotation r = rodriguez_to_rotation(rho);
      worst = std::max(worst, std::abs(normalized_distance(r) - s / (1.0 + s)));
      worst = std::max(worst, (upsilon_a(r) - 2.0 * rho / (1.0 + s)).norm());
    }
    out.push_back(check("Rodriguez distance and Upsilon relations", worst, 1e-12));
  }
  {
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
      Vec3 rho = uniform3(rng, -10, 10);
      if (rho.norm() > 10.0) rho *= 10.0 / rho.norm();
      const Vec3 q2 = uniform3(rng, 0, 1);
      worst = std::max(worst, (wong_zakai_correction(rho, q2) - wong_zakai_fd(rho, q2)).norm());
    }
    out.push_back(check("Wong-Zakai term vs finite differences", worst, 1e-6));
  }
  {
    double worst = 0.0;
    double worst_det = 0.0;
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int n = 0; n < 1000; ++n) {
      const Rotation r = random_rotation(rng);
      std::vector<Vec3> vi, vb;
      for (int i = 0; i < 3; ++i) {
        vi.push_back(uniform3(rng, -1, 1).normalized());
        vb.push_back(r.transpose() * vi.back());
      }
      worst = std::max(worst, (svd_reconstruct(VectorPairSet::equal_weights(vi, vb)).matrix() -
                               r.matrix()).norm());
      for (auto& v : vb) v = (v + 0.5 * Vec3(n01(rng), n01(rng), n01(rng))).normalized();
      worst_det = std::max(worst_det, std::abs(svd_reconstruct(VectorPairSet::equal_weights(vi, vb))
                                                   .matrix().determinant() - 1.0));
    }
    out.push_back(check("SVD reconstruction, noise-free", worst, 1e-9));
    out.push_back(check("SVD reconstruction, det = +1 on noisy input", worst_det, 1e-9));
  }
  {
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
      const Rotation a = random_rotation(rng), b = random_rotation(rng);
      const UnitQuaternion qa = rotation_to_quat(a), qb = rotation_to_quat(b);
      worst = std::max(worst, (quat_to_rotation(qa * qb).matrix() - a.matrix() * b.matrix()).norm());
    }
    out.push_back(check("quaternion product homomorphism", worst, 1e-10));
  }
  {
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
      const Rotation r = random_rotation(rng);
      worst = std::max(worst, (euler_to_rotation(euler_angles(r)).matrix() - r.matrix()).norm());
    }
    out.push_back(check("Euler angle round trip", worst, 1e-9));
  }
  {
    Rotation r = Rotation::identity();
    const Scenario sc = paper_sv_scenario();
    for (std::size_t k = 0; k < 15000; ++k) r = true_attitude_step(r, sc.omega(k * 1e-3), 1e-3);
    out.push_back(check("orthonormality after 15000 steps", r.orthonormality_error(), 1e-9));
  }
  {
    Scenario sc = paper_sv_scenario();
    sc.grid = TimeGrid(0.0, 2.0, 1e-3);
    sc.metrics_window_end = 2.0;
    const MeasurementStream stream = synthesize_measurements(sc, seed);
    double worst = 0.0;
    for (auto [m, q] : {std::pair{FilterKind::kIto, FilterKind::kItoQuat},
                        std::pair{FilterKind::kStratonovich, FilterKind::kStratonovichQuat}}) {
      const TrialSeries a = run_filter(sc, m, stream), b = run_filter(sc, q, stream);
      for (std::size_t k = 0; k < a.samples.size(); ++k) {
        worst = std::max(worst, (a.samples[k].r_hat.matrix() - b.samples[k].r_hat.matrix()).norm());
      }
    }
    out.push_back(check("matrix/quaternion filter agreement (2 s)", worst, 1e-6));

    const TrialSeries x = run_trial(sc, FilterKind::kStratonovich, seed);
    const TrialSeries y = run_trial(sc, FilterKind::kStratonovich, seed);
    bool same = x.samples.size() == y.samples.size();
    for (std::size_t k = 0; same && k < x.samples.size(); ++k) {
      same = x.samples[k].r_hat.matrix() == y.samples[k].r_hat.matrix() &&
             x.samples[k].sigma_hat == y.samples[k].sigma_hat;
    }
    out.push_back({"seed determinism", same, same ? "bit-identical" : "outputs differ"});
  }
  return out;
}

}  // namespace stochso3
