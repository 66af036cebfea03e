#pragma once

/**
 * @file stochastic.hpp
 * @brief Ground truth and sensor synthesis: Brownian increments, gyro and
 * vector measurements, true attitude propagation and the Rodriguez-vector
 * stochastic differential equation in Ito form, with and without the
 * Wong-Zakai drift correction.
 *
 * The Rodriguez SDE is d rho = f(rho, b) dt + g(rho) Q d beta with
 *   g(rho)    = -1/2 (I + [rho]x + rho rho^T)
 *   f(rho, b) = -g(rho) (Omega_m - b).
 */

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stochso3/errors.hpp"
#include "stochso3/so3.hpp"

namespace stochso3 {

/// All randomness flows through explicitly seeded streams of this type.
using Rng = std::mt19937_64;

namespace tol {
inline constexpr double kChartEscape = 1e9;
inline constexpr double kCollinear = 1e-6;
}  // namespace tol

enum class NoiseConvention {
  kPerStep,  // fresh N(0, q^2) sample per measurement, independent of dt
  kWhite,    // omega dt = Q * dbeta, dbeta ~ N(0, dt I)
};

inline std::string to_string(NoiseConvention c) {
  return c == NoiseConvention::kPerStep ? "per-step" : "white";
}

inline NoiseConvention parse_noise_convention(const std::string& s) {
  if (s == "per-step") return NoiseConvention::kPerStep;
  if (s == "white") return NoiseConvention::kWhite;
  throw std::invalid_argument("unknown noise convention '" + s + "' (expected per-step|white)");
}

/// Additive bias and noise of one body-frame vector sensor.
struct VectorSensor {
  Vec3 bias = Vec3::Zero();
  double noise_std = 0.0;
};

struct NoiseModel {
  /// Diagonal of Q. Under kPerStep this is the per-sample standard deviation.
  Vec3 q_diag = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();
  NoiseConvention convention = NoiseConvention::kPerStep;
  std::vector<VectorSensor> sensors;

  /// Upper bound of the Q^2 diagonal (time-invariant Q).
  Vec3 sigma_bound() const { return q_diag.cwiseProduct(q_diag); }

  /// Diagonal of the Q^2 that actually drives d rho over a step of length dt.
  /// Per-step sampling at interval dt is white noise of intensity q^2 dt.
  Vec3 effective_q_squared(double dt) const {
    return convention == NoiseConvention::kPerStep ? Vec3(sigma_bound() * dt) : sigma_bound();
  }

  void validate() const {
    if ((q_diag.array() < 0.0).any()) throw std::invalid_argument("NoiseModel: q_diag must be >= 0");
    for (const auto& s : sensors) {
      if (s.noise_std < 0.0) throw std::invalid_argument("NoiseModel: sensor noise_std must be >= 0");
    }
  }
};

class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double t0, double t_end, double dt) : t0_(t0), t_end_(t_end), dt_(dt) { validate(); }

  double t0() const { return t0_; }
  double t_end() const { return t_end_; }
  double dt() const { return dt_; }

  std::size_t steps() const {
    return static_cast<std::size_t>(std::llround((t_end_ - t0_) / dt_));
  }
  /// t_k = t0 + k dt, computed without accumulation.
  double time(std::size_t k) const { return t0_ + static_cast<double>(k) * dt_; }

  void validate() const {
    if (!(dt_ > 0.0)) throw std::invalid_argument("TimeGrid: dt must be positive");
    if (!(t_end_ > t0_)) throw std::invalid_argument("TimeGrid: t_end must exceed t0");
    const double n = (t_end_ - t0_) / dt_;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n)) {
      std::ostringstream os;
      os << "TimeGrid: (t_end - t0) / dt = " << n << " is not an integer step count";
      throw std::invalid_argument(os.str());
    }
  }

 private:
  double t0_ = 0.0;
  double t_end_ = 1.0;
  double dt_ = 1e-3;
};

inline Vec3 standard_normal3(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double x = n(rng);
  const double y = n(rng);
  const double z = n(rng);
  return Vec3(x, y, z);
}

/// Three independent N(0, dt) samples.
inline Vec3 brownian_increment(Rng& rng, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("brownian_increment: dt must be positive");
  return std::sqrt(dt) * standard_normal3(rng);
}

/// Gyro noise sample omega for one measurement interval.
inline Vec3 gyro_noise(const NoiseModel& model, Rng& rng, double dt) {
  if (model.convention == NoiseConvention::kPerStep) {
    return model.q_diag.cwiseProduct(standard_normal3(rng));
  }
  return model.q_diag.cwiseProduct(brownian_increment(rng, dt)) / dt;
}

/// Omega_m = Omega + b + omega.
inline Vec3 measured_omega(const Vec3& omega_true, const NoiseModel& model, Rng& rng, double dt) {
  return omega_true + model.gyro_bias + gyro_noise(model, rng, dt);
}

inline Rotation true_attitude_step(const Rotation& r, const Vec3& omega_true, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("true_attitude_step: dt must be positive");
  return r * exp_so3(omega_true, dt);
}

/// I + [rho]x + rho rho^T, the factor shared by f, g and the correction term.
inline Mat3 rodriguez_jacobian(const RodriguezVector& rho) {
  return Mat3::Identity() + hat(rho) + rho * rho.transpose();
}

/// g(rho) = -1/2 (I + [rho]x + rho rho^T).
inline Mat3 rodriguez_diffusion(const RodriguezVector& rho) { return -0.5 * rodriguez_jacobian(rho); }

/// 1/2 (I + [rho]x + rho rho^T) omega_eff.
inline Vec3 rodriguez_drift(const RodriguezVector& rho, const Vec3& omega_eff) {
  return 0.5 * rodriguez_jacobian(rho) * omega_eff;
}

/// Closed-form Wong-Zakai term 1/4 (I + [rho]x + rho rho^T) diag(q^2) rho.
inline Vec3 wong_zakai_correction(const RodriguezVector& rho, const Vec3& q_squared_diag) {
  if ((q_squared_diag.array() < 0.0).any()) {
    throw std::invalid_argument("wong_zakai_correction: q^2 must be nonnegative");
  }
  return 0.25 * rodriguez_jacobian(rho) * q_squared_diag.cwiseProduct(rho);
}

namespace detail {
inline RodriguezVector check_chart(const RodriguezVector& rho) {
  if (!rho.allFinite() || rho.norm() > tol::kChartEscape) {
    throw ChartEscapeError("Rodriguez trajectory escaped the chart (|rho| > 1e9)");
  }
  return rho;
}

inline Vec3 noise_increment(const NoiseModel& model, Rng& rng, double dt) {
  // Q d beta, expressed so that both conventions share the same scaling as gyro_noise() * dt.
  return gyro_noise(model, rng, dt) * dt;
}
}  // namespace detail

/// Euler-Maruyama step of the Ito SDE.
inline RodriguezVector sde_step_ito(const RodriguezVector& rho, const Vec3& omega_m, const Vec3& b,
                                    const NoiseModel& model, Rng& rng, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("sde_step_ito: dt must be positive");
  const Vec3 dw = detail::noise_increment(model, rng, dt);
  const Vec3 next = rho + rodriguez_drift(rho, omega_m - b) * dt + rodriguez_diffusion(rho) * dw;
  return detail::check_chart(next);
}

/// Euler-Maruyama step of the Ito-equivalent form of the Stratonovich SDE
/// (drift carries the Wong-Zakai correction).
inline RodriguezVector sde_step_stratonovich(const RodriguezVector& rho, const Vec3& omega_m,
                                             const Vec3& b, const NoiseModel& model, Rng& rng,
                                             double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("sde_step_stratonovich: dt must be positive");
  const Vec3 dw = detail::noise_increment(model, rng, dt);
  const Vec3 drift = rodriguez_drift(rho, omega_m - b) + wong_zakai_correction(rho, model.effective_q_squared(dt));
  const Vec3 next = rho + drift * dt + rodriguez_diffusion(rho) * dw;
  return detail::check_chart(next);
}

/// Normalized reference vectors, with v1 x v2 appended when exactly two
/// sensors are configured.
inline std::vector<Vec3> reference_vectors(const std::vector<Vec3>& inertial) {
  if (inertial.size() < 2) {
    throw DegenerateGeometryError("at least two inertial vectors are required");
  }
  std::vector<Vec3> out = inertial;
  if (out.size() == 2) {
    const Vec3 c = out[0].normalized().cross(out[1].normalized());
    if (c.norm() < tol::kCollinear) {
      throw DegenerateGeometryError("inertial vectors are collinear");
    }
    out.push_back(out[0].cross(out[1]));
  }
  for (auto& v : out) v.normalize();
  return out;
}

/// v_i^B = R^T v_i^I + b_i^B + omega_i^B, augmented and normalized like
/// reference_vectors().
inline std::vector<Vec3> synthesize_body_vectors(const Rotation& r_true,
                                                 const std::vector<Vec3>& v_inertial,
                                                 const NoiseModel& model, Rng& rng) {
  if (v_inertial.size() < 2) {
    throw DegenerateGeometryError("at least two inertial vectors are required");
  }
  if (model.sensors.size() != v_inertial.size()) {
    throw std::invalid_argument("synthesize_body_vectors: one sensor model per inertial vector");
  }
  if (v_inertial.size() == 2 &&
      v_inertial[0].normalized().cross(v_inertial[1].normalized()).norm() < tol::kCollinear) {
    throw DegenerateGeometryError("inertial vectors are collinear");
  }
  const Mat3 rt = r_true.matrix().transpose();
  std::vector<Vec3> body;
  body.reserve(v_inertial.size() + 1);
  for (std::size_t i = 0; i < v_inertial.size(); ++i) {
    const auto& s = model.sensors[i];
    body.push_back(rt * v_inertial[i] + s.bias + s.noise_std * standard_normal3(rng));
  }
  if (body.size() == 2) {
    const Vec3 c = body[0].cross(body[1]);
    if (c.norm() < tol::kCollinear) {
      throw DegenerateGeometryError("measured body vectors are collinear");
    }
    body.push_back(c);
  }
  for (auto& v : body) {
    if (v.norm() == 0.0) throw DegenerateGeometryError("measured body vector vanished");
    v.normalize();
  }
  return body;
}

}  // namespace stochso3
