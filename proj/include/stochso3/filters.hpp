#pragma once

/**
 * @file filters.hpp
 * @brief Attitude observers on SO(3) driven by a gyro measurement Omega_m and
 * a reconstructed attitude R_y:
 *
 *  - the deterministic passive complementary filter,
 *  - the stochastic filter derived in the Ito sense,
 *  - the stochastic filter derived in the Stratonovich sense,
 *  - quaternion forms of both stochastic filters.
 *
 * All filters share the error R~ = R_y^T R^, its correction direction
 * Upsilon_a(R~) and distance ||R~||_I. Every step evaluates the right-hand
 * sides at the pre-step state, advances R^ (or Q^) with the exact
 * exponential of the corrected rate, and advances b^ and sigma^ with one
 * explicit Euler stage.
 *
 * Near ||R~||_I = 1 the stochastic gains divide by 1 - ||R~||_I (q~0^2 in
 * quaternion form). By default that denominator saturates at the guard
 * value; GuardPolicy::kThrow turns it into a SingularityError instead.
 */

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stochso3/errors.hpp"
#include "stochso3/quaternion.hpp"
#include "stochso3/so3.hpp"

namespace stochso3 {

namespace tol {
// Guard on 1 - ||R~||_I (equivalently q~0^2).
inline constexpr double kFilterGuard = 1e-6;
}  // namespace tol

struct FilterGains {
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  double k1 = 0.5;
  double k2 = 0.5;
  double kb = 0.5;
  double ksigma = 0.5;
  double epsilon = 0.5;

  void validate() const {
    for (double g : {gamma1, gamma2, k1, k2, kb, ksigma, epsilon}) {
      if (!(g > 0.0)) throw std::invalid_argument("FilterGains: all gains must be positive");
    }
  }

  /// Messages for each gain outside the set covered by the stability result
  /// (gamma1, gamma2 >= 1, k1 >= 9/32, k2 >= 1/8). Empty when inside it.
  std::vector<std::string> stability_warnings() const {
    std::vector<std::string> w;
    if (gamma1 < 1.0) w.emplace_back("gamma1 < 1");
    if (gamma2 < 1.0) w.emplace_back("gamma2 < 1");
    if (k1 < 9.0 / 32.0) w.emplace_back("k1 < 9/32");
    if (k2 < 1.0 / 8.0) w.emplace_back("k2 < 1/8");
    return w;
  }
};

enum class GuardPolicy { kSaturate, kThrow };

struct GuardOptions {
  double guard = tol::kFilterGuard;
  GuardPolicy policy = GuardPolicy::kSaturate;
};

struct FilterState {
  Rotation r_hat;
  Vec3 b_hat = Vec3::Zero();
  Vec3 sigma_hat = Vec3::Zero();  // not clamped; leakage keeps it bounded
};

struct QuatFilterState {
  UnitQuaternion q_hat;
  Vec3 b_hat = Vec3::Zero();
  Vec3 sigma_hat = Vec3::Zero();
};

/// Right-hand sides of one filter evaluation.
struct FilterRates {
  Vec3 rate = Vec3::Zero();        // angular rate that propagates the estimate
  Vec3 correction = Vec3::Zero();  // W
  Vec3 b_hat_dot = Vec3::Zero();
  Vec3 sigma_hat_dot = Vec3::Zero();
};

struct AttitudeError {
  Rotation r_tilde;
  Vec3 upsilon = Vec3::Zero();
  double distance = 0.0;
};

struct FilterDiagnostics {
  double err_dist = 0.0;
  Vec3 upsilon = Vec3::Zero();
  Vec3 rho_err = Vec3::Zero();
  bool rho_valid = true;
  double lyapunov_v = 0.0;
};

inline AttitudeError attitude_error(const Rotation& r_y, const Rotation& r_hat) {
  const Rotation r_tilde = r_y.transpose() * r_hat;
  return {r_tilde, upsilon_a(r_tilde), normalized_distance(r_tilde)};
}

enum class LyapunovForm {
  kDeterministic,  // ||rho~||^2 / (1 + ||rho~||^2) + b~^T b~ / (2 gamma1)
  kStochastic,     // (||rho~||^2 / (1 + ||rho~||^2))^2 + b~^T b~ / (2 gamma1) + s~^T s~ / (2 gamma2)
};

/// Potential function in terms of the attitude distance d = ||R~||_I, which
/// equals ||rho~||^2 / (1 + ||rho~||^2) and stays defined at 180 degrees.
inline double lyapunov_v_from_distance(double distance, const Vec3& b_err, const Vec3& sigma_err,
                                       const FilterGains& gains, LyapunovForm form) {
  if (form == LyapunovForm::kDeterministic) {
    return distance + b_err.squaredNorm() / (2.0 * gains.gamma1);
  }
  return distance * distance + b_err.squaredNorm() / (2.0 * gains.gamma1) +
         sigma_err.squaredNorm() / (2.0 * gains.gamma2);
}

inline double lyapunov_v(const Vec3& rho_err, const Vec3& b_err, const Vec3& sigma_err,
                         const FilterGains& gains, LyapunovForm form = LyapunovForm::kStochastic) {
  const double n2 = rho_err.squaredNorm();
  return lyapunov_v_from_distance(n2 / (1.0 + n2), b_err, sigma_err, gains, form);
}

namespace detail {

/// Guarded value of a denominator that must stay >= guard.
inline double guarded(double denom, const GuardOptions& opt, const char* who) {
  if (denom >= opt.guard) return denom;
  if (opt.policy == GuardPolicy::kThrow) {
    std::ostringstream os;
    os << who << ": attitude error is within " << opt.guard
       << " of the 180 degree singularity (denominator " << denom << ")";
    throw SingularityError(os.str());
  }
  return opt.guard;
}

inline void check_dt(double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("filter step: dt must be positive");
}

inline FilterState advance(const FilterState& s, const FilterRates& r, double dt) {
  return {s.r_hat * exp_so3(r.rate, dt), s.b_hat + r.b_hat_dot * dt,
          s.sigma_hat + r.sigma_hat_dot * dt};
}

inline QuatFilterState advance(const QuatFilterState& s, const FilterRates& r, double dt) {
  return {quat_kinematics_step(s.q_hat, r.rate, dt), s.b_hat + r.b_hat_dot * dt,
          s.sigma_hat + r.sigma_hat_dot * dt};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Matrix forms
// ---------------------------------------------------------------------------

inline FilterRates det_filter_rates(const FilterState& s, const Vec3& omega_m, const Rotation& r_y,
                                    const FilterGains& g) {
  const Vec3 ups = attitude_error(r_y, s.r_hat).upsilon;
  FilterRates out;
  out.correction = g.k1 * ups;
  out.b_hat_dot = g.gamma1 * ups;
  out.rate = omega_m - s.b_hat - out.correction;
  return out;
}

namespace detail {

// Terms shared by both stochastic matrix filters.
struct StochasticTerms {
  Vec3 upsilon;
  double distance;
  double one_minus;  // guarded 1 - ||R~||_I
  FilterRates rates;
};

inline StochasticTerms ito_terms(const FilterState& s, const Vec3& omega_m, const Rotation& r_y,
                                 const FilterGains& g, const GuardOptions& opt, const char* who) {
  const AttitudeError e = attitude_error(r_y, s.r_hat);
  const double one_minus = guarded(1.0 - e.distance, opt, who);
  const Vec3& ups = e.upsilon;
  const double d = e.distance;

  // D_Upsilon = [ups, ups, ups]: D sigma = ups * sum(sigma), D^T ups = |ups|^2 * 1.
  const Vec3 d_sigma = ups * s.sigma_hat.sum();
  const Vec3 dt_ups = Vec3::Constant(ups.squaredNorm());

  FilterRates r;
  r.correction = (g.k1 / g.epsilon) * ((1.0 + one_minus) / one_minus) * ups + g.k2 * d_sigma;
  r.b_hat_dot = g.gamma1 * d * ups - g.gamma1 * g.kb * s.b_hat;
  r.sigma_hat_dot = g.k1 * g.gamma2 * d * dt_ups - g.gamma2 * g.ksigma * s.sigma_hat;
  r.rate = omega_m - s.b_hat - r.correction;
  return {ups, d, one_minus, r};
}

}  // namespace detail

inline FilterRates ito_filter_rates(const FilterState& s, const Vec3& omega_m, const Rotation& r_y,
                                    const FilterGains& g, const GuardOptions& opt = {}) {
  return detail::ito_terms(s, omega_m, r_y, g, opt, "ito_filter_step").rates;
}

inline FilterRates strat_filter_rates(const FilterState& s, const Vec3& omega_m,
                                      const Rotation& r_y, const FilterGains& g,
                                      const GuardOptions& opt = {}) {
  auto t = detail::ito_terms(s, omega_m, r_y, g, opt, "strat_filter_step");
  // 1/2 diag(ups) / (1 - ||R~||_I)
  const Vec3 half_diag = 0.5 * t.upsilon / t.one_minus;
  t.rates.rate -= half_diag.cwiseProduct(s.sigma_hat);
  t.rates.sigma_hat_dot += g.gamma2 * t.distance * half_diag.cwiseProduct(t.upsilon);
  return t.rates;
}

inline FilterState det_filter_step(const FilterState& s, const Vec3& omega_m, const Rotation& r_y,
                                   const FilterGains& g, double dt) {
  detail::check_dt(dt);
  FilterState next = detail::advance(s, det_filter_rates(s, omega_m, r_y, g), dt);
  next.sigma_hat = s.sigma_hat;
  return next;
}

inline FilterState ito_filter_step(const FilterState& s, const Vec3& omega_m, const Rotation& r_y,
                                   const FilterGains& g, double dt, const GuardOptions& opt = {}) {
  detail::check_dt(dt);
  return detail::advance(s, ito_filter_rates(s, omega_m, r_y, g, opt), dt);
}

inline FilterState strat_filter_step(const FilterState& s, const Vec3& omega_m,
                                     const Rotation& r_y, const FilterGains& g, double dt,
                                     const GuardOptions& opt = {}) {
  detail::check_dt(dt);
  return detail::advance(s, strat_filter_rates(s, omega_m, r_y, g, opt), dt);
}

// ---------------------------------------------------------------------------
// Quaternion forms
// ---------------------------------------------------------------------------

namespace detail {

struct QuatTerms {
  double q0;
  Vec3 q;
  double q0_sq_guarded;
  FilterRates rates;
};

inline QuatTerms ito_quat_terms(const QuatFilterState& s, const Vec3& omega_m,
                                const UnitQuaternion& q_y, const FilterGains& g,
                                const GuardOptions& opt, const char* who) {
  const UnitQuaternion qt = quat_product(quat_inverse(q_y), s.q_hat);
  const double q0 = qt.w();
  const Vec3& q = qt.vec();
  const double q0_sq = q0 * q0;
  const double s_guard = guarded(q0_sq, opt, who);
  const double one_minus_q0_sq = 1.0 - q0_sq;

  // D_Upsilon = 2 q0 [q, q, q].
  const Vec3 d_sigma = 2.0 * q0 * q * s.sigma_hat.sum();
  const Vec3 dt_q0q = Vec3::Constant(2.0 * q0 * q.dot(q0 * q));

  FilterRates r;
  // (1 + q0^2) / q0 written as (1 + q0^2) q0 / q0^2 so the guard applies to q0^2.
  r.correction = (2.0 * g.k1 / g.epsilon) * ((1.0 + s_guard) * q0 / s_guard) * q + g.k2 * d_sigma;
  r.b_hat_dot = 2.0 * g.gamma1 * one_minus_q0_sq * q0 * q - g.gamma1 * g.kb * s.b_hat;
  r.sigma_hat_dot =
      2.0 * g.k1 * g.gamma2 * one_minus_q0_sq * dt_q0q - g.gamma2 * g.ksigma * s.sigma_hat;
  r.rate = omega_m - s.b_hat - r.correction;
  return {q0, q, s_guard, r};
}

}  // namespace detail

inline FilterRates ito_filter_rates_quat(const QuatFilterState& s, const Vec3& omega_m,
                                         const UnitQuaternion& q_y, const FilterGains& g,
                                         const GuardOptions& opt = {}) {
  return detail::ito_quat_terms(s, omega_m, q_y, g, opt, "ito_filter_step_quat").rates;
}

inline FilterRates strat_filter_rates_quat(const QuatFilterState& s, const Vec3& omega_m,
                                           const UnitQuaternion& q_y, const FilterGains& g,
                                           const GuardOptions& opt = {}) {
  auto t = detail::ito_quat_terms(s, omega_m, q_y, g, opt, "strat_filter_step_quat");
  // diag(q) / q0, guarded on q0^2.
  const Vec3 diag_over_q0 = t.q * (t.q0 / t.q0_sq_guarded);
  t.rates.rate -= diag_over_q0.cwiseProduct(s.sigma_hat);
  // 2 gamma2 (1 - q0^2) diag(q) q; the factor q0^2 / guarded(q0^2) is 1 away
  // from the guard and mirrors the saturated matrix form inside it.
  t.rates.sigma_hat_dot += 2.0 * g.gamma2 * (1.0 - t.q0 * t.q0) *
                           (t.q0 * t.q0 / t.q0_sq_guarded) * t.q.cwiseProduct(t.q);
  return t.rates;
}

inline QuatFilterState ito_filter_step_quat(const QuatFilterState& s, const Vec3& omega_m,
                                            const UnitQuaternion& q_y, const FilterGains& g,
                                            double dt, const GuardOptions& opt = {}) {
  detail::check_dt(dt);
  return detail::advance(s, ito_filter_rates_quat(s, omega_m, q_y, g, opt), dt);
}

inline QuatFilterState strat_filter_step_quat(const QuatFilterState& s, const Vec3& omega_m,
                                              const UnitQuaternion& q_y, const FilterGains& g,
                                              double dt, const GuardOptions& opt = {}) {
  detail::check_dt(dt);
  return detail::advance(s, strat_filter_rates_quat(s, omega_m, q_y, g, opt), dt);
}

// ---------------------------------------------------------------------------
// Uniform interface
// ---------------------------------------------------------------------------

enum class FilterKind { kDeterministic, kIto, kStratonovich, kItoQuat, kStratonovichQuat };

inline const std::vector<FilterKind>& all_filter_kinds() {
  static const std::vector<FilterKind> kinds = {FilterKind::kDeterministic, FilterKind::kIto,
                                                FilterKind::kStratonovich, FilterKind::kItoQuat,
                                                FilterKind::kStratonovichQuat};
  return kinds;
}

inline std::string to_string(FilterKind k) {
  switch (k) {
    case FilterKind::kDeterministic: return "det";
    case FilterKind::kIto: return "ito";
    case FilterKind::kStratonovich: return "strat";
    case FilterKind::kItoQuat: return "ito-quat";
    case FilterKind::kStratonovichQuat: return "strat-quat";
  }
  return "?";
}

inline FilterKind parse_filter_kind(const std::string& s) {
  for (FilterKind k : all_filter_kinds()) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown filter '" + s + "' (expected det|ito|strat|ito-quat|strat-quat)");
}

inline bool is_quaternion(FilterKind k) {
  return k == FilterKind::kItoQuat || k == FilterKind::kStratonovichQuat;
}

/// Any of the five observers behind one step() call.
class Observer {
 public:
  Observer(FilterKind kind, const Rotation& r_hat0, const Vec3& b_hat0, const Vec3& sigma_hat0,
           const FilterGains& gains, GuardOptions guard = {})
      : kind_(kind), gains_(gains), guard_(guard) {
    gains_.validate();
    mat_ = {r_hat0, b_hat0, sigma_hat0};
    quat_ = {rotation_to_quat(r_hat0), b_hat0, sigma_hat0};
  }

  FilterKind kind() const { return kind_; }

  void step(const Vec3& omega_m, const Rotation& r_y, const UnitQuaternion& q_y, double dt) {
    switch (kind_) {
      case FilterKind::kDeterministic:
        mat_ = det_filter_step(mat_, omega_m, r_y, gains_, dt);
        break;
      case FilterKind::kIto:
        mat_ = ito_filter_step(mat_, omega_m, r_y, gains_, dt, guard_);
        break;
      case FilterKind::kStratonovich:
        mat_ = strat_filter_step(mat_, omega_m, r_y, gains_, dt, guard_);
        break;
      case FilterKind::kItoQuat:
        quat_ = ito_filter_step_quat(quat_, omega_m, q_y, gains_, dt, guard_);
        break;
      case FilterKind::kStratonovichQuat:
        quat_ = strat_filter_step_quat(quat_, omega_m, q_y, gains_, dt, guard_);
        break;
    }
  }

  Rotation estimate() const { return is_quaternion(kind_) ? quat_to_rotation(quat_.q_hat) : mat_.r_hat; }
  const Vec3& b_hat() const { return is_quaternion(kind_) ? quat_.b_hat : mat_.b_hat; }
  const Vec3& sigma_hat() const { return is_quaternion(kind_) ? quat_.sigma_hat : mat_.sigma_hat; }

  LyapunovForm lyapunov_form() const {
    return kind_ == FilterKind::kDeterministic ? LyapunovForm::kDeterministic
                                               : LyapunovForm::kStochastic;
  }

 private:
  FilterKind kind_;
  FilterGains gains_;
  GuardOptions guard_;
  FilterState mat_;
  QuatFilterState quat_;
};

}  // namespace stochso3
