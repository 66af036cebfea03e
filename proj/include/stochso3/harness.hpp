#pragma once

/**
 * @file harness.hpp
 * @brief Trial execution and error statistics.
 *
 * A trial is split in two phases. synthesize_measurements() draws every
 * random quantity of one seed (true attitude, gyro samples, R_y, Q_y) into a
 * replay buffer; run_filter() then feeds that buffer to one observer. All
 * filters of a seed therefore see identical inputs.
 *
 * Error series use the true attitude error R^T R^, not the filter-internal
 * R_y^T R^.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "stochso3/errors.hpp"
#include "stochso3/filters.hpp"
#include "stochso3/quaternion.hpp"
#include "stochso3/reconstruction.hpp"
#include "stochso3/scenario.hpp"
#include "stochso3/so3.hpp"
#include "stochso3/stochastic.hpp"

namespace stochso3 {

// ---------------------------------------------------------------------------
// Euler angles (intrinsic Z-Y-X: R = Rz(psi) Ry(theta) Rx(phi))
// ---------------------------------------------------------------------------

struct EulerAngles {
  double phi = 0.0;    // roll
  double theta = 0.0;  // pitch
  double psi = 0.0;    // yaw
  bool valid = true;   // false within the gimbal-lock guard
};

namespace tol {
inline constexpr double kGimbal = 1e-9;
}

inline EulerAngles euler_angles(const Rotation& rot) {
  const Mat3& r = rot.matrix();
  EulerAngles e;
  const double cos_theta = std::hypot(r(0, 0), r(1, 0));
  e.theta = std::atan2(-r(2, 0), cos_theta);
  if (cos_theta < tol::kGimbal) {
    // Only phi - psi (or phi + psi) is observable; report it as roll.
    e.valid = false;
    e.psi = 0.0;
    e.phi = std::atan2(-r(1, 2), r(1, 1));
    return e;
  }
  e.phi = std::atan2(r(2, 1), r(2, 2));
  e.psi = std::atan2(r(1, 0), r(0, 0));
  return e;
}

inline Rotation euler_to_rotation(const EulerAngles& e) {
  return exp_so3(e.psi * Vec3::UnitZ(), 1.0) * exp_so3(e.theta * Vec3::UnitY(), 1.0) *
         exp_so3(e.phi * Vec3::UnitX(), 1.0);
}

// ---------------------------------------------------------------------------
// Measurement synthesis
// ---------------------------------------------------------------------------

struct MeasurementSample {
  double t = 0.0;
  Rotation r_true;
  Vec3 omega_true = Vec3::Zero();
  Vec3 omega_m = Vec3::Zero();
  Rotation r_y;
  UnitQuaternion q_y;
};

using MeasurementStream = std::vector<MeasurementSample>;

/// One sample per grid point (steps + 1 samples), deterministic in `seed`.
inline MeasurementStream synthesize_measurements(const Scenario& sc, std::uint64_t seed) {
  sc.validate();
  Rng rng(seed);
  const std::size_t n = sc.grid.steps();
  const double dt = sc.grid.dt();
  const std::vector<Vec3> refs = sc.measurement == MeasurementMode::kReconstructed
                                     ? reference_vectors(sc.inertial_vectors)
                                     : std::vector<Vec3>{};

  MeasurementStream out;
  out.reserve(n + 1);
  Rotation r = sc.initial_true_attitude;
  for (std::size_t k = 0; k <= n; ++k) {
    MeasurementSample m;
    m.t = sc.grid.time(k);
    m.r_true = r;
    m.omega_true = sc.omega(m.t);
    m.omega_m = measured_omega(m.omega_true, sc.noise, rng, dt);
    if (sc.measurement == MeasurementMode::kReconstructed) {
      std::vector<Vec3> body = synthesize_body_vectors(r, sc.inertial_vectors, sc.noise, rng);
      m.r_y = svd_reconstruct(VectorPairSet::equal_weights(refs, std::move(body)));
    } else {
      m.r_y = r;
    }
    m.q_y = rotation_to_quat(m.r_y);
    out.push_back(m);
    if (k < n) r = true_attitude_step(r, m.omega_true, dt);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

enum SampleFlag : unsigned {
  kRodriguezInvalid = 1u << 0,  // rho~ undefined (error within the 180 deg guard)
  kTrueGimbal = 1u << 1,
  kEstimateGimbal = 1u << 2,
};

struct SeriesSample {
  double t = 0.0;
  FilterDiagnostics diag;
  Vec3 b_hat = Vec3::Zero();
  Vec3 sigma_hat = Vec3::Zero();
  Rotation r_hat;
  EulerAngles euler_true;
  EulerAngles euler_est;
  unsigned flags = 0;
};

struct TrialSeries {
  FilterKind kind = FilterKind::kIto;
  std::uint64_t seed = 0;
  std::vector<SeriesSample> samples;
};

namespace detail {

inline SeriesSample record(const Scenario& sc, const Observer& obs, const MeasurementSample& m) {
  SeriesSample s;
  s.t = m.t;
  s.r_hat = obs.estimate();
  s.b_hat = obs.b_hat();
  s.sigma_hat = obs.sigma_hat();
  const AttitudeError e = attitude_error(m.r_true, s.r_hat);
  s.diag.err_dist = e.distance;
  s.diag.upsilon = e.upsilon;
  if (e.r_tilde.trace() + 1.0 > tol::kRodriguezSingularity) {
    s.diag.rho_err = rotation_to_rodriguez(e.r_tilde);
    s.diag.rho_valid = true;
  } else {
    s.diag.rho_err = Vec3::Constant(std::nan(""));
    s.diag.rho_valid = false;
    s.flags |= kRodriguezInvalid;
  }
  s.diag.lyapunov_v = lyapunov_v_from_distance(e.distance, sc.noise.gyro_bias - s.b_hat,
                                               sc.noise.sigma_bound() - s.sigma_hat, sc.gains,
                                               obs.lyapunov_form());
  s.euler_true = euler_angles(m.r_true);
  s.euler_est = euler_angles(s.r_hat);
  if (!s.euler_true.valid) s.flags |= kTrueGimbal;
  if (!s.euler_est.valid) s.flags |= kEstimateGimbal;
  return s;
}

template <typename E>
[[noreturn]] void rethrow_with_context(const E& err, FilterKind kind, std::size_t step) {
  std::ostringstream os;
  os << "filter " << to_string(kind) << ", step " << step << ": " << err.what();
  throw E(os.str());
}

}  // namespace detail

/// Runs one observer over a replay buffer. The series has one sample per
/// buffer entry; sample 0 is the initial estimate.
inline TrialSeries run_filter(const Scenario& sc, FilterKind kind, const MeasurementStream& stream,
                              std::uint64_t seed = 0) {
  if (stream.empty()) throw std::invalid_argument("run_filter: empty measurement stream");
  Observer obs(kind, sc.initial_estimate.rotation(), sc.initial_b_hat, sc.initial_sigma_hat,
               sc.gains, sc.guard);
  TrialSeries series{kind, seed, {}};
  series.samples.reserve(stream.size());
  series.samples.push_back(detail::record(sc, obs, stream.front()));
  const double dt = sc.grid.dt();
  for (std::size_t k = 0; k + 1 < stream.size(); ++k) {
    const MeasurementSample& m = stream[k];
    try {
      obs.step(m.omega_m, m.r_y, m.q_y, dt);
    } catch (const SingularityError& e) {
      detail::rethrow_with_context(e, kind, k);
    } catch (const DegenerateGeometryError& e) {
      detail::rethrow_with_context(e, kind, k);
    }
    series.samples.push_back(detail::record(sc, obs, stream[k + 1]));
  }
  return series;
}

inline TrialSeries run_trial(const Scenario& sc, FilterKind kind, std::uint64_t seed) {
  return run_filter(sc, kind, synthesize_measurements(sc, seed), seed);
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

inline constexpr double kConvergenceThreshold = 0.01;

struct RunMetrics {
  double mean_err_dist = 0.0;
  double std_err_dist = 0.0;  // population standard deviation over the window
  double window_start = 0.0;
  double window_end = 0.0;
  std::size_t window_samples = 0;
  double final_err_dist = 0.0;
  /// First time after which ||R~||_I stays below the threshold.
  std::optional<double> convergence_time_to_0p01;
  /// First time ||R~||_I drops below the threshold.
  std::optional<double> first_time_below_0p01;
};

inline RunMetrics compute_metrics(const TrialSeries& series, double window_start,
                                  double window_end) {
  constexpr double kTimeSlack = 1e-9;
  RunMetrics m;
  m.window_start = window_start;
  m.window_end = window_end;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : series.samples) {
    if (s.t >= window_start - kTimeSlack && s.t <= window_end + kTimeSlack) {
      sum += s.diag.err_dist;
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("compute_metrics: no samples inside the window");
  m.window_samples = n;
  m.mean_err_dist = sum / static_cast<double>(n);
  double sq = 0.0;
  for (const auto& s : series.samples) {
    if (s.t >= window_start - kTimeSlack && s.t <= window_end + kTimeSlack) {
      const double d = s.diag.err_dist - m.mean_err_dist;
      sq += d * d;
    }
  }
  m.std_err_dist = std::sqrt(sq / static_cast<double>(n));
  m.final_err_dist = series.samples.back().diag.err_dist;

  for (const auto& s : series.samples) {
    if (s.diag.err_dist < kConvergenceThreshold) {
      m.first_time_below_0p01 = s.t;
      break;
    }
  }
  // Walk backwards to find the start of the final sub-threshold run.
  std::optional<double> sustained;
  for (auto it = series.samples.rbegin(); it != series.samples.rend(); ++it) {
    if (!(it->diag.err_dist < kConvergenceThreshold)) break;
    sustained = it->t;
  }
  m.convergence_time_to_0p01 = sustained;
  return m;
}

inline RunMetrics compute_metrics(const TrialSeries& series, const Scenario& sc) {
  return compute_metrics(series, sc.metrics_window_start, sc.metrics_window_end);
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<RunMetrics> metrics;  // one per filter, in report filter order
};

struct FilterAggregate {
  FilterKind kind = FilterKind::kIto;
  double mean_of_means = 0.0;
  double median_of_means = 0.0;
  double mean_of_stds = 0.0;
  double median_of_stds = 0.0;
  std::size_t reached_0p01_by_5s = 0;
};

struct MonteCarloReport {
  std::string scenario_name;
  std::vector<FilterKind> filters;
  std::vector<SeedResult> seeds;
  std::vector<FilterAggregate> aggregates;
};

/// Receives every trial series; called from worker threads, at most once per
/// (seed, filter).
using SeriesSink = std::function<void(const TrialSeries&)>;

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::vector<FilterAggregate> aggregate(const std::vector<FilterKind>& filters,
                                              const std::vector<SeedResult>& seeds) {
  std::vector<FilterAggregate> out;
  for (std::size_t f = 0; f < filters.size(); ++f) {
    std::vector<double> means, stds;
    FilterAggregate a;
    a.kind = filters[f];
    for (const auto& s : seeds) {
      const RunMetrics& m = s.metrics[f];
      means.push_back(m.mean_err_dist);
      stds.push_back(m.std_err_dist);
      if (m.first_time_below_0p01 && *m.first_time_below_0p01 <= 5.0 + 1e-9) {
        ++a.reached_0p01_by_5s;
      }
    }
    a.mean_of_means = std::accumulate(means.begin(), means.end(), 0.0) / means.size();
    a.mean_of_stds = std::accumulate(stds.begin(), stds.end(), 0.0) / stds.size();
    a.median_of_means = median(means);
    a.median_of_stds = median(stds);
    out.push_back(a);
  }
  return out;
}

/// Runs every (seed, filter) pair. Seeds are distributed over `threads`
/// workers; results are stored by seed position, so the report does not
/// depend on scheduling.
inline MonteCarloReport run_monte_carlo(const Scenario& sc, const std::vector<FilterKind>& filters,
                                        unsigned threads = 1, const SeriesSink& sink = {}) {
  sc.validate();
  if (filters.empty()) throw std::invalid_argument("run_monte_carlo: no filters");
  MonteCarloReport report;
  report.scenario_name = sc.name;
  report.filters = filters;
  report.seeds.resize(sc.seeds.size());

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(sc.seeds.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < sc.seeds.size(); i = next++) {
      try {
        const std::uint64_t seed = sc.seeds[i];
        const MeasurementStream stream = synthesize_measurements(sc, seed);
        SeedResult r;
        r.seed = seed;
        for (FilterKind k : filters) {
          const TrialSeries series = run_filter(sc, k, stream, seed);
          r.metrics.push_back(compute_metrics(series, sc));
          if (sink) sink(series);
        }
        report.seeds[i] = std::move(r);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(sc.seeds.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  report.aggregates = aggregate(filters, report.seeds);
  return report;
}

}  // namespace stochso3
