#pragma once

/**
 * @file io.hpp
 * @brief CSV time series, key=value summary reports and JSON scenario files.
 *
 * Scenario file schema (every key optional; unknown keys are rejected):
 *
 *   {
 *     "preset": "paper-sV",              // base scenario, default paper-sV
 *     "name": "my-run",
 *     "t0": 0, "t_end": 15, "dt": 0.001,
 *     "omega": {"amplitude": [..], "frequency": [..], "phase": [..]},
 *     "noise": {"q_diag": [..], "gyro_bias": [..], "convention": "per-step",
 *               "sensors": [{"bias": [..], "noise_std": 0.15}, ...]},
 *     "inertial_vectors": [[..], [..]],
 *     "measurement": "reconstructed" | "exact",
 *     "initial_true_attitude": {"angle_deg": 0, "axis": [0, 0, 1]},
 *     "initial_estimate": {"angle_deg": 179.9, "axis": [1, 5, 3]},
 *     "initial_b_hat": [..], "initial_sigma_hat": [..],
 *     "gains": {"gamma1": 1, "gamma2": 1, "k1": .5, "k2": .5, "kb": .5,
 *               "ksigma": .5, "epsilon": .5},
 *     "guard": {"epsilon": 1e-6, "policy": "saturate" | "throw"},
 *     "filters": ["ito", "strat"],
 *     "seeds": "0..19" | [0, 1, 2],
 *     "metrics_window": [1, 15]
 *   }
 */

#include <Eigen/Geometry>

#include <array>
#include <charconv>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "stochso3/harness.hpp"
#include "stochso3/scenario.hpp"

namespace stochso3 {

/// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 17);
  if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf.data(), res.ptr);
}

inline constexpr const char* kCsvHeader =
    "t,err_dist,rho_err_x,rho_err_y,rho_err_z,bhat_x,bhat_y,bhat_z,"
    "sigmahat_x,sigmahat_y,sigmahat_z,phi_true,theta_true,psi_true,"
    "phi_est,theta_est,psi_est,validity_flag";

/// Writes every `stride`-th sample; the last sample is always written.
inline void write_series_csv(std::ostream& os, const TrialSeries& series, std::size_t stride = 1) {
  if (stride == 0) throw std::invalid_argument("write_series_csv: stride must be positive");
  os << kCsvHeader << '\n';
  const auto& s = series.samples;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k % stride != 0 && k + 1 != s.size()) continue;
    const SeriesSample& x = s[k];
    const double row[] = {x.t,
                          x.diag.err_dist,
                          x.diag.rho_err.x(),
                          x.diag.rho_err.y(),
                          x.diag.rho_err.z(),
                          x.b_hat.x(),
                          x.b_hat.y(),
                          x.b_hat.z(),
                          x.sigma_hat.x(),
                          x.sigma_hat.y(),
                          x.sigma_hat.z(),
                          x.euler_true.phi,
                          x.euler_true.theta,
                          x.euler_true.psi,
                          x.euler_est.phi,
                          x.euler_est.theta,
                          x.euler_est.psi};
    for (double v : row) os << format_double(v) << ',';
    os << x.flags << '\n';
  }
}

inline void write_series_csv(const std::string& path, const TrialSeries& series,
                             std::size_t stride = 1) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_series_csv(f, series, stride);
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Summary report
// ---------------------------------------------------------------------------

namespace detail {
inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("none");
}

inline std::string join_filters(const std::vector<FilterKind>& filters) {
  std::string out;
  for (std::size_t i = 0; i < filters.size(); ++i) {
    if (i) out += ',';
    out += to_string(filters[i]);
  }
  return out;
}
}  // namespace detail

/// key=value lines. Per-seed comparisons are taken against the first filter.
inline void write_summary(std::ostream& os, const Scenario& sc, const MonteCarloReport& rep) {
  os << "scenario=" << sc.name << '\n'
     << "noise_convention=" << to_string(sc.noise.convention) << '\n'
     << "t0=" << format_double(sc.grid.t0()) << '\n'
     << "t_end=" << format_double(sc.grid.t_end()) << '\n'
     << "dt=" << format_double(sc.grid.dt()) << '\n'
     << "window_start=" << format_double(sc.metrics_window_start) << '\n'
     << "window_end=" << format_double(sc.metrics_window_end) << '\n'
     << "filters=" << detail::join_filters(rep.filters) << '\n'
     << "seed_count=" << rep.seeds.size() << '\n';

  for (const auto& a : rep.aggregates) {
    const std::string p = "filter." + to_string(a.kind) + '.';
    os << p << "mean_of_mean_err_dist=" << format_double(a.mean_of_means) << '\n'
       << p << "median_of_mean_err_dist=" << format_double(a.median_of_means) << '\n'
       << p << "mean_of_std_err_dist=" << format_double(a.mean_of_stds) << '\n'
       << p << "median_of_std_err_dist=" << format_double(a.median_of_stds) << '\n'
       << p << "seeds_below_0p01_by_5s=" << a.reached_0p01_by_5s << '\n';
  }

  for (const auto& s : rep.seeds) {
    for (std::size_t f = 0; f < rep.filters.size(); ++f) {
      const RunMetrics& m = s.metrics[f];
      const std::string p = "seed." + std::to_string(s.seed) + '.' + to_string(rep.filters[f]) + '.';
      os << p << "mean_err_dist=" << format_double(m.mean_err_dist) << '\n'
         << p << "std_err_dist=" << format_double(m.std_err_dist) << '\n'
         << p << "final_err_dist=" << format_double(m.final_err_dist) << '\n'
         << p << "convergence_time_to_0p01=" << detail::format_optional(m.convergence_time_to_0p01)
         << '\n'
         << p << "first_time_below_0p01=" << detail::format_optional(m.first_time_below_0p01)
         << '\n';
    }
  }

  // Paired comparison: same noise stream, filter f against the first filter.
  for (std::size_t f = 1; f < rep.filters.size(); ++f) {
    const std::string pair = to_string(rep.filters[f]) + "_vs_" + to_string(rep.filters[0]);
    std::size_t lower_mean = 0, lower_std = 0;
    for (const auto& s : rep.seeds) {
      const double dm = s.metrics[f].mean_err_dist - s.metrics[0].mean_err_dist;
      const double ds = s.metrics[f].std_err_dist - s.metrics[0].std_err_dist;
      if (dm < 0.0) ++lower_mean;
      if (ds < 0.0) ++lower_std;
      const std::string p = "paired." + pair + ".seed." + std::to_string(s.seed) + '.';
      os << p << "delta_mean_err_dist=" << format_double(dm) << '\n'
         << p << "delta_std_err_dist=" << format_double(ds) << '\n';
    }
    os << "paired." << pair << ".seeds_with_lower_mean=" << lower_mean << '\n'
       << "paired." << pair << ".seeds_with_lower_std=" << lower_std << '\n';
  }
}

inline void write_summary(const std::string& path, const Scenario& sc,
                          const MonteCarloReport& rep) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_summary(f, sc, rep);
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

using Json = nlohmann::json;

namespace detail {

inline Vec3 vec3_from(const Json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("'" + key + "' must be a 3-array");
  return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

inline Json vec3_to(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw std::invalid_argument("unknown key '" + item.key() + "' in " + where);
    }
  }
}

inline AngleAxisSpec angle_axis_from(const Json& j, const std::string& where) {
  check_keys(j, {"angle_deg", "axis"}, where);
  AngleAxisSpec a;
  a.angle_rad = deg_to_rad(j.at("angle_deg").get<double>());
  a.axis = vec3_from(j.at("axis"), where + ".axis");
  if (a.axis.norm() == 0.0) throw std::invalid_argument(where + ".axis must be nonzero");
  return a;
}

inline double rad_to_deg(double r) { return r * 180.0 / std::numbers::pi; }

}  // namespace detail

/// Applies the keys of `j` on top of `base`.
inline Scenario apply_config(Scenario sc, const Json& j) {
  using detail::vec3_from;
  detail::check_keys(j,
                     {"preset", "name", "t0", "t_end", "dt", "omega", "noise", "inertial_vectors",
                      "measurement", "initial_true_attitude", "initial_estimate", "initial_b_hat",
                      "initial_sigma_hat", "gains", "guard", "filters", "seeds", "metrics_window"},
                     "scenario");
  if (j.contains("name")) sc.name = j["name"].get<std::string>();
  if (j.contains("t0") || j.contains("t_end") || j.contains("dt")) {
    sc.grid = TimeGrid(j.value("t0", sc.grid.t0()), j.value("t_end", sc.grid.t_end()),
                       j.value("dt", sc.grid.dt()));
  }
  if (j.contains("omega")) {
    const Json& o = j["omega"];
    detail::check_keys(o, {"amplitude", "frequency", "phase"}, "omega");
    if (o.contains("amplitude")) sc.omega.amplitude = vec3_from(o["amplitude"], "omega.amplitude");
    if (o.contains("frequency")) sc.omega.frequency = vec3_from(o["frequency"], "omega.frequency");
    if (o.contains("phase")) sc.omega.phase = vec3_from(o["phase"], "omega.phase");
  }
  if (j.contains("noise")) {
    const Json& n = j["noise"];
    detail::check_keys(n, {"q_diag", "gyro_bias", "convention", "sensors"}, "noise");
    if (n.contains("q_diag")) sc.noise.q_diag = vec3_from(n["q_diag"], "noise.q_diag");
    if (n.contains("gyro_bias")) sc.noise.gyro_bias = vec3_from(n["gyro_bias"], "noise.gyro_bias");
    if (n.contains("convention")) {
      sc.noise.convention = parse_noise_convention(n["convention"].get<std::string>());
    }
    if (n.contains("sensors")) {
      sc.noise.sensors.clear();
      for (const Json& s : n["sensors"]) {
        detail::check_keys(s, {"bias", "noise_std"}, "noise.sensors[]");
        VectorSensor vs;
        if (s.contains("bias")) vs.bias = vec3_from(s["bias"], "noise.sensors[].bias");
        vs.noise_std = s.value("noise_std", 0.0);
        sc.noise.sensors.push_back(vs);
      }
    }
  }
  if (j.contains("inertial_vectors")) {
    sc.inertial_vectors.clear();
    for (const Json& v : j["inertial_vectors"]) {
      sc.inertial_vectors.push_back(vec3_from(v, "inertial_vectors[]"));
    }
  }
  if (j.contains("measurement")) {
    const auto m = j["measurement"].get<std::string>();
    if (m == "reconstructed") {
      sc.measurement = MeasurementMode::kReconstructed;
    } else if (m == "exact") {
      sc.measurement = MeasurementMode::kExact;
    } else {
      throw std::invalid_argument("measurement must be 'reconstructed' or 'exact'");
    }
  }
  if (j.contains("initial_true_attitude")) {
    sc.initial_true_attitude =
        detail::angle_axis_from(j["initial_true_attitude"], "initial_true_attitude").rotation();
  }
  if (j.contains("initial_estimate")) {
    sc.initial_estimate = detail::angle_axis_from(j["initial_estimate"], "initial_estimate");
  }
  if (j.contains("initial_b_hat")) sc.initial_b_hat = vec3_from(j["initial_b_hat"], "initial_b_hat");
  if (j.contains("initial_sigma_hat")) {
    sc.initial_sigma_hat = vec3_from(j["initial_sigma_hat"], "initial_sigma_hat");
  }
  if (j.contains("gains")) {
    const Json& g = j["gains"];
    detail::check_keys(g, {"gamma1", "gamma2", "k1", "k2", "kb", "ksigma", "epsilon"}, "gains");
    sc.gains.gamma1 = g.value("gamma1", sc.gains.gamma1);
    sc.gains.gamma2 = g.value("gamma2", sc.gains.gamma2);
    sc.gains.k1 = g.value("k1", sc.gains.k1);
    sc.gains.k2 = g.value("k2", sc.gains.k2);
    sc.gains.kb = g.value("kb", sc.gains.kb);
    sc.gains.ksigma = g.value("ksigma", sc.gains.ksigma);
    sc.gains.epsilon = g.value("epsilon", sc.gains.epsilon);
  }
  if (j.contains("guard")) {
    const Json& g = j["guard"];
    detail::check_keys(g, {"epsilon", "policy"}, "guard");
    sc.guard.guard = g.value("epsilon", sc.guard.guard);
    if (g.contains("policy")) {
      const auto p = g["policy"].get<std::string>();
      if (p == "saturate") {
        sc.guard.policy = GuardPolicy::kSaturate;
      } else if (p == "throw") {
        sc.guard.policy = GuardPolicy::kThrow;
      } else {
        throw std::invalid_argument("guard.policy must be 'saturate' or 'throw'");
      }
    }
  }
  if (j.contains("filters")) {
    sc.filters.clear();
    for (const Json& f : j["filters"]) sc.filters.push_back(parse_filter_kind(f.get<std::string>()));
  }
  if (j.contains("seeds")) {
    const Json& s = j["seeds"];
    if (s.is_string()) {
      sc.seeds = parse_seed_list(s.get<std::string>());
    } else {
      sc.seeds = s.get<std::vector<std::uint64_t>>();
    }
  }
  if (j.contains("metrics_window")) {
    const auto w = j["metrics_window"].get<std::vector<double>>();
    if (w.size() != 2) throw std::invalid_argument("metrics_window must be [start, end]");
    sc.metrics_window_start = w[0];
    sc.metrics_window_end = w[1];
  }
  sc.validate();
  return sc;
}

inline Scenario scenario_from_json(const Json& j) {
  const std::string base = j.contains("preset") ? j["preset"].get<std::string>() : "paper-sV";
  return apply_config(make_preset(base), j);
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open scenario file '" + path + "'");
  Json j;
  try {
    f >> j;
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument("scenario file '" + path + "': " + e.what());
  }
  return scenario_from_json(j);
}

/// Full scenario dump, loadable by scenario_from_json(). The true initial
/// attitude is stored in angle-axis form.
inline Json scenario_to_json(const Scenario& sc) {
  using detail::vec3_to;
  Json j;
  j["name"] = sc.name;
  j["t0"] = sc.grid.t0();
  j["t_end"] = sc.grid.t_end();
  j["dt"] = sc.grid.dt();
  j["omega"] = {{"amplitude", vec3_to(sc.omega.amplitude)},
                {"frequency", vec3_to(sc.omega.frequency)},
                {"phase", vec3_to(sc.omega.phase)}};
  Json sensors = Json::array();
  for (const auto& s : sc.noise.sensors) {
    sensors.push_back({{"bias", vec3_to(s.bias)}, {"noise_std", s.noise_std}});
  }
  j["noise"] = {{"q_diag", vec3_to(sc.noise.q_diag)},
                {"gyro_bias", vec3_to(sc.noise.gyro_bias)},
                {"convention", to_string(sc.noise.convention)},
                {"sensors", sensors}};
  Json iv = Json::array();
  for (const auto& v : sc.inertial_vectors) iv.push_back(vec3_to(v));
  j["inertial_vectors"] = iv;
  j["measurement"] = sc.measurement == MeasurementMode::kExact ? "exact" : "reconstructed";

  const Eigen::AngleAxisd aa(sc.initial_true_attitude.matrix());
  j["initial_true_attitude"] = {{"angle_deg", detail::rad_to_deg(aa.angle())},
                                {"axis", vec3_to(aa.axis())}};
  j["initial_estimate"] = {{"angle_deg", detail::rad_to_deg(sc.initial_estimate.angle_rad)},
                           {"axis", vec3_to(sc.initial_estimate.axis)}};
  j["initial_b_hat"] = vec3_to(sc.initial_b_hat);
  j["initial_sigma_hat"] = vec3_to(sc.initial_sigma_hat);
  j["gains"] = {{"gamma1", sc.gains.gamma1}, {"gamma2", sc.gains.gamma2}, {"k1", sc.gains.k1},
                {"k2", sc.gains.k2},         {"kb", sc.gains.kb},         {"ksigma", sc.gains.ksigma},
                {"epsilon", sc.gains.epsilon}};
  j["guard"] = {{"epsilon", sc.guard.guard},
                {"policy", sc.guard.policy == GuardPolicy::kThrow ? "throw" : "saturate"}};
  Json filters = Json::array();
  for (auto f : sc.filters) filters.push_back(to_string(f));
  j["filters"] = filters;
  j["seeds"] = sc.seeds;
  j["metrics_window"] = {sc.metrics_window_start, sc.metrics_window_end};
  return j;
}

}  // namespace stochso3
