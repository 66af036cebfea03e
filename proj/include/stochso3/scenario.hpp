#pragma once

/**
 * @file scenario.hpp
 * @brief Simulation configuration and the built-in presets.
 */

#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stochso3/filters.hpp"
#include "stochso3/so3.hpp"
#include "stochso3/stochastic.hpp"

namespace stochso3 {

/// Omega_i(t) = amplitude_i * sin(frequency_i * t + phase_i).
struct SinusoidProfile {
  Vec3 amplitude = Vec3::Zero();
  Vec3 frequency = Vec3::Zero();
  Vec3 phase = Vec3::Zero();

  Vec3 operator()(double t) const {
    return Vec3(amplitude.x() * std::sin(frequency.x() * t + phase.x()),
                amplitude.y() * std::sin(frequency.y() * t + phase.y()),
                amplitude.z() * std::sin(frequency.z() * t + phase.z()));
  }
};

/// Initial estimate as an angle-axis pair; the axis need not be normalized.
struct AngleAxisSpec {
  double angle_rad = 0.0;
  Vec3 axis = Vec3::UnitZ();

  Rotation rotation() const { return angle_axis_to_rotation(angle_rad, axis.normalized()); }
};

enum class MeasurementMode {
  kReconstructed,  // R_y from SVD of synthesized vector measurements
  kExact,          // R_y = R (no vector sensors involved)
};

struct Scenario {
  std::string name = "custom";
  TimeGrid grid{0.0, 15.0, 1e-3};
  SinusoidProfile omega;
  NoiseModel noise;
  std::vector<Vec3> inertial_vectors;
  MeasurementMode measurement = MeasurementMode::kReconstructed;
  Rotation initial_true_attitude;
  AngleAxisSpec initial_estimate;
  Vec3 initial_b_hat = Vec3::Zero();
  Vec3 initial_sigma_hat = Vec3::Zero();
  FilterGains gains;
  GuardOptions guard;
  std::vector<FilterKind> filters = {FilterKind::kIto, FilterKind::kStratonovich};
  std::vector<std::uint64_t> seeds = {0};
  /// Closed metrics window [start, end] in seconds.
  double metrics_window_start = 1.0;
  double metrics_window_end = 15.0;

  void validate() const {
    grid.validate();
    noise.validate();
    gains.validate();
    if (measurement == MeasurementMode::kReconstructed) {
      if (inertial_vectors.size() < 2) {
        throw std::invalid_argument("Scenario: at least two inertial vectors are required");
      }
      if (noise.sensors.size() != inertial_vectors.size()) {
        throw std::invalid_argument("Scenario: one vector sensor model per inertial vector");
      }
    }
    if (filters.empty()) throw std::invalid_argument("Scenario: no filters selected");
    if (seeds.empty()) throw std::invalid_argument("Scenario: at least one seed is required");
    if (!(metrics_window_end >= metrics_window_start)) {
      throw std::invalid_argument("Scenario: metrics window end precedes its start");
    }
  }
};

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// The reference experiment: 15 s, sinusoidal rates, biased and noisy gyro,
/// two biased and noisy vector sensors, estimate started 179.9 deg away.
inline Scenario paper_sv_scenario() {
  Scenario s;
  s.name = "paper-sV";
  s.grid = TimeGrid(0.0, 15.0, 1e-3);
  s.omega.amplitude = Vec3(1.0, 0.7, 0.5);
  s.omega.frequency = Vec3(0.7, 0.5, 0.3);
  s.omega.phase = Vec3(0.0, std::numbers::pi, std::numbers::pi / 3.0);
  s.noise.q_diag = Vec3::Constant(0.5);
  s.noise.gyro_bias = 0.1 * Vec3(1.0, -1.0, 1.0);
  s.noise.convention = NoiseConvention::kPerStep;
  s.inertial_vectors = {Vec3(1.0, -1.0, 1.0) / std::sqrt(3.0), Vec3(0.0, 0.0, 1.0)};
  s.noise.sensors = {VectorSensor{0.1 * Vec3(-1.0, 1.0, 0.5), 0.15},
                     VectorSensor{0.1 * Vec3(0.0, 0.0, 1.0), 0.15}};
  s.measurement = MeasurementMode::kReconstructed;
  s.initial_true_attitude = Rotation::identity();
  s.initial_estimate = {deg_to_rad(179.9), Vec3(1.0, 5.0, 3.0)};
  s.gains = FilterGains{};
  s.filters = {FilterKind::kIto, FilterKind::kStratonovich};
  s.seeds = {0};
  s.metrics_window_start = 1.0;
  s.metrics_window_end = 15.0;
  return s;
}

/// Deterministic-filter check: gyro bias only, exact attitude measurements,
/// estimate started 90 deg away about the same axis as the reference run.
inline Scenario noise_free_bias_scenario() {
  Scenario s = paper_sv_scenario();
  s.name = "noise-free-bias";
  s.noise.q_diag = Vec3::Zero();
  for (auto& sensor : s.noise.sensors) sensor = VectorSensor{};
  s.measurement = MeasurementMode::kExact;
  s.initial_estimate = {deg_to_rad(90.0), Vec3(1.0, 5.0, 3.0)};
  s.filters = {FilterKind::kDeterministic};
  return s;
}

/// Reference experiment with noise entering as Brownian increments.
inline Scenario paper_sv_white_scenario() {
  Scenario s = paper_sv_scenario();
  s.name = "paper-sV-white";
  s.noise.convention = NoiseConvention::kWhite;
  return s;
}

struct PresetInfo {
  std::string name;
  std::string description;
  Scenario (*make)();
};

inline const std::vector<PresetInfo>& presets() {
  static const std::vector<PresetInfo> list = {
      {"paper-sV", "reference 15 s run: per-step gyro noise STD 0.5, biased vector sensors, 179.9 deg initial error",
       &paper_sv_scenario},
      {"paper-sV-white", "reference run with gyro noise as white Brownian increments of intensity 0.5",
       &paper_sv_white_scenario},
      {"noise-free-bias", "gyro bias only, exact attitude measurements, 90 deg initial error, deterministic filter",
       &noise_free_bias_scenario},
  };
  return list;
}

inline Scenario make_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p.make();
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

/// Parses "a..b" (inclusive range), "a,b,c" or a single integer.
inline std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  auto parse_u64 = [&](const std::string& s) -> std::uint64_t {
    std::size_t pos = 0;
    if (s.empty() || s[0] == '-') throw std::invalid_argument("invalid seed '" + s + "'");
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("invalid seed '" + s + "'");
    return v;
  };
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const auto lo = parse_u64(text.substr(0, dots));
    const auto hi = parse_u64(text.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("seed range '" + text + "' is empty");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) seeds.push_back(parse_u64(item));
  if (seeds.empty()) throw std::invalid_argument("empty seed list");
  return seeds;
}

inline std::vector<FilterKind> parse_filter_list(const std::string& text) {
  std::vector<FilterKind> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_filter_kind(item));
  if (out.empty()) throw std::invalid_argument("empty filter list");
  return out;
}

}  // namespace stochso3
