// detection.hpp - blank-derived threshold, per-sensor decisions, OR fusion
// and realization-level sensitivity / specificity.

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <ranges>
#include <span>
#include <stdexcept>
#include <vector>

namespace bloodsim {

class TooFewBlanks : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SensorReading {
  double delta_i = 0.0;   // noise-free shift
  double eta = 0.0;       // noise draw
  double measured = 0.0;  // delta_i + eta
  bool decision = false;
};

inline SensorReading make_reading(double delta_i, double eta) {
  return {delta_i, eta, delta_i + eta, false};
}

/// One-sided Gaussian 95th percentile multiplier.
inline constexpr double blank_quantile_z = 1.645;

struct Threshold {
  double theta = 0.0;
  double blank_mean = 0.0;
  double blank_std = 0.0;
  std::int64_t n_samples = 0;
};

/// theta = mean + 1.645 * sd of the blank magnitudes (n - 1 denominator).
/// Sums run in input order so the result is reproducible bit for bit, and
/// are taken relative to the first value so equal inputs give sd = 0 exactly.
inline Threshold estimate_threshold(std::span<const double> blank_magnitudes) {
  const auto n = blank_magnitudes.size();
  if (n < 2) throw TooFewBlanks("threshold estimation needs at least two blank magnitudes");
  const double shift = blank_magnitudes.front();
  double sum = 0.0;
  for (const double v : blank_magnitudes) {
    if (!(v >= 0.0)) throw std::invalid_argument("blank magnitudes must be non-negative");
    sum += v - shift;
  }
  const double mean = shift + sum / static_cast<double>(n);
  double squares = 0.0;
  for (const double v : blank_magnitudes) squares += (v - mean) * (v - mean);
  const double sd = std::sqrt(squares / static_cast<double>(n - 1));
  return {mean + blank_quantile_z * sd, mean, sd, static_cast<std::int64_t>(n)};
}

/// Fires when the measured magnitude strictly exceeds theta.
inline bool decide_sensor(double measured, double theta) {
  if (theta < 0.0) throw std::invalid_argument("threshold must be non-negative");
  return std::fabs(measured) > theta;
}

/// Realization-level decision: true iff any sensor fired. Accepts any range
/// of bool-convertible values (std::vector<bool> included).
template <std::ranges::input_range R>
bool fuse_or(const R& decisions) {
  if (std::ranges::empty(decisions)) {
    throw std::invalid_argument("fuse_or needs at least one sensor decision");
  }
  for (const bool d : decisions) {
    if (d) return true;
  }
  return false;
}

inline bool fuse_or(std::initializer_list<bool> decisions) {
  return fuse_or(std::span<const bool>(decisions.begin(), decisions.size()));
}

struct DetectionMetrics {
  double sensitivity = 0.0;  // percent
  double specificity = 0.0;  // percent
};

template <std::ranges::input_range R>
double percent_true(const R& decisions) {
  std::int64_t hits = 0;
  std::int64_t n = 0;
  for (const bool d : decisions) {
    hits += d ? 1 : 0;
    ++n;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(n);
}

template <std::ranges::input_range P, std::ranges::input_range B>
DetectionMetrics compute_metrics(const P& present, const B& blank) {
  if (std::ranges::empty(present) || std::ranges::empty(blank)) {
    throw std::invalid_argument("compute_metrics needs non-empty decision lists");
  }
  return {percent_true(present), 100.0 - percent_true(blank)};
}

struct RegimeResult {
  Threshold threshold;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double mean_abs_signal_present = 0.0;  // noise-free |delta I_D|, per sensor reading
  double mean_abs_signal_blank = 0.0;
  double sd_abs_signal_present = 0.0;
  double sd_abs_signal_blank = 0.0;
  double sensor_rate_present = 0.0;  // percent of present sensor readings above theta
  double sensor_rate_blank = 0.0;    // per-sensor false-alarm rate, percent
  double blank_skewness = 0.0;       // of the pooled blank magnitudes
  std::int64_t n_present = 0;
  std::int64_t n_blank = 0;
  std::int64_t m_sensors = 0;
};

}  // namespace bloodsim
