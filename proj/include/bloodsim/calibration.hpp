// calibration.hpp - pins the flicker constant to a reference sensitivity.
//
// The flicker constant is the one noise parameter without a published value.
// It is chosen so that the simulated sensitivity at a reference operating
// point (1 fM, lambda_D = 0.7 nm, t_ox = 3.5 nm, d_b = 5 nm) lands on a target
// (30 % by default). Sensitivity falls as k_flicker grows, so a bisection over
// log10(k) in [1e-40, 1e-10] A^2 finds the crossing.

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "engine.hpp"

namespace bloodsim {

class CalibrationOutOfRange : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CalibrationTarget {
  double c_target = 1e-15;
  double lambda_d = 0.7e-9;
  double t_ox = 3.5e-9;
  double d_b = 5e-9;
  double sensitivity = 30.0;  // percent
  double tolerance = 5.0;     // percentage points
};

struct CalibrationResult {
  double k_flicker = 0.0;
  double achieved_sensitivity = 0.0;
  int evaluations = 0;
};

inline constexpr double calibration_k_min = 1e-40;
inline constexpr double calibration_k_max = 1e-10;

inline RegimeConfig calibration_config(const RegimeConfig& config, const CalibrationTarget& target) {
  RegimeConfig c = config;
  c.c_target = target.c_target;
  c.lambda_d = target.lambda_d;
  c.t_ox = target.t_ox;
  c.d_b = target.d_b;
  c.noise.enabled = true;
  return c;
}

inline double sensitivity_at(const RegimeConfig& config, double k_flicker, unsigned parallelism) {
  RegimeConfig c = config;
  c.noise.k_flicker = k_flicker;
  RunOptions options;
  options.parallelism = parallelism;
  return run_regime(c, options).sensitivity;
}

inline CalibrationResult calibrate_flicker(const RegimeConfig& config,
                                           const CalibrationTarget& target = {},
                                           unsigned parallelism = 1) {
  const RegimeConfig c = calibration_config(config, target);
  validate(c);
  CalibrationResult best;
  double best_error = std::numeric_limits<double>::infinity();
  auto evaluate = [&](double log_k) {
    const double k = std::pow(10.0, log_k);
    const double s = sensitivity_at(c, k, parallelism);
    ++best.evaluations;
    const double error = std::fabs(s - target.sensitivity);
    if (error < best_error) {
      best_error = error;
      best.k_flicker = k;
      best.achieved_sensitivity = s;
    }
    return s;
  };

  double lo = std::log10(calibration_k_min);
  double hi = std::log10(calibration_k_max);
  const double s_lo = evaluate(lo);
  const double s_hi = evaluate(hi);
  if (s_lo < target.sensitivity - target.tolerance || s_hi > target.sensitivity + target.tolerance) {
    throw CalibrationOutOfRange(
        "no flicker constant in [1e-40, 1e-10] A^2 reaches the target sensitivity (got " +
        std::to_string(s_lo) + "% to " + std::to_string(s_hi) + "%)");
  }
  // Stop once the bracket is narrower than 0.005 decades or the target is hit
  // to within half a percentage point.
  while (hi - lo > 0.005) {
    const double mid = 0.5 * (lo + hi);
    const double s = evaluate(mid);
    if (std::fabs(s - target.sensitivity) <= 0.5) break;
    (s > target.sensitivity ? lo : hi) = mid;
  }
  if (best_error > target.tolerance) {
    throw CalibrationOutOfRange("calibration did not converge within the tolerance band");
  }
  return best;
}

}  // namespace bloodsim
