// device.hpp - operating point, lumped interface capacitances and the
// drain-referred current noise model.

#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "params.hpp"

namespace bloodsim {

struct OperatingPoint {
  double i_d0 = 0.0;
  double g_m = 0.0;
  double v_sg = 0.0;
  double v_sd = 0.0;
};

inline OperatingPoint operating_point(const RegimeConfig& c) {
  return {c.i_d0, c.g_m, c.v_sg, c.v_sd};
}

/// Areal capacitances in F/m^2. The oxide and double layer act in series.
struct CapacitanceStack {
  double c_ox = 0.0;
  double c_dl = 0.0;
  double c_eff = 0.0;
};

inline double series_capacitance(double a, double b) { return 1.0 / (1.0 / a + 1.0 / b); }

inline CapacitanceStack build_capacitances(const RegimeConfig& c) {
  CapacitanceStack stack;
  stack.c_ox = constants::vacuum_permittivity * c.eps_oxide_rel / c.t_ox;
  stack.c_dl = constants::vacuum_permittivity * c.eps_electrolyte_rel / c.lambda_d;
  stack.c_eff = series_capacitance(stack.c_ox, stack.c_dl);
  return stack;
}

struct NoiseModel {
  double s_thermal = 0.0;  // A^2/Hz, white
  double k_flicker = 0.0;  // A^2, PSD = k_flicker / f
  double f_min = 1.0;
  double f_max = 1000.0;
  double i_n_rms = 0.0;    // A
};

/// Drain-referred thermal PSD 4 k_B T gamma g_m (A^2/Hz).
inline double psd_thermal(double temperature, double gamma, double g_m) {
  return 4.0 * constants::boltzmann * temperature * gamma * g_m;
}

inline double psd_thermal(const NoiseModel& model) { return model.s_thermal; }

inline double psd_flicker(double k_flicker, double frequency) {
  if (!(frequency > 0.0)) throw std::domain_error("psd_flicker: frequency must be positive");
  return k_flicker / frequency;
}

inline double psd_flicker(const NoiseModel& model, double frequency) {
  return psd_flicker(model.k_flicker, frequency);
}

inline double psd_total(const NoiseModel& model, double frequency) {
  return psd_thermal(model) + psd_flicker(model, frequency);
}

/// Closed-form band integral of the total PSD, returned as an rms current.
inline double integrate_noise(double s_thermal, double k_flicker, double f_min, double f_max) {
  const double power = s_thermal * (f_max - f_min) + k_flicker * std::log(f_max / f_min);
  return std::sqrt(power);
}

inline double integrate_noise(const NoiseModel& model) {
  return integrate_noise(model.s_thermal, model.k_flicker, model.f_min, model.f_max);
}

/// Frequency above which the white floor exceeds the flicker PSD.
inline double crossover_frequency(const NoiseModel& model) {
  return model.s_thermal > 0.0 ? model.k_flicker / model.s_thermal
                               : std::numeric_limits<double>::infinity();
}

inline NoiseModel build_noise_model(const RegimeConfig& c) {
  NoiseModel model;
  model.f_min = c.f_min;
  model.f_max = c.f_max;
  if (c.noise.enabled) {
    model.s_thermal = psd_thermal(c.temperature, c.noise.gamma_thermal, c.g_m);
    model.k_flicker = c.noise.k_flicker;
  }
  model.i_n_rms = integrate_noise(model);
  return model;
}

/// One draw of the band-integrated noise current, N(0, i_n_rms^2).
template <class Rng>
double sample_noise(const NoiseModel& model, Rng& rng) {
  if (model.i_n_rms == 0.0) return 0.0;
  std::normal_distribution<double> normal(0.0, model.i_n_rms);
  return normal(rng);
}

/// `points` log-spaced frequencies whose end points are exactly f_min, f_max.
inline std::vector<double> log_grid(double f_min, double f_max, std::size_t points) {
  if (points < 2) throw std::invalid_argument("log_grid needs at least two points");
  std::vector<double> grid(points);
  const double lo = std::log(f_min);
  const double step = (std::log(f_max) - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = std::exp(lo + step * static_cast<double>(i));
  grid.front() = f_min;
  grid.back() = f_max;
  return grid;
}

}  // namespace bloodsim
