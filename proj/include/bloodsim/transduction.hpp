// transduction.hpp - bound charge to screened drain-current shift.

#pragma once

#include <cmath>
#include <stdexcept>

#include "device.hpp"
#include "occupancy.hpp"

namespace bloodsim {

/// Per-class and total drain-current shifts. Shifts are positive: fragment
/// charge enters through |z| and detection only looks at magnitudes.
struct SignalShift {
  double delta_i_target = 0.0;
  double delta_i_background = 0.0;
  double delta_i_total = 0.0;
  double alpha = 1.0;
  double d_eff = 0.0;

  double amplitude() const { return std::fabs(delta_i_total); }
};

/// exp(-d_eff / lambda_D).
inline double screening_factor(double lambda_d, double d_eff) {
  if (!(lambda_d > 0.0)) throw std::domain_error("screening_factor: lambda_d must be positive");
  if (d_eff < 0.0) throw std::domain_error("screening_factor: d_eff must be non-negative");
  return std::exp(-d_eff / lambda_d);
}

/// Unscreened surface-potential shift z q N_bp / (A C_eff) of one fragment.
inline double potential_shift(double z, std::int64_t n_bp, double area, double c_eff) {
  return z * constants::elementary_charge * static_cast<double>(n_bp) / (area * c_eff);
}

inline double potential_shift(const BoundFragment& fragment, double area, double c_eff) {
  return potential_shift(fragment.z, fragment.n_bp, area, c_eff);
}

inline SignalShift compute_shift(const BoundPopulation& population, const RegimeConfig& c,
                                 const CapacitanceStack& capacitances) {
  SignalShift shift;
  shift.d_eff = effective_distance(c);
  shift.alpha = screening_factor(c.lambda_d, shift.d_eff);

  // Sum charge (z * N_bp) per class first; the per-fragment factors are common.
  double charge_target = 0.0;
  double charge_background = 0.0;
  for (const auto& fragment : population.fragments) {
    const double charge = fragment.z * static_cast<double>(fragment.n_bp);
    (fragment.fragment_class == FragmentClass::target ? charge_target : charge_background) += charge;
  }
  const double gain = c.g_m * shift.alpha * constants::elementary_charge /
                      (derived_area(c) * capacitances.c_eff);
  shift.delta_i_target = gain * charge_target;
  shift.delta_i_background = gain * charge_background;
  shift.delta_i_total = shift.delta_i_target + shift.delta_i_background;
  return shift;
}

inline SignalShift compute_shift(const BoundPopulation& population, const RegimeConfig& c) {
  return compute_shift(population, c, build_capacitances(c));
}

}  // namespace bloodsim
