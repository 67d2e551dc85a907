// units.hpp - physical constants and unit-suffixed quantity literals.
//
// Quantities are parsed from text of the form `number [suffix]` and returned
// in SI base units. Concentrations (mol/L) and volumes (L) are the exceptions:
// the model only ever multiplies them together.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace bloodsim {

namespace constants {
inline constexpr double elementary_charge = 1.602176634e-19;   // C
inline constexpr double boltzmann = 1.380649e-23;              // J/K
inline constexpr double avogadro = 6.02214076e23;              // 1/mol
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m
}  // namespace constants

enum class Dimension {
  dimensionless,
  length,
  voltage,
  conductance,
  current,
  concentration,
  volume,
  frequency,
  temperature,
  areal_density,
  current_squared,
};

inline std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::dimensionless: return "dimensionless";
    case Dimension::length: return "length";
    case Dimension::voltage: return "voltage";
    case Dimension::conductance: return "conductance";
    case Dimension::current: return "current";
    case Dimension::concentration: return "concentration";
    case Dimension::volume: return "volume";
    case Dimension::frequency: return "frequency";
    case Dimension::temperature: return "temperature";
    case Dimension::areal_density: return "areal density";
    case Dimension::current_squared: return "current squared";
  }
  return "unknown";
}

/// Base class for everything that makes a configuration unusable. The CLI maps
/// these to exit code 2; `key()` names the offending configuration key when
/// one is known.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::string key = {})
      : std::runtime_error(what), key_(std::move(key)), message_(what) {}
  const std::string& key() const noexcept { return key_; }
  const char* what() const noexcept override { return message_.c_str(); }

  // Attaches the configuration key once it is known further up the stack.
  void set_key(const std::string& key) {
    key_ = key;
    message_ = key + ": " + std::runtime_error::what();
  }

 private:
  std::string key_;
  std::string message_;
};

class UnknownUnit : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DimensionMismatch : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class MalformedNumber : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct UnitSuffix {
  std::string_view suffix;
  Dimension dimension;
  double scale;  // multiply by this to get SI (mol/L for concentrations)
};

inline constexpr UnitSuffix unit_table[] = {
    {"m", Dimension::length, 1.0},
    {"cm", Dimension::length, 1e-2},
    {"mm", Dimension::length, 1e-3},
    {"um", Dimension::length, 1e-6},
    {"nm", Dimension::length, 1e-9},
    {"V", Dimension::voltage, 1.0},
    {"S", Dimension::conductance, 1.0},
    {"A", Dimension::current, 1.0},
    {"mA", Dimension::current, 1e-3},
    {"uA", Dimension::current, 1e-6},
    {"nA", Dimension::current, 1e-9},
    {"pA", Dimension::current, 1e-12},
    {"fA", Dimension::current, 1e-15},
    {"M", Dimension::concentration, 1.0},
    {"mM", Dimension::concentration, 1e-3},
    {"uM", Dimension::concentration, 1e-6},
    {"nM", Dimension::concentration, 1e-9},
    {"pM", Dimension::concentration, 1e-12},
    {"fM", Dimension::concentration, 1e-15},
    {"aM", Dimension::concentration, 1e-18},
    // Volumes are kept in litres so that mol/L times L is a molar amount.
    {"L", Dimension::volume, 1.0},
    {"mL", Dimension::volume, 1e-3},
    {"uL", Dimension::volume, 1e-6},
    {"Hz", Dimension::frequency, 1.0},
    {"kHz", Dimension::frequency, 1e3},
    {"K", Dimension::temperature, 1.0},
};

struct ParseOptions {
  // Accept a bare number for a dimensioned quantity and treat it as SI.
  bool assume_si = false;
};

/// Parses `number [suffix]` into SI units (concentrations in mol/L, volumes in L).
/// Whitespace between the number and the suffix is allowed.
inline double parse_quantity(std::string_view text, Dimension expected,
                             ParseOptions options = {}) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  };
  const std::string_view input = trim(text);
  const std::string shown(text);

  double value = 0.0;
  const char* first = input.data();
  const char* last = input.data() + input.size();
  if (!input.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr == first) {
    throw MalformedNumber("malformed number in '" + shown + "'");
  }
  if (!std::isfinite(value)) {
    throw MalformedNumber("non-finite number in '" + shown + "'");
  }
  const std::string_view suffix = trim(std::string_view(ptr, static_cast<std::size_t>(last - ptr)));

  if (suffix.empty()) {
    if (expected == Dimension::dimensionless || expected == Dimension::areal_density ||
        expected == Dimension::current_squared || options.assume_si) {
      return value;
    }
    throw MalformedNumber("'" + shown + "' has no unit suffix; expected a " +
                          std::string(dimension_name(expected)));
  }
  for (const auto& unit : unit_table) {
    if (unit.suffix != suffix) continue;
    if (unit.dimension != expected) {
      throw DimensionMismatch("'" + shown + "' is a " + std::string(dimension_name(unit.dimension)) +
                              ", expected a " + std::string(dimension_name(expected)));
    }
    return value * unit.scale;
  }
  throw UnknownUnit("unknown unit suffix '" + std::string(suffix) + "' in '" + shown + "'");
}

/// Formats an SI value with the coarsest suffix of its dimension whose scale
/// does not exceed the magnitude. Uses 17 significant digits.
inline std::string format_quantity(double si_value, Dimension dimension) {
  const UnitSuffix* best = nullptr;
  const double magnitude = std::fabs(si_value);
  for (const auto& unit : unit_table) {
    if (unit.dimension != dimension) continue;
    if (best == nullptr) {
      best = &unit;
      continue;
    }
    const bool fits = unit.scale <= magnitude;
    const bool best_fits = best->scale <= magnitude;
    if (fits && (!best_fits || unit.scale > best->scale)) best = &unit;
    if (!fits && !best_fits && unit.scale < best->scale) best = &unit;
  }
  char buf[64];
  if (best == nullptr) {
    std::snprintf(buf, sizeof buf, "%.17g", si_value);
    return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g%.*s", si_value / best->scale,
                static_cast<int>(best->suffix.size()), best->suffix.data());
  return buf;
}

}  // namespace bloodsim
