// params.hpp - regime configuration, defaults, validation and config loading.
//
// A RegimeConfig holds one fully-resolved parameter set. Every field has a
// flat dotted key (e.g. "interface.t_ox") that is used by JSON config files,
// `--set key=value` overrides, sweep axes and the run manifest. The last
// segment of a key ("t_ox") is accepted as an alias.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "units.hpp"

namespace bloodsim {

using json = nlohmann::json;

class MissingKey : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class UnknownKey : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InvariantViolation : public ConfigError {
 public:
  InvariantViolation(const std::string& field, const std::string& reason)
      : ConfigError(field + ": " + reason, field), reason_(reason) {}
  const std::string& field() const noexcept { return key(); }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
};

struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  bool operator==(const IntRange&) const = default;
};

struct RealRange {
  double lo = 0.0;
  double hi = 0.0;
  double mean() const { return 0.5 * (lo + hi); }
  bool operator==(const RealRange&) const = default;
};

struct NoiseParams {
  double gamma_thermal = 2.0 / 3.0;
  // Lumped flicker constant in A^2 (PSD = k_flicker / f). The default is the
  // value produced by `bloodsim calibrate` with the default configuration.
  double k_flicker = 1.9632190067904054e-25;
  bool enabled = true;
  bool operator==(const NoiseParams&) const = default;
};

struct OccupancyMode {
  enum class Kind { automatic, exact, batched, thinned };
  Kind kind = Kind::automatic;
  std::int64_t batch_size = 65536;
  bool operator==(const OccupancyMode&) const = default;
};

inline std::string_view occupancy_kind_name(OccupancyMode::Kind k) {
  switch (k) {
    case OccupancyMode::Kind::automatic: return "auto";
    case OccupancyMode::Kind::exact: return "exact";
    case OccupancyMode::Kind::batched: return "batched";
    case OccupancyMode::Kind::thinned: return "thinned";
  }
  return "auto";
}

/// One operating regime. Lengths in m, concentrations in mol/L, volume in L,
/// everything else SI. Defaults are the Table-1 operating values used for
/// the reference sweeps (t_ox = 3.5 nm, d_b = 5 nm, lambda_D = 0.7 nm).
struct RegimeConfig {
  double v_sg = 0.3;
  double v_sd = 0.1;
  double g_m = 1.42e-7;
  double i_d0 = 1.571e-6;
  double width = 670e-9;
  double length = 1e-6;
  double t_ox = 3.5e-9;
  double d_b = 5e-9;
  double rho_r = 1e16;  // 1e12 cm^-2
  double c_target = 1e-15;
  double c_background = 1e-15;
  double z_target = 1.0;
  double z_background = 0.5;
  double lambda_d = 0.7e-9;
  double v_sample = 0.1;  // 100 mL
  double f_min = 1.0;
  double f_max = 1000.0;
  std::int64_t m_sensors = 2;
  std::int64_t n_blank = 1000;
  std::int64_t n_present = 1000;
  IntRange target_bp_range{50, 250};
  IntRange background_bp_range{180, 360};
  RealRange target_weight_range{0.0, 1.0};
  RealRange background_weight_range{0.0, 0.5};
  double eps_electrolyte_rel = 78.5;
  double eps_oxide_rel = 3.9;
  double temperature = 310.0;
  NoiseParams noise;
  OccupancyMode occupancy_mode;
  std::uint64_t master_seed = 1;
  // Regime-level stream index. Regimes that share it see common random
  // numbers; a replicate axis varies it.
  std::int64_t replicate = 0;

  bool operator==(const RegimeConfig&) const = default;
};

namespace detail {

enum class KeyKind { real, count, int_range, real_range, boolean, mode, seed };

struct KeySpec {
  std::string_view key;
  KeyKind kind;
  Dimension dimension;
  // Exactly one accessor is non-null, matching `kind`.
  double* (*real)(RegimeConfig&) = nullptr;
  std::int64_t* (*count)(RegimeConfig&) = nullptr;
  IntRange* (*int_range)(RegimeConfig&) = nullptr;
  RealRange* (*real_range)(RegimeConfig&) = nullptr;
  bool* (*boolean)(RegimeConfig&) = nullptr;
};

inline KeySpec real_key(std::string_view k, Dimension d, double* (*f)(RegimeConfig&)) {
  KeySpec s{k, KeyKind::real, d};
  s.real = f;
  return s;
}
inline KeySpec count_key(std::string_view k, std::int64_t* (*f)(RegimeConfig&)) {
  KeySpec s{k, KeyKind::count, Dimension::dimensionless};
  s.count = f;
  return s;
}
inline KeySpec int_range_key(std::string_view k, IntRange* (*f)(RegimeConfig&)) {
  KeySpec s{k, KeyKind::int_range, Dimension::dimensionless};
  s.int_range = f;
  return s;
}
inline KeySpec real_range_key(std::string_view k, RealRange* (*f)(RegimeConfig&)) {
  KeySpec s{k, KeyKind::real_range, Dimension::dimensionless};
  s.real_range = f;
  return s;
}

inline const std::vector<KeySpec>& key_table() {
  using D = Dimension;
  using C = RegimeConfig;
  static const std::vector<KeySpec> table = [] {
    std::vector<KeySpec> t;
    t.push_back(real_key("bias.v_sg", D::voltage, [](C& c) { return &c.v_sg; }));
    t.push_back(real_key("bias.v_sd", D::voltage, [](C& c) { return &c.v_sd; }));
    t.push_back(real_key("device.g_m", D::conductance, [](C& c) { return &c.g_m; }));
    t.push_back(real_key("device.i_d0", D::current, [](C& c) { return &c.i_d0; }));
    t.push_back(real_key("device.width", D::length, [](C& c) { return &c.width; }));
    t.push_back(real_key("device.length", D::length, [](C& c) { return &c.length; }));
    t.push_back(real_key("interface.t_ox", D::length, [](C& c) { return &c.t_ox; }));
    t.push_back(real_key("interface.d_b", D::length, [](C& c) { return &c.d_b; }));
    t.push_back(real_key("interface.rho_r", D::areal_density, [](C& c) { return &c.rho_r; }));
    t.push_back(real_key("interface.eps_oxide_rel", D::dimensionless, [](C& c) { return &c.eps_oxide_rel; }));
    t.push_back(real_key("sample.c_target", D::concentration, [](C& c) { return &c.c_target; }));
    t.push_back(real_key("sample.c_background", D::concentration, [](C& c) { return &c.c_background; }));
    t.push_back(real_key("sample.v_sample", D::volume, [](C& c) { return &c.v_sample; }));
    t.push_back(real_key("charge.z_target", D::dimensionless, [](C& c) { return &c.z_target; }));
    t.push_back(real_key("charge.z_background", D::dimensionless, [](C& c) { return &c.z_background; }));
    t.push_back(int_range_key("fragments.target_bp_range", [](C& c) { return &c.target_bp_range; }));
    t.push_back(int_range_key("fragments.background_bp_range", [](C& c) { return &c.background_bp_range; }));
    t.push_back(real_range_key("binding.target_weight_range", [](C& c) { return &c.target_weight_range; }));
    t.push_back(real_range_key("binding.background_weight_range", [](C& c) { return &c.background_weight_range; }));
    t.push_back(real_key("electrolyte.lambda_d", D::length, [](C& c) { return &c.lambda_d; }));
    t.push_back(real_key("electrolyte.eps_electrolyte_rel", D::dimensionless, [](C& c) { return &c.eps_electrolyte_rel; }));
    t.push_back(real_key("electrolyte.temperature", D::temperature, [](C& c) { return &c.temperature; }));
    t.push_back(real_key("noise.f_min", D::frequency, [](C& c) { return &c.f_min; }));
    t.push_back(real_key("noise.f_max", D::frequency, [](C& c) { return &c.f_max; }));
    t.push_back(real_key("noise.gamma_thermal", D::dimensionless, [](C& c) { return &c.noise.gamma_thermal; }));
    t.push_back(real_key("noise.k_flicker", D::current_squared, [](C& c) { return &c.noise.k_flicker; }));
    KeySpec enabled{"noise.enabled", KeyKind::boolean, D::dimensionless};
    enabled.boolean = [](C& c) { return &c.noise.enabled; };
    t.push_back(enabled);
    t.push_back(count_key("mc.m_sensors", [](C& c) { return &c.m_sensors; }));
    t.push_back(count_key("mc.n_blank", [](C& c) { return &c.n_blank; }));
    t.push_back(count_key("mc.n_present", [](C& c) { return &c.n_present; }));
    t.push_back(KeySpec{"occupancy.mode", KeyKind::mode, D::dimensionless});
    t.push_back(count_key("occupancy.batch_size", [](C& c) { return &c.occupancy_mode.batch_size; }));
    t.push_back(KeySpec{"run.master_seed", KeyKind::seed, D::dimensionless});
    t.push_back(count_key("run.replicate", [](C& c) { return &c.replicate; }));
    return t;
  }();
  return table;
}

inline std::string_view last_segment(std::string_view key) {
  const auto dot = key.rfind('.');
  return dot == std::string_view::npos ? key : key.substr(dot + 1);
}

inline const KeySpec& find_key(std::string_view key) {
  for (const auto& spec : key_table()) {
    if (spec.key == key || last_segment(spec.key) == key) return spec;
  }
  throw UnknownKey("unknown configuration key '" + std::string(key) + "'", std::string(key));
}

inline double json_to_real(const json& value, const KeySpec& spec, ParseOptions options) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) return parse_quantity(value.get<std::string>(), spec.dimension, options);
  throw ParseError(std::string(spec.key) + ": expected a number or a quantity string", std::string(spec.key));
}

inline std::int64_t json_to_count(const json& value, const KeySpec& spec) {
  double v = 0.0;
  if (value.is_number()) {
    v = value.get<double>();
  } else if (value.is_string()) {
    v = parse_quantity(value.get<std::string>(), Dimension::dimensionless);
  } else {
    throw ParseError(std::string(spec.key) + ": expected an integer", std::string(spec.key));
  }
  if (v != std::floor(v) || std::fabs(v) > 9.0e15) {
    throw ParseError(std::string(spec.key) + ": expected an integer", std::string(spec.key));
  }
  return static_cast<std::int64_t>(v);
}

// Accepts [lo, hi], "lo:hi" or "[lo, hi]".
inline std::pair<json, json> json_to_pair(const json& value, const KeySpec& spec) {
  if (value.is_array() && value.size() == 2) return {value[0], value[1]};
  if (value.is_string()) {
    const auto text = value.get<std::string>();
    if (!text.empty() && text.front() == '[') {
      json parsed = json::parse(text, nullptr, false);
      if (!parsed.is_discarded()) return json_to_pair(parsed, spec);
    }
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
      return {json(text.substr(0, colon)), json(text.substr(colon + 1))};
    }
  }
  throw ParseError(std::string(spec.key) + ": expected an interval [lo, hi] or \"lo:hi\"",
                   std::string(spec.key));
}

}  // namespace detail

/// Canonical dotted names of every configuration key, in table order.
inline std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& spec : detail::key_table()) keys.emplace_back(spec.key);
  return keys;
}

/// Resolves an alias ("t_ox") to its canonical dotted key ("interface.t_ox").
inline std::string canonical_key(std::string_view key) {
  return std::string(detail::find_key(key).key);
}

inline Dimension key_dimension(std::string_view key) { return detail::find_key(key).dimension; }

/// Applies one key/value pair. JSON numbers are SI; strings go through
/// parse_quantity. Does not validate the resulting config.
inline void apply_setting(RegimeConfig& config, std::string_view key, const json& value,
                          ParseOptions options = {}) {
  using detail::KeyKind;
  const auto& spec = detail::find_key(key);
  const std::string name(spec.key);
  try {
    switch (spec.kind) {
      case KeyKind::real:
        *spec.real(config) = detail::json_to_real(value, spec, options);
        break;
      case KeyKind::count:
        *spec.count(config) = detail::json_to_count(value, spec);
        break;
      case KeyKind::int_range: {
        auto [lo, hi] = detail::json_to_pair(value, spec);
        *spec.int_range(config) = {detail::json_to_count(lo, spec), detail::json_to_count(hi, spec)};
        break;
      }
      case KeyKind::real_range: {
        auto [lo, hi] = detail::json_to_pair(value, spec);
        *spec.real_range(config) = {detail::json_to_real(lo, spec, options),
                                    detail::json_to_real(hi, spec, options)};
        break;
      }
      case KeyKind::boolean:
        if (value.is_boolean()) {
          *spec.boolean(config) = value.get<bool>();
        } else if (value.is_string() && (value == "true" || value == "1")) {
          *spec.boolean(config) = true;
        } else if (value.is_string() && (value == "false" || value == "0")) {
          *spec.boolean(config) = false;
        } else {
          throw ParseError(name + ": expected true or false", name);
        }
        break;
      case KeyKind::mode: {
        if (!value.is_string()) throw ParseError(name + ": expected a mode name", name);
        const auto text = value.get<std::string>();
        using K = OccupancyMode::Kind;
        if (text == "auto") config.occupancy_mode.kind = K::automatic;
        else if (text == "exact") config.occupancy_mode.kind = K::exact;
        else if (text == "batched") config.occupancy_mode.kind = K::batched;
        else if (text == "thinned") config.occupancy_mode.kind = K::thinned;
        else throw ParseError(name + ": unknown occupancy mode '" + text + "'", name);
        break;
      }
      case KeyKind::seed:
        if (value.is_number_unsigned()) {
          config.master_seed = value.get<std::uint64_t>();
        } else if (value.is_number_integer() && value.get<std::int64_t>() >= 0) {
          config.master_seed = static_cast<std::uint64_t>(value.get<std::int64_t>());
        } else if (value.is_string()) {
          const auto text = value.get<std::string>();
          std::uint64_t seed = 0;
          auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
          if (ec != std::errc{} || ptr != text.data() + text.size()) {
            throw ParseError(name + ": expected an unsigned 64-bit integer", name);
          }
          config.master_seed = seed;
        } else {
          throw ParseError(name + ": expected an unsigned 64-bit integer", name);
        }
        break;
    }
  } catch (ConfigError& e) {
    if (e.key().empty()) e.set_key(name);
    throw;
  }
}

/// Applies a `key=value` override with parse_quantity semantics for the value.
inline void apply_override(RegimeConfig& config, std::string_view assignment,
                           ParseOptions options = {}) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ParseError("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  apply_setting(config, assignment.substr(0, eq), json(std::string(assignment.substr(eq + 1))),
                options);
}

/// Reads one key back as JSON (SI numbers, [lo, hi] arrays, strings).
inline json get_setting(const RegimeConfig& config, std::string_view key) {
  using detail::KeyKind;
  const auto& spec = detail::find_key(key);
  auto& c = const_cast<RegimeConfig&>(config);
  switch (spec.kind) {
    case KeyKind::real: return *spec.real(c);
    case KeyKind::count: return *spec.count(c);
    case KeyKind::int_range: return json::array({spec.int_range(c)->lo, spec.int_range(c)->hi});
    case KeyKind::real_range: return json::array({spec.real_range(c)->lo, spec.real_range(c)->hi});
    case KeyKind::boolean: return *spec.boolean(c);
    case KeyKind::mode: return std::string(occupancy_kind_name(config.occupancy_mode.kind));
    case KeyKind::seed: return config.master_seed;
  }
  return nullptr;
}

/// Flat dotted-key snapshot of every setting.
inline json config_to_json(const RegimeConfig& config) {
  json out = json::object();
  for (const auto& key : config_keys()) out[key] = get_setting(config, key);
  return out;
}

/// Throws InvariantViolation naming the first field that breaks a rule.
inline void validate(const RegimeConfig& c) {
  auto positive = [](const char* field, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvariantViolation(field, "must be strictly positive");
  };
  auto non_negative = [](const char* field, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvariantViolation(field, "must be non-negative");
  };
  positive("device.g_m", c.g_m);
  positive("device.i_d0", c.i_d0);
  if (!std::isfinite(c.v_sg)) throw InvariantViolation("bias.v_sg", "must be finite");
  if (!std::isfinite(c.v_sd)) throw InvariantViolation("bias.v_sd", "must be finite");
  positive("device.width", c.width);
  positive("device.length", c.length);
  positive("interface.t_ox", c.t_ox);
  positive("interface.d_b", c.d_b);
  positive("interface.rho_r", c.rho_r);
  non_negative("sample.c_target", c.c_target);
  non_negative("sample.c_background", c.c_background);
  non_negative("charge.z_target", c.z_target);
  non_negative("charge.z_background", c.z_background);
  positive("electrolyte.lambda_d", c.lambda_d);
  positive("sample.v_sample", c.v_sample);
  positive("noise.f_min", c.f_min);
  positive("noise.f_max", c.f_max);
  if (!(c.f_max > c.f_min)) throw InvariantViolation("noise.f_max", "must exceed noise.f_min");
  positive("electrolyte.eps_electrolyte_rel", c.eps_electrolyte_rel);
  positive("interface.eps_oxide_rel", c.eps_oxide_rel);
  positive("electrolyte.temperature", c.temperature);
  non_negative("noise.gamma_thermal", c.noise.gamma_thermal);
  non_negative("noise.k_flicker", c.noise.k_flicker);
  if (c.m_sensors < 1) throw InvariantViolation("mc.m_sensors", "must be at least 1");
  if (c.n_blank < 2) throw InvariantViolation("mc.n_blank", "must be at least 2");
  if (c.n_present < 1) throw InvariantViolation("mc.n_present", "must be at least 1");
  if (c.replicate < 0 || c.replicate > 0xFFFFFFFFLL) {
    throw InvariantViolation("run.replicate", "must be in [0, 2^32)");
  }
  if (c.n_blank > 0xFFFFFFFFLL || c.n_present > 0xFFFFFFFFLL || c.m_sensors > 0xFFFFFFFFLL) {
    throw InvariantViolation("mc", "realization and sensor counts must be below 2^32");
  }
  auto bp = [](const char* field, const IntRange& r) {
    if (r.lo < 1) throw InvariantViolation(field, "lower bound must be at least 1");
    if (r.lo > r.hi) throw InvariantViolation(field, "lower bound exceeds upper bound");
  };
  bp("fragments.target_bp_range", c.target_bp_range);
  bp("fragments.background_bp_range", c.background_bp_range);
  auto weights = [](const char* field, const RealRange& r) {
    if (!(r.lo >= 0.0 && r.hi <= 1.0 && r.lo <= r.hi)) {
      throw InvariantViolation(field, "must be an interval inside [0, 1]");
    }
  };
  weights("binding.target_weight_range", c.target_weight_range);
  weights("binding.background_weight_range", c.background_weight_range);
  if (c.occupancy_mode.batch_size < 1) {
    throw InvariantViolation("occupancy.batch_size", "must be at least 1");
  }
  const double sites = std::nearbyint(c.rho_r * c.width * c.length);
  if (!(sites >= 1.0)) throw InvariantViolation("interface.rho_r", "fewer than one binding site");
}

inline void flatten_into(const json& node, const std::string& prefix,
                         std::vector<std::pair<std::string, json>>& out) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      flatten_into(*it, key, out);
    } else {
      out.emplace_back(key, *it);
    }
  }
}

/// Applies every key of a (flat or nested) JSON object onto `config`.
inline void apply_json(RegimeConfig& config, const json& document, ParseOptions options = {}) {
  if (!document.is_object()) throw ParseError("configuration must be a JSON object");
  std::vector<std::pair<std::string, json>> entries;
  flatten_into(document, "", entries);
  for (const auto& [key, value] : entries) apply_setting(config, key, value, options);
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  json document = json::parse(buffer.str(), nullptr, false);
  if (document.is_discarded()) throw ParseError("'" + path + "' is not valid JSON");
  return document;
}

/// Loads and validates a config file; unspecified keys keep their defaults.
inline RegimeConfig load_config(const std::string& path, ParseOptions options = {}) {
  RegimeConfig config;
  apply_json(config, read_json_file(path), options);
  validate(config);
  return config;
}

inline double derived_area(const RegimeConfig& c) { return c.width * c.length; }

/// N_R = round(rho_R * A), nearest with ties to even.
inline std::int64_t binding_sites(const RegimeConfig& c) {
  return static_cast<std::int64_t>(std::nearbyint(c.rho_r * derived_area(c)));
}

inline double effective_distance(const RegimeConfig& c) { return c.t_ox + c.d_b; }

}  // namespace bloodsim
