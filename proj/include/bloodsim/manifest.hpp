// manifest.hpp - run manifests: config snapshot, calibrated constants, seed,
// version and wall time.

#pragma once

#include <fstream>
#include <optional>
#include <string>

#include "calibration.hpp"
#include "params.hpp"

#ifndef BLOODSIM_VERSION
#define BLOODSIM_VERSION "0.1.0"
#endif

namespace bloodsim {

inline constexpr const char* version_string = BLOODSIM_VERSION;

struct CalibrationRecord {
  CalibrationTarget target;
  CalibrationResult result;
};

struct Manifest {
  std::string command;
  RegimeConfig config;
  std::optional<CalibrationRecord> calibration;
  double wall_time_s = 0.0;
  json extra = json::object();
};

inline json manifest_to_json(const Manifest& m) {
  json out;
  out["tool"] = "bloodsim";
  out["version"] = version_string;
  out["command"] = m.command;
  out["master_seed"] = m.config.master_seed;
  out["config"] = config_to_json(m.config);
  json constants = json::object();
  constants["noise.k_flicker"] = m.config.noise.k_flicker;
  if (m.calibration) {
    const auto& c = *m.calibration;
    json calibration;
    calibration["k_flicker"] = c.result.k_flicker;
    calibration["achieved_sensitivity"] = c.result.achieved_sensitivity;
    calibration["evaluations"] = c.result.evaluations;
    calibration["target"] = {{"c_target", c.target.c_target},
                             {"lambda_d", c.target.lambda_d},
                             {"t_ox", c.target.t_ox},
                             {"d_b", c.target.d_b},
                             {"sensitivity", c.target.sensitivity},
                             {"tolerance", c.target.tolerance}};
    constants["calibration"] = calibration;
  }
  out["calibrated_constants"] = constants;
  for (auto it = m.extra.begin(); it != m.extra.end(); ++it) out[it.key()] = *it;
  out["wall_time_s"] = m.wall_time_s;
  return out;
}

inline void write_manifest(const Manifest& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest '" + path + "'");
  out << manifest_to_json(m).dump(2) << "\n";
}

/// Reads the calibrated flicker constant back from a manifest file.
inline double manifest_k_flicker(const json& document) {
  if (document.contains("calibrated_constants")) {
    const auto& constants = document.at("calibrated_constants");
    if (constants.contains("calibration") && constants.at("calibration").contains("k_flicker")) {
      return constants.at("calibration").at("k_flicker").get<double>();
    }
    if (constants.contains("noise.k_flicker")) return constants.at("noise.k_flicker").get<double>();
  }
  throw MissingKey("manifest has no calibrated k_flicker", "calibrated_constants");
}

inline double load_manifest_k_flicker(const std::string& path) {
  return manifest_k_flicker(read_json_file(path));
}

}  // namespace bloodsim
