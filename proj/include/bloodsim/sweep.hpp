// sweep.hpp - Cartesian parameter sweeps over RegimeConfig keys.

#pragma once

#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "engine.hpp"
#include "params.hpp"

namespace bloodsim {

struct SweepAxis {
  std::string key;          // canonical dotted key
  std::vector<json> values; // as written: quantity strings or SI numbers
};

struct SweepSpec {
  std::string name = "sweep";
  RegimeConfig base;
  std::vector<SweepAxis> axes;
  // Result columns written after the axis columns (see sweep_metric).
  std::vector<std::string> columns;
};

struct SweepRow {
  std::vector<json> axis_values;
  RegimeConfig config;
  std::optional<RegimeResult> result;
  std::string error;
};

inline const std::vector<std::string>& sweep_metric_names() {
  static const std::vector<std::string> names = {
      "theta",           "blank_mean",         "blank_std",         "sensitivity",
      "specificity",     "mean_abs_delta_i",   "sd_abs_delta_i",    "mean_abs_delta_i_blank",
      "sd_abs_delta_i_blank", "sensor_rate_present", "sensor_rate_blank", "n_present",
      "n_blank",         "m_sensors"};
  return names;
}

inline json sweep_metric(const RegimeResult& r, const std::string& name) {
  if (name == "theta") return r.threshold.theta;
  if (name == "blank_mean") return r.threshold.blank_mean;
  if (name == "blank_std") return r.threshold.blank_std;
  if (name == "sensitivity") return r.sensitivity;
  if (name == "specificity") return r.specificity;
  if (name == "mean_abs_delta_i") return r.mean_abs_signal_present;
  if (name == "sd_abs_delta_i") return r.sd_abs_signal_present;
  if (name == "mean_abs_delta_i_blank") return r.mean_abs_signal_blank;
  if (name == "sd_abs_delta_i_blank") return r.sd_abs_signal_blank;
  if (name == "sensor_rate_present") return r.sensor_rate_present;
  if (name == "sensor_rate_blank") return r.sensor_rate_blank;
  if (name == "n_present") return r.n_present;
  if (name == "n_blank") return r.n_blank;
  if (name == "m_sensors") return r.m_sensors;
  throw ConfigError("unknown sweep column '" + name + "'", "columns");
}

/// Checks keys, value lists and columns. Per-point value errors are left for
/// run_sweep to record.
inline void validate_sweep(const SweepSpec& spec) {
  if (spec.axes.empty()) throw InvariantViolation("axes", "a sweep needs at least one axis");
  for (const auto& axis : spec.axes) {
    canonical_key(axis.key);
    if (axis.values.empty()) throw InvariantViolation(axis.key, "axis value list is empty");
  }
  for (const auto& column : spec.columns) sweep_metric(RegimeResult{}, column);
  validate(spec.base);
}

inline std::size_t sweep_size(const SweepSpec& spec) {
  std::size_t n = 1;
  for (const auto& axis : spec.axes) n *= axis.values.size();
  return n;
}

/// Axis values of point `index`, row-major (first axis varies slowest).
inline std::vector<json> sweep_point(const SweepSpec& spec, std::size_t index) {
  std::vector<json> values(spec.axes.size());
  for (std::size_t a = spec.axes.size(); a-- > 0;) {
    const auto n = spec.axes[a].values.size();
    values[a] = spec.axes[a].values[index % n];
    index /= n;
  }
  return values;
}

/// Parses a sweep spec document:
///   {"name": ..., "base": {key: value}, "axes": [{"key": k, "values": [...]}],
///    "columns": [...]}
/// Keys absent from "base" take the values already in `base`.
inline SweepSpec parse_sweep_spec(const json& document, const RegimeConfig& base,
                                  ParseOptions options = {}) {
  if (!document.is_object()) throw ParseError("sweep spec must be a JSON object");
  SweepSpec spec;
  spec.base = base;
  if (document.contains("name")) spec.name = document.at("name").get<std::string>();
  if (document.contains("base")) apply_json(spec.base, document.at("base"), options);
  if (!document.contains("axes")) throw MissingKey("sweep spec has no 'axes'", "axes");
  const auto& axes = document.at("axes");
  if (!axes.is_array()) throw ParseError("'axes' must be an array", "axes");
  for (const auto& entry : axes) {
    if (!entry.is_object() || !entry.contains("key")) throw MissingKey("axis without 'key'", "axes");
    if (!entry.contains("values")) throw MissingKey("axis without 'values'", "axes");
    SweepAxis axis;
    axis.key = canonical_key(entry.at("key").get<std::string>());
    for (const auto& v : entry.at("values")) axis.values.push_back(v);
    spec.axes.push_back(std::move(axis));
  }
  if (document.contains("columns")) {
    for (const auto& c : document.at("columns")) spec.columns.push_back(c.get<std::string>());
  }
  return spec;
}

/// Evaluates every point. Output order is row-major over the axes whatever
/// the schedule. A failing point records its message and the sweep goes on.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned parallelism,
                                       ParseOptions options = {},
                                       const std::function<void(std::size_t, const SweepRow&)>& on_row = {}) {
  validate_sweep(spec);
  const std::size_t n = sweep_size(spec);
  std::vector<SweepRow> rows(n);
  std::mutex log_mutex;
  const bool single = n == 1;
  parallel_for(n, single ? 1u : parallelism, [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.axis_values = sweep_point(spec, i);
    row.config = spec.base;
    try {
      for (std::size_t a = 0; a < spec.axes.size(); ++a) {
        apply_setting(row.config, spec.axes[a].key, row.axis_values[a], options);
      }
      RunOptions run;
      run.parallelism = single ? parallelism : 1u;
      row.result = run_regime(row.config, run);
    } catch (const std::exception& e) {
      row.result.reset();
      row.error = e.what();
    }
    if (on_row) {
      std::lock_guard lock(log_mutex);
      on_row(i, row);
    }
  });
  return rows;
}

}  // namespace bloodsim
