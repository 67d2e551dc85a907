// cli.hpp - the `bloodsim` command line: run, sweep, noise-psd, calibrate.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error,
// 4 calibration out of range.

#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "calibration.hpp"
#include "device.hpp"
#include "engine.hpp"
#include "manifest.hpp"
#include "params.hpp"
#include "sweep.hpp"
#include "table.hpp"

#ifndef BLOODSIM_RECIPE_DIR
#define BLOODSIM_RECIPE_DIR "recipes"
#endif

namespace bloodsim::cli {

enum ExitCode : int { ok = 0, config_error = 2, runtime_error = 3, calibration_error = 4 };

struct GlobalOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
  std::string out;
  unsigned parallelism = std::max(1u, std::thread::hardware_concurrency());
  std::string manifest;
  std::string manifest_out;
  bool assume_si = false;
};

struct SweepOptions {
  std::string spec_path;
  std::string recipe;
  std::vector<std::string> axes;
};

struct CalibrateOptions {
  double target_sensitivity = 0.30;
  double tolerance_pp = 5.0;
};

inline std::string recipe_path(const std::string& recipe) {
  namespace fs = std::filesystem;
  if (fs::exists(recipe)) return recipe;
  std::string dir = BLOODSIM_RECIPE_DIR;
  if (const char* env = std::getenv("BLOODSIM_RECIPES")) dir = env;
  const fs::path candidate = fs::path(dir) / (recipe + ".json");
  if (!fs::exists(candidate)) {
    throw ConfigError("unknown recipe '" + recipe + "' (looked in " + dir + ")", "recipe");
  }
  return candidate.string();
}

inline std::uint64_t parse_seed(const std::string& text, const std::string& source) {
  std::uint64_t seed = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(source + ": expected an unsigned 64-bit integer, got '" + text + "'", source);
  }
  return seed;
}

/// Config file, then calibration manifest, then --set overrides, then seed.
inline RegimeConfig build_config(const GlobalOptions& g) {
  const ParseOptions parse{g.assume_si};
  RegimeConfig config;
  if (!g.config_path.empty()) apply_json(config, read_json_file(g.config_path), parse);
  if (!g.manifest.empty()) config.noise.k_flicker = load_manifest_k_flicker(g.manifest);
  for (const auto& assignment : g.overrides) apply_override(config, assignment, parse);
  if (g.seed) {
    config.master_seed = *g.seed;
  } else if (const char* env = std::getenv("BLOODSIM_SEED")) {
    config.master_seed = parse_seed(env, "BLOODSIM_SEED");
  }
  validate(config);
  return config;
}

inline TableFormat table_format(const GlobalOptions& g) {
  return g.format == "json" ? TableFormat::json : TableFormat::csv;
}

// Writes to `path`, or to `fallback` when the path is empty.
inline void emit(const std::string& path, std::ostream& fallback,
                 const std::function<void(std::ostream&)>& writer) {
  if (path.empty()) {
    writer(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write '" + path + "'");
  writer(file);
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline const std::vector<std::string>& run_columns() {
  static const std::vector<std::string> columns = {
      "c_target",    "c_background",     "lambda_d",  "t_ox",        "d_b",
      "m_sensors",   "n_blank",          "n_present", "k_flicker",   "master_seed",
      "theta",       "sensitivity",      "specificity", "mean_abs_delta_i_present",
      "mean_abs_delta_i_blank"};
  return columns;
}

inline OutputTable run_table(const RegimeConfig& c, const RegimeResult& r) {
  OutputTable table;
  table.header = run_columns();
  table.add_row({c.c_target, c.c_background, c.lambda_d, c.t_ox, c.d_b, c.m_sensors, c.n_blank,
                 c.n_present, c.noise.k_flicker, std::to_string(c.master_seed), r.threshold.theta,
                 r.sensitivity, r.specificity, r.mean_abs_signal_present, r.mean_abs_signal_blank});
  return table;
}

inline int cmd_run(const GlobalOptions& g, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const RegimeConfig config = build_config(g);
  RunOptions options;
  options.parallelism = g.parallelism;
  const RegimeResult result = run_regime(config, options);
  const OutputTable table = run_table(config, result);
  emit(g.out, out, [&](std::ostream& os) { write_table(table, table_format(g), os); });

  std::string manifest_path = g.manifest_out;
  if (manifest_path.empty() && !g.out.empty()) manifest_path = g.out + ".manifest.json";
  if (!manifest_path.empty()) {
    Manifest manifest{"run", config, std::nullopt, seconds_since(start)};
    write_manifest(manifest, manifest_path);
  }
  return ok;
}

inline OutputTable sweep_table(const SweepSpec& spec, const std::vector<SweepRow>& rows) {
  OutputTable table;
  for (const auto& axis : spec.axes) table.header.emplace_back(detail::last_segment(axis.key));
  for (const auto& column : spec.columns) table.header.push_back(column);
  table.header.emplace_back("error");
  for (const auto& row : rows) {
    std::vector<TableCell> cells;
    for (std::size_t a = 0; a < spec.axes.size(); ++a) {
      json value = row.result ? get_setting(row.config, spec.axes[a].key) : row.axis_values[a];
      if (value.is_number_integer()) {
        cells.emplace_back(value.get<std::int64_t>());
      } else if (value.is_number()) {
        cells.emplace_back(value.get<double>());
      } else {
        cells.emplace_back(value.is_string() ? value.get<std::string>() : value.dump());
      }
    }
    for (const auto& column : spec.columns) {
      if (!row.result) {
        cells.emplace_back(std::monostate{});
        continue;
      }
      const json value = sweep_metric(*row.result, column);
      if (value.is_number_integer()) {
        cells.emplace_back(value.get<std::int64_t>());
      } else {
        cells.emplace_back(value.get<double>());
      }
    }
    cells.emplace_back(row.error);
    table.add_row(std::move(cells));
  }
  return table;
}

// "key=v1,v2,..." replaces the axis with the same key or appends a new one.
inline void apply_axis_override(SweepSpec& spec, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("axis override '" + text + "' is not of the form key=v1,v2,...", "axis");
  }
  SweepAxis axis;
  axis.key = canonical_key(text.substr(0, eq));
  std::stringstream values(text.substr(eq + 1));
  for (std::string item; std::getline(values, item, ',');) {
    if (!item.empty()) axis.values.emplace_back(item);
  }
  for (auto& existing : spec.axes) {
    if (existing.key == axis.key) {
      existing = std::move(axis);
      return;
    }
  }
  spec.axes.push_back(std::move(axis));
}

inline int cmd_sweep(const GlobalOptions& g, const SweepOptions& s, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  if (s.spec_path.empty() == s.recipe.empty()) {
    throw ConfigError("sweep needs exactly one of --spec or --recipe", "spec");
  }
  const ParseOptions parse{g.assume_si};
  const json document = read_json_file(s.spec_path.empty() ? recipe_path(s.recipe) : s.spec_path);

  // Recipe base first, then the user's config, manifest, overrides and seed.
  SweepSpec spec = parse_sweep_spec(document, RegimeConfig{}, parse);
  RegimeConfig base = spec.base;
  if (!g.config_path.empty()) apply_json(base, read_json_file(g.config_path), parse);
  if (!g.manifest.empty()) base.noise.k_flicker = load_manifest_k_flicker(g.manifest);
  for (const auto& assignment : g.overrides) apply_override(base, assignment, parse);
  if (g.seed) {
    base.master_seed = *g.seed;
  } else if (const char* env = std::getenv("BLOODSIM_SEED")) {
    base.master_seed = parse_seed(env, "BLOODSIM_SEED");
  }
  spec.base = base;
  for (const auto& axis : s.axes) apply_axis_override(spec, axis);
  validate_sweep(spec);

  const std::size_t total = sweep_size(spec);
  const auto rows = run_sweep(spec, g.parallelism, parse, [&](std::size_t i, const SweepRow& row) {
    err << "[" << spec.name << " " << (i + 1) << "/" << total << "]";
    for (std::size_t a = 0; a < spec.axes.size(); ++a) {
      err << " " << detail::last_segment(spec.axes[a].key) << "=" << row.axis_values[a].dump();
    }
    if (row.result) {
      err << " sensitivity=" << format_number(row.result->sensitivity)
          << " specificity=" << format_number(row.result->specificity);
    } else {
      err << " error: " << row.error;
    }
    err << "\n";
  });

  namespace fs = std::filesystem;
  const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  fs::create_directories(dir);
  const auto format = table_format(g);
  const fs::path table_path = dir / (spec.name + (format == TableFormat::json ? ".json" : ".csv"));
  const OutputTable table = sweep_table(spec, rows);
  emit(table_path.string(), err, [&](std::ostream& os) { write_table(table, format, os); });

  Manifest manifest{"sweep", spec.base, std::nullopt, seconds_since(start)};
  json axes = json::array();
  for (const auto& axis : spec.axes) axes.push_back({{"key", axis.key}, {"values", axis.values}});
  manifest.extra["sweep"] = {{"name", spec.name}, {"axes", axes}, {"columns", spec.columns}};
  const std::string manifest_path =
      g.manifest_out.empty() ? (dir / (spec.name + ".manifest.json")).string() : g.manifest_out;
  write_manifest(manifest, manifest_path);
  return ok;
}

inline OutputTable noise_psd_table(const RegimeConfig& config, std::size_t points) {
  const NoiseModel model = build_noise_model(config);
  OutputTable table;
  table.header = {"frequency_hz", "psd_thermal_a2hz", "psd_flicker_a2hz", "psd_total_a2hz"};
  for (const double f : log_grid(config.f_min, config.f_max, points)) {
    const double thermal = psd_thermal(model);
    const double flicker = psd_flicker(model, f);
    table.add_row({f, thermal, flicker, thermal + flicker});
  }
  return table;
}

inline int cmd_noise_psd(const GlobalOptions& g, std::size_t points, std::ostream& out) {
  if (points < 2) throw ConfigError("--points must be at least 2", "points");
  const RegimeConfig config = build_config(g);
  const OutputTable table = noise_psd_table(config, points);
  emit(g.out, out, [&](std::ostream& os) { write_table(table, table_format(g), os); });
  return ok;
}

inline int cmd_calibrate(const GlobalOptions& g, const CalibrateOptions& options, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  if (!(options.target_sensitivity > 0.0 && options.target_sensitivity < 1.0)) {
    throw ConfigError("--target-sensitivity must be a fraction in (0, 1)", "target-sensitivity");
  }
  RegimeConfig config = build_config(g);
  CalibrationTarget target;
  target.sensitivity = 100.0 * options.target_sensitivity;
  target.tolerance = options.tolerance_pp;
  const CalibrationResult result = calibrate_flicker(config, target, g.parallelism);
  config.noise.k_flicker = result.k_flicker;

  out << "k_flicker=" << format_number(result.k_flicker) << " A^2"
      << " sensitivity=" << format_number(result.achieved_sensitivity) << "%"
      << " evaluations=" << result.evaluations << "\n";
  std::string path = g.manifest_out;
  if (path.empty()) path = g.out.empty() ? "calibration.json" : g.out;
  Manifest manifest{"calibrate", config, CalibrationRecord{target, result}, seconds_since(start)};
  write_manifest(manifest, path);
  return ok;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"bloodsim - Monte Carlo BioFET ctDNA detection simulator"};
  app.require_subcommand(1);
  GlobalOptions g;
  std::uint64_t seed = 0;
  auto add_globals = [&](CLI::App* sub) {
    sub->add_option("--config", g.config_path, "JSON configuration file");
    sub->add_option("--set", g.overrides, "Override a key: key=value (repeatable)");
    sub->add_option("--seed", seed, "Master seed (falls back to BLOODSIM_SEED)");
    sub->add_option("--format", g.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", g.out, "Output file (run, noise-psd, calibrate) or directory (sweep)");
    sub->add_option("--parallelism", g.parallelism, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--manifest", g.manifest, "Read calibrated constants from a manifest");
    sub->add_option("--manifest-out", g.manifest_out, "Where to write the run manifest");
    sub->add_flag("--assume-si", g.assume_si, "Treat bare numbers as SI values");
  };

  auto* run = app.add_subcommand("run", "Simulate one regime and print its metrics");
  add_globals(run);

  SweepOptions sweep_options;
  auto* sweep = app.add_subcommand("sweep", "Evaluate a Cartesian parameter sweep");
  add_globals(sweep);
  sweep->add_option("--spec", sweep_options.spec_path, "Sweep spec JSON file");
  sweep->add_option("--recipe", sweep_options.recipe, "Named recipe (fig3, fig4, fig5, fig6, ...)");
  sweep->add_option("--axis", sweep_options.axes, "Axis override: key=v1,v2,... (repeatable)");

  std::size_t points = 200;
  auto* psd = app.add_subcommand("noise-psd", "Tabulate the current-noise PSD");
  add_globals(psd);
  psd->add_option("--points", points, "Number of log-spaced frequencies");

  CalibrateOptions calibrate_options;
  auto* calibrate = app.add_subcommand("calibrate", "Calibrate the flicker constant");
  add_globals(calibrate);
  calibrate->add_option("--target-sensitivity", calibrate_options.target_sensitivity,
                        "Target sensitivity as a fraction");
  calibrate->add_option("--tolerance", calibrate_options.tolerance_pp,
                        "Accepted deviation in percentage points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return config_error;
  }

  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) g.seed = seed;
  }

  try {
    if (*run) return cmd_run(g, out);
    if (*sweep) return cmd_sweep(g, sweep_options, err);
    if (*psd) return cmd_noise_psd(g, points, out);
    if (*calibrate) return cmd_calibrate(g, calibrate_options, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return config_error;
  } catch (const CalibrationOutOfRange& e) {
    err << "calibration out of range: " << e.what() << "\n";
    return calibration_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return runtime_error;
  }
  return config_error;
}

}  // namespace bloodsim::cli
