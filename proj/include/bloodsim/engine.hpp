// engine.hpp - Monte Carlo realizations of one operating regime.
//
// A regime runs N_0 blank realizations (target concentration forced to zero)
// and N_1 target-present realizations. In every realization each of the M
// sensors gets its own exposure, occupancy, transduction and noise draw. The
// threshold is estimated from the pooled blank magnitudes and then applied
// unchanged to the present set.
//
// Streams are addressed by (replicate, phase, realization, sensor, purpose),
// never by the position of a regime inside a sweep, so regimes that differ
// only in physics see common random numbers.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "detection.hpp"
#include "device.hpp"
#include "occupancy.hpp"
#include "params.hpp"
#include "rng.hpp"
#include "transduction.hpp"

namespace bloodsim {

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index
/// must write only its own output slot. The first exception is rethrown.
inline void parallel_for(std::size_t count, unsigned workers,
                         const std::function<void(std::size_t)>& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

struct RunOptions {
  unsigned parallelism = 1;
  // Added to present-phase realization indices. Changing it regenerates the
  // present set without touching the blanks.
  std::uint32_t present_offset = 0;
};

/// Full pipeline for one sensor in one realization.
inline SensorReading simulate_sensor(const RegimeConfig& c, const CapacitanceStack& capacitances,
                                     const NoiseModel& noise, Phase phase, std::uint32_t realization,
                                     std::uint32_t sensor) {
  auto stream = [&](Purpose purpose) {
    return derive_stream(c.master_seed, StreamPath{static_cast<std::uint32_t>(c.replicate), phase,
                                                   realization, sensor, purpose});
  };
  auto exposure_rng = stream(Purpose::exposure);
  auto occupancy_rng = stream(Purpose::occupancy);
  auto length_rng = stream(Purpose::lengths);
  auto noise_rng = stream(Purpose::noise);

  const ExposureDraw draw = draw_exposure(c, exposure_rng);
  const BoundPopulation population = assign_sites(draw, c, occupancy_rng, length_rng);
  const SignalShift shift = compute_shift(population, c, capacitances);
  return make_reading(shift.delta_i_total, sample_noise(noise, noise_rng));
}

/// Readings of `count` realizations x M sensors, laid out realization-major.
inline std::vector<SensorReading> run_phase(const RegimeConfig& c, Phase phase, std::int64_t count,
                                            std::uint32_t offset, unsigned parallelism) {
  const auto capacitances = build_capacitances(c);
  const auto noise = build_noise_model(c);
  const auto sensors = static_cast<std::size_t>(c.m_sensors);
  std::vector<SensorReading> readings(static_cast<std::size_t>(count) * sensors);
  parallel_for(static_cast<std::size_t>(count), parallelism, [&](std::size_t i) {
    const auto realization = static_cast<std::uint32_t>(i) + offset;
    for (std::size_t m = 0; m < sensors; ++m) {
      readings[i * sensors + m] = simulate_sensor(c, capacitances, noise, phase, realization,
                                                  static_cast<std::uint32_t>(m));
    }
  });
  return readings;
}

namespace detail {

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
  double skewness = 0.0;
};

inline Moments moments(const std::vector<double>& values) {
  Moments m;
  const double n = static_cast<double>(values.size());
  if (values.empty()) return m;
  for (const double v : values) m.mean += v;
  m.mean /= n;
  double m2 = 0.0;
  double m3 = 0.0;
  for (const double v : values) {
    const double d = v - m.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  if (values.size() > 1) m.sd = std::sqrt(m2 / (n - 1.0));
  const double pop_var = m2 / n;
  if (pop_var > 0.0) m.skewness = (m3 / n) / std::pow(pop_var, 1.5);
  return m;
}

// Applies theta to every reading and OR-fuses per realization.
inline std::vector<bool> decide_realizations(std::vector<SensorReading>& readings,
                                             std::size_t sensors, double theta,
                                             std::int64_t& sensor_hits) {
  std::vector<bool> fused(readings.size() / sensors);
  std::vector<bool> per_sensor(sensors);
  sensor_hits = 0;
  for (std::size_t i = 0; i < fused.size(); ++i) {
    for (std::size_t m = 0; m < sensors; ++m) {
      auto& reading = readings[i * sensors + m];
      reading.decision = decide_sensor(reading.measured, theta);
      per_sensor[m] = reading.decision;
      sensor_hits += reading.decision ? 1 : 0;
    }
    fused[i] = fuse_or(per_sensor);
  }
  return fused;
}

}  // namespace detail

/// Blank and present readings of a finished regime, kept for diagnostics.
struct RegimeTrace {
  std::vector<SensorReading> blank;
  std::vector<SensorReading> present;
};

inline RegimeResult run_regime(const RegimeConfig& config, const RunOptions& options = {},
                               RegimeTrace* trace = nullptr) {
  validate(config);
  const auto sensors = static_cast<std::size_t>(config.m_sensors);

  RegimeConfig blank_config = config;
  blank_config.c_target = 0.0;
  auto blank = run_phase(blank_config, Phase::blank, config.n_blank, 0, options.parallelism);
  auto present = run_phase(config, Phase::present, config.n_present, options.present_offset,
                           options.parallelism);

  std::vector<double> blank_magnitudes(blank.size());
  std::vector<double> blank_signal(blank.size());
  std::vector<double> present_signal(present.size());
  for (std::size_t i = 0; i < blank.size(); ++i) {
    blank_magnitudes[i] = std::fabs(blank[i].measured);
    blank_signal[i] = std::fabs(blank[i].delta_i);
  }
  for (std::size_t i = 0; i < present.size(); ++i) present_signal[i] = std::fabs(present[i].delta_i);

  RegimeResult result;
  result.threshold = estimate_threshold(blank_magnitudes);
  std::int64_t blank_hits = 0;
  std::int64_t present_hits = 0;
  const auto blank_fused = detail::decide_realizations(blank, sensors, result.threshold.theta, blank_hits);
  const auto present_fused =
      detail::decide_realizations(present, sensors, result.threshold.theta, present_hits);
  const auto metrics = compute_metrics(present_fused, blank_fused);
  result.sensitivity = metrics.sensitivity;
  result.specificity = metrics.specificity;

  const auto blank_moments = detail::moments(blank_signal);
  const auto present_moments = detail::moments(present_signal);
  result.mean_abs_signal_blank = blank_moments.mean;
  result.sd_abs_signal_blank = blank_moments.sd;
  result.mean_abs_signal_present = present_moments.mean;
  result.sd_abs_signal_present = present_moments.sd;
  result.blank_skewness = detail::moments(blank_magnitudes).skewness;
  result.sensor_rate_blank = 100.0 * static_cast<double>(blank_hits) / static_cast<double>(blank.size());
  result.sensor_rate_present =
      100.0 * static_cast<double>(present_hits) / static_cast<double>(present.size());
  result.n_blank = config.n_blank;
  result.n_present = config.n_present;
  result.m_sensors = config.m_sensors;
  if (trace != nullptr) {
    trace->blank = std::move(blank);
    trace->present = std::move(present);
  }
  return result;
}

}  // namespace bloodsim
