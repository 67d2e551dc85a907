// oracles.hpp - test-only reference computations. Nothing here calls into the
// code paths it is used to check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace oracle {

inline constexpr double eps0 = 8.8541878128e-12;
inline constexpr double q = 1.602176634e-19;
inline constexpr double kB = 1.380649e-23;
inline constexpr double NA = 6.02214076e23;

/// Trapezoidal rule in f over a log-spaced grid of `points` nodes.
template <class F>
double trapezoid_log_grid(F&& psd, double f_min, double f_max, int points) {
  const double ratio = std::pow(f_max / f_min, 1.0 / (points - 1));
  double total = 0.0;
  double f_prev = f_min;
  double y_prev = psd(f_min);
  for (int i = 1; i < points; ++i) {
    const double f = (i == points - 1) ? f_max : f_min * std::pow(ratio, i);
    const double y = psd(f);
    total += 0.5 * (y + y_prev) * (f - f_prev);
    f_prev = f;
    y_prev = y;
  }
  return total;
}

/// Two-sample chi-squared homogeneity test on integer-keyed histograms.
/// Bins whose pooled count is below `min_pooled` are merged into one.
/// Returns the p-value.
template <class Key>
double chi_squared_two_sample(const std::map<Key, std::int64_t>& a, const std::map<Key, std::int64_t>& b,
                              std::int64_t min_pooled = 10) {
  std::map<Key, std::pair<double, double>> bins;
  for (const auto& [k, n] : a) bins[k].first += static_cast<double>(n);
  for (const auto& [k, n] : b) bins[k].second += static_cast<double>(n);
  double na = 0.0, nb = 0.0;
  for (const auto& [k, v] : bins) {
    na += v.first;
    nb += v.second;
  }
  std::vector<std::pair<double, double>> merged;
  std::pair<double, double> rare{0.0, 0.0};
  for (const auto& [k, v] : bins) {
    if (v.first + v.second < static_cast<double>(min_pooled)) {
      rare.first += v.first;
      rare.second += v.second;
    } else {
      merged.push_back(v);
    }
  }
  if (rare.first + rare.second > 0.0) merged.push_back(rare);
  if (merged.size() < 2) return 1.0;
  double stat = 0.0;
  const double n = na + nb;
  for (const auto& [oa, ob] : merged) {
    const double col = oa + ob;
    const double ea = col * na / n;
    const double eb = col * nb / n;
    stat += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
  }
  boost::math::chi_squared dist(static_cast<double>(merged.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Goodness of fit of integer counts against a uniform law on [lo, hi].
inline double chi_squared_uniform(const std::vector<std::int64_t>& counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto c : counts) stat += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Standard error of a percentage estimated from n Bernoulli trials. The
/// rate is floored at half a count so a 0 % or 100 % estimate still carries
/// a non-zero uncertainty.
inline double percent_se(double percent, std::int64_t n) {
  const double floor_p = 0.5 / static_cast<double>(n);
  const double p = std::clamp(percent / 100.0, floor_p, 1.0 - floor_p);
  return 100.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace oracle

namespace oracle {

/// Strict RFC 4180 reader: CRLF record ends, quoted fields with doubled
/// quotes, no bare quotes inside unquoted fields, every record the same
/// width. Returns false on any violation.
inline bool parse_rfc4180(const std::string& text, std::vector<std::vector<std::string>>& records) {
  records.clear();
  std::vector<std::string> record;
  std::string field;
  std::size_t i = 0;
  const std::size_t n = text.size();
  bool field_started = false;
  while (i < n) {
    const char ch = text[i];
    if (!field_started && ch == '"') {
      ++i;
      for (;;) {
        if (i >= n) return false;
        if (text[i] == '"') {
          if (i + 1 < n && text[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field += text[i++];
      }
      field_started = true;
      if (i < n && text[i] != ',' && text[i] != '\r') return false;
      continue;
    }
    if (ch == ',') {
      record.push_back(field);
      field.clear();
      field_started = false;
      ++i;
    } else if (ch == '\r') {
      if (i + 1 >= n || text[i + 1] != '\n') return false;
      record.push_back(field);
      field.clear();
      field_started = false;
      records.push_back(record);
      record.clear();
      i += 2;
    } else if (ch == '"' || ch == '\n') {
      return false;
    } else {
      field += ch;
      field_started = true;
      ++i;
    }
  }
  if (field_started || !record.empty()) return false;  // last record must end with CRLF
  for (const auto& r : records) {
    if (r.size() != records.front().size()) return false;
  }
  return !records.empty();
}

}  // namespace oracle
