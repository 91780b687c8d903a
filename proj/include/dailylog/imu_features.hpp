#pragma once
// 26-feature IMU block per sensor: nine time-domain statistics, five log band
// energies plus spectral entropy, two autocorrelation features and nine
// axis-level statistics. All computed on the tri-axis vector amplitude except
// the axis block. Population moments throughout; sigma = 0 degeneracies
// (skewness, kurtosis, entropies, correlations, autocorrelation peak) are
// defined as 0 so downstream prompts never carry non-numeric tokens.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dailylog/common.hpp"
#include "dailylog/dsp.hpp"
#include "dailylog/ingest.hpp"

namespace dailylog::imu {

using json = nlohmann::json;
using ingest::SensorWindow;
using ingest::TriAxisSeries;

class EmptySeries : public Error {
 public:
  EmptySeries() : Error("series is empty") {}
};

class TooShort : public Error {
 public:
  using Error::Error;
};

class NoImuData : public Error {
 public:
  NoImuData() : Error("window contains no IMU series") {}
};

constexpr int kEntropyBins = 16;
constexpr double kBandFloor = 1e-12;

struct TimeDomainFeatures {
  double mean = 0, stdev = 0, skewness = 0, kurtosis = 0, max = 0, min = 0, iqr = 0,
         signal_entropy = 0, temporal_entropy = 0;

  std::array<double, 9> flat() const {
    return {mean, stdev, skewness, kurtosis, max, min, iqr, signal_entropy, temporal_entropy};
  }
};

struct FrequencyDomainFeatures {
  std::array<double, 5> log_band_energy{};
  double spectral_entropy = 0;

  std::array<double, 6> flat() const {
    return {log_band_energy[0], log_band_energy[1], log_band_energy[2],
            log_band_energy[3], log_band_energy[4], spectral_entropy};
  }
};

struct AutocorrFeatures {
  double dominant_lag_s = 0;
  double dominant_peak = 0;
};

struct AxisFeatures {
  double mean_x = 0, mean_y = 0, mean_z = 0;
  double std_x = 0, std_y = 0, std_z = 0;
  double corr_xy = 0, corr_xz = 0, corr_yz = 0;

  std::array<double, 9> flat() const {
    return {mean_x, mean_y, mean_z, std_x, std_y, std_z, corr_xy, corr_xz, corr_yz};
  }
};

struct ImuFeatureBlock {
  TimeDomainFeatures time_domain;
  FrequencyDomainFeatures freq_domain;
  AutocorrFeatures autocorr;
  AxisFeatures axis;

  std::array<double, 26> flat() const {
    std::array<double, 26> out{};
    std::size_t i = 0;
    for (double v : time_domain.flat()) out[i++] = v;
    for (double v : freq_domain.flat()) out[i++] = v;
    out[i++] = autocorr.dominant_lag_s;
    out[i++] = autocorr.dominant_peak;
    for (double v : axis.flat()) out[i++] = v;
    return out;
  }
};

inline const std::array<const char*, 26>& feature_names() {
  static const std::array<const char*, 26> names = {
      "mean",           "std",           "skewness",       "kurtosis",
      "max",            "min",           "iqr",            "signal_entropy",
      "temporal_entropy",
      "log_energy_band_1", "log_energy_band_2", "log_energy_band_3",
      "log_energy_band_4", "log_energy_band_5", "spectral_entropy",
      "dominant_lag_s", "dominant_peak",
      "mean_x",         "mean_y",        "mean_z",
      "std_x",          "std_y",         "std_z",
      "corr_xy",        "corr_xz",       "corr_yz",
  };
  return names;
}

inline const std::array<const char*, 3>& sensor_order() {
  static const std::array<const char*, 3> order = {"accel", "gyro", "mag"};
  return order;
}

struct ImuFeatureVector {
  std::array<bool, 3> present{false, false, false};  // accel, gyro, mag
  std::vector<ImuFeatureBlock> blocks;               // one per present sensor, fixed order

  std::vector<double> flat() const {
    std::vector<double> out;
    out.reserve(blocks.size() * 26);
    for (const auto& b : blocks)
      for (double v : b.flat()) out.push_back(v);
    return out;
  }

  std::vector<std::string> sensors() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < 3; ++i)
      if (present[i]) out.emplace_back(sensor_order()[i]);
    return out;
  }

  const ImuFeatureBlock* block_for(std::string_view sensor) const {
    std::size_t slot = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      if (!present[i]) continue;
      if (sensor == sensor_order()[i]) return &blocks[slot];
      ++slot;
    }
    return nullptr;
  }
};

// Flat values plus the present-sensor list; the name list is feature_names().
inline void to_json(json& j, const ImuFeatureVector& v) {
  j = json{{"sensors", v.sensors()}, {"values", v.flat()}};
}

struct ImuExtractOptions {
  bool fused = false;  // single block over the cross-sensor fused magnitude
  double autocorr_min_lag_s = 0.25;
  double autocorr_max_lag_s = 3.0;
};

// ---------------------------------------------------------------------------
// Stages

inline std::vector<double> magnitude_series(const TriAxisSeries& s) {
  if (s.size() == 0) throw EmptySeries();
  if (s.y.size() != s.x.size() || s.z.size() != s.x.size())
    throw Error("tri-axis series axes differ in length");
  std::vector<double> m(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    m[i] = std::sqrt(s.x[i] * s.x[i] + s.y[i] * s.y[i] + s.z[i] * s.z[i]);
  return m;
}

namespace detail {

// Linear-interpolation quantile over a sorted copy, matching the common
// "linear" convention: position p*(n-1).
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Shannon entropy (nats) of a 16-bin histogram of v over [min(v), max(v)].
// Degenerate range yields 0.
inline double histogram_entropy(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto [mn_it, mx_it] = std::minmax_element(v.begin(), v.end());
  const double mn = *mn_it, mx = *mx_it;
  if (mx == mn) return 0.0;
  std::array<std::size_t, kEntropyBins> hist{};
  for (double x : v) {
    int b = static_cast<int>(std::floor((x - mn) / (mx - mn) * kEntropyBins));
    if (b < 0) b = 0;
    if (b >= kEntropyBins) b = kEntropyBins - 1;
    ++hist[static_cast<std::size_t>(b)];
  }
  double h = 0.0;
  const double n = static_cast<double>(v.size());
  for (std::size_t c : hist) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

inline double population_std(std::span<const double> v, double mean) {
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace detail

inline TimeDomainFeatures time_domain_features(const std::vector<double>& m) {
  if (m.size() < 2) throw TooShort("time-domain features need at least 2 samples");
  const double n = static_cast<double>(m.size());
  TimeDomainFeatures f;
  double sum = 0;
  for (double x : m) sum += x;
  f.mean = sum / n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double x : m) {
    const double d = x - f.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  f.stdev = std::sqrt(m2);
  if (f.stdev > 0) {
    f.skewness = m3 / (f.stdev * f.stdev * f.stdev);
    f.kurtosis = m4 / (m2 * m2) - 3.0;  // excess kurtosis
  }
  const auto [mn, mx] = std::minmax_element(m.begin(), m.end());
  f.min = *mn;
  f.max = *mx;
  std::vector<double> sorted(m);
  std::sort(sorted.begin(), sorted.end());
  f.iqr = detail::quantile_sorted(sorted, 0.75) - detail::quantile_sorted(sorted, 0.25);
  f.signal_entropy = detail::histogram_entropy(m);
  std::vector<double> diffs(m.size() - 1);
  for (std::size_t i = 0; i + 1 < m.size(); ++i) diffs[i] = std::fabs(m[i + 1] - m[i]);
  f.temporal_entropy = detail::histogram_entropy(diffs);
  return f;
}

// Mean-removed, Hann-windowed, full-length DFT. The one-sided power spectrum
// over (0, fs/2] splits into five equal-width bands; band feature is
// ln(band power + 1e-12). Spectral entropy is the Shannon entropy (nats) of
// the normalized power spectrum.
inline FrequencyDomainFeatures frequency_domain_features(const std::vector<double>& m, double fs) {
  if (m.size() < 8) throw TooShort("frequency-domain features need at least 8 samples");
  if (fs <= 0) throw Error("sample rate must be > 0");
  const std::size_t n = m.size();
  double mean = 0;
  for (double x : m) mean += x;
  mean /= static_cast<double>(n);
  const auto window = dsp::hann_window(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = (m[i] - mean) * window[i];
  const auto spectrum = dsp::dft(y);
  const auto power = dsp::one_sided_power(spectrum);  // k = 1..n/2
  FrequencyDomainFeatures f;
  std::array<double, 5> band{};
  double total = 0;
  for (std::size_t i = 0; i < power.size(); ++i) {
    const std::size_t k = i + 1;
    // Band of frequency k*fs/n within (0, fs/2] split 5 ways: floor(10k/n).
    int b = static_cast<int>(10.0 * static_cast<double>(k) / static_cast<double>(n));
    if (b > 4) b = 4;
    band[static_cast<std::size_t>(b)] += power[i];
    total += power[i];
  }
  for (std::size_t b = 0; b < 5; ++b) f.log_band_energy[b] = std::log(band[b] + kBandFloor);
  if (total > 0) {
    double h = 0;
    for (double p : power) {
      if (p <= 0) continue;
      const double q = p / total;
      h -= q * std::log(q);
    }
    f.spectral_entropy = h;
  }
  return f;
}

// Biased normalized autocorrelation searched over lag in
// [round(min_lag_s*fs), min(round(max_lag_s*fs), n-1)], never below lag 1.
inline AutocorrFeatures autocorrelation_features(const std::vector<double>& m, double fs,
                                                 double min_lag_s = 0.25,
                                                 double max_lag_s = 3.0) {
  if (fs <= 0) throw Error("sample rate must be > 0");
  const std::size_t n = m.size();
  if (static_cast<double>(n) < 0.5 * fs)
    throw TooShort("autocorrelation needs at least 0.5*fs samples");
  std::size_t lo = static_cast<std::size_t>(std::max(1.0, std::round(min_lag_s * fs)));
  std::size_t hi = static_cast<std::size_t>(std::round(max_lag_s * fs));
  if (hi > n - 1) hi = n - 1;
  if (lo > n - 1) throw TooShort("series shorter than the minimum autocorrelation lag");
  double mean = 0;
  for (double x : m) mean += x;
  mean /= static_cast<double>(n);
  double c0 = 0;
  for (double x : m) c0 += (x - mean) * (x - mean);
  AutocorrFeatures f;
  if (c0 == 0.0) {
    f.dominant_lag_s = static_cast<double>(lo) / fs;
    f.dominant_peak = 0.0;
    return f;
  }
  double best = -HUGE_VAL;
  std::size_t best_lag = lo;
  for (std::size_t lag = lo; lag <= hi; ++lag) {
    double acc = 0;
    for (std::size_t t = 0; t + lag < n; ++t) acc += (m[t] - mean) * (m[t + lag] - mean);
    const double r = acc / c0;
    if (r > best) {
      best = r;
      best_lag = lag;
    }
  }
  f.dominant_lag_s = static_cast<double>(best_lag) / fs;
  f.dominant_peak = best;
  return f;
}

inline AxisFeatures axis_features(const TriAxisSeries& s) {
  if (s.size() < 2) throw TooShort("axis features need at least 2 samples");
  if (s.y.size() != s.x.size() || s.z.size() != s.x.size())
    throw Error("tri-axis series axes differ in length");
  AxisFeatures f;
  const double n = static_cast<double>(s.size());
  for (double v : s.x) f.mean_x += v;
  for (double v : s.y) f.mean_y += v;
  for (double v : s.z) f.mean_z += v;
  f.mean_x /= n;
  f.mean_y /= n;
  f.mean_z /= n;
  f.std_x = detail::population_std(s.x, f.mean_x);
  f.std_y = detail::population_std(s.y, f.mean_y);
  f.std_z = detail::population_std(s.z, f.mean_z);
  f.corr_xy = detail::pearson(s.x, s.y);
  f.corr_xz = detail::pearson(s.x, s.z);
  f.corr_yz = detail::pearson(s.y, s.z);
  return f;
}

inline ImuFeatureBlock compute_block(const TriAxisSeries& s, const ImuExtractOptions& opts = {}) {
  ImuFeatureBlock b;
  const auto m = magnitude_series(s);
  b.time_domain = time_domain_features(m);
  b.freq_domain = frequency_domain_features(m, s.sample_rate_hz);
  b.autocorr = autocorrelation_features(m, s.sample_rate_hz, opts.autocorr_min_lag_s,
                                        opts.autocorr_max_lag_s);
  b.axis = axis_features(s);
  return b;
}

// Per-sensor blocks concatenated in (accel, gyro, mag) order with a presence
// mask. In fused mode a single block is computed over the cross-sensor fused
// magnitude (element-wise L2 over every present axis, series truncated to the
// shortest sensor); its axis statistics come from the first present sensor.
inline ImuFeatureVector extract_imu_features(const SensorWindow& w,
                                             const ImuExtractOptions& opts = {}) {
  ImuFeatureVector out;
  std::vector<const TriAxisSeries*> series;
  for (std::size_t i = 0; i < 3; ++i) {
    auto it = w.imu.find(sensor_order()[i]);
    if (it == w.imu.end()) continue;
    out.present[i] = true;
    series.push_back(&it->second);
  }
  if (series.empty()) throw NoImuData();
  if (!opts.fused) {
    for (const TriAxisSeries* s : series) out.blocks.push_back(compute_block(*s, opts));
    return out;
  }
  std::size_t len = series.front()->size();
  for (const TriAxisSeries* s : series) len = std::min(len, s->size());
  if (len == 0) throw EmptySeries();
  std::vector<double> fused(len, 0.0);
  for (const TriAxisSeries* s : series)
    for (std::size_t i = 0; i < len; ++i)
      fused[i] += s->x[i] * s->x[i] + s->y[i] * s->y[i] + s->z[i] * s->z[i];
  for (double& v : fused) v = std::sqrt(v);
  const double fs = series.front()->sample_rate_hz;
  ImuFeatureBlock b;
  b.time_domain = time_domain_features(fused);
  b.freq_domain = frequency_domain_features(fused, fs);
  b.autocorr =
      autocorrelation_features(fused, fs, opts.autocorr_min_lag_s, opts.autocorr_max_lag_s);
  b.axis = axis_features(*series.front());
  out.blocks.push_back(std::move(b));
  return out;
}

}  // namespace dailylog::imu
