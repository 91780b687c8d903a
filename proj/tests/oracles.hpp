#pragma once
// Deliberately naive reference implementations used as independent oracles.
// Everything here favors directness over speed: O(n^2) transforms, separate
// passes per moment, dense filter matrices. None of it shares code with the
// library implementations it checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// Moments and quantiles

inline double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double central_moment(const std::vector<double>& v, int k) {
  const double mu = mean(v);
  double s = 0;
  for (double x : v) s += std::pow(x - mu, k);
  return s / static_cast<double>(v.size());
}

inline double population_std(const std::vector<double>& v) {
  return std::sqrt(central_moment(v, 2));
}

inline double skewness(const std::vector<double>& v) {
  const double sd = population_std(v);
  if (sd == 0) return 0;
  return central_moment(v, 3) / (sd * sd * sd);
}

inline double excess_kurtosis(const std::vector<double>& v) {
  const double m2 = central_moment(v, 2);
  if (m2 == 0) return 0;
  return central_moment(v, 4) / (m2 * m2) - 3.0;
}

inline double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  if (v.size() == 1) return v[0];
  const double pos = p * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double histogram_entropy_16(const std::vector<double>& v) {
  if (v.empty()) return 0;
  double mn = v[0], mx = v[0];
  for (double x : v) {
    mn = std::min(mn, x);
    mx = std::max(mx, x);
  }
  if (mx == mn) return 0;
  std::array<int, 16> hist{};
  for (double x : v) {
    int b = static_cast<int>(std::floor((x - mn) / (mx - mn) * 16));
    b = std::clamp(b, 0, 15);
    ++hist[static_cast<std::size_t>(b)];
  }
  double h = 0;
  for (int c : hist) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(v.size());
    h -= p * std::log(p);
  }
  return h;
}

inline std::array<double, 9> time_domain(const std::vector<double>& m) {
  std::array<double, 9> out{};
  out[0] = mean(m);
  out[1] = population_std(m);
  out[2] = skewness(m);
  out[3] = excess_kurtosis(m);
  out[4] = *std::max_element(m.begin(), m.end());
  out[5] = *std::min_element(m.begin(), m.end());
  out[6] = quantile(m, 0.75) - quantile(m, 0.25);
  out[7] = histogram_entropy_16(m);
  std::vector<double> diffs;
  for (std::size_t i = 0; i + 1 < m.size(); ++i) diffs.push_back(std::fabs(m[i + 1] - m[i]));
  out[8] = histogram_entropy_16(diffs);
  return out;
}

// ---------------------------------------------------------------------------
// Direct transforms

inline std::vector<std::complex<double>> direct_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc{0, 0};
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) *
                         static_cast<double>(t) / static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

inline std::array<double, 6> frequency_domain(const std::vector<double>& m, double /*fs*/) {
  const std::size_t n = m.size();
  const double mu = mean(m);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w =
        n < 2 ? 1.0
              : 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                      static_cast<double>(n - 1)));
    y[i] = (m[i] - mu) * w;
  }
  const auto spec = direct_dft(y);
  std::array<double, 5> band{};
  double total = 0;
  std::vector<double> power;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double p = std::norm(spec[k]);
    power.push_back(p);
    int b = static_cast<int>(10.0 * static_cast<double>(k) / static_cast<double>(n));
    if (b > 4) b = 4;
    band[static_cast<std::size_t>(b)] += p;
    total += p;
  }
  std::array<double, 6> out{};
  for (std::size_t b = 0; b < 5; ++b) out[b] = std::log(band[b] + 1e-12);
  if (total > 0) {
    double h = 0;
    for (double p : power) {
      if (p <= 0) continue;
      const double q = p / total;
      h -= q * std::log(q);
    }
    out[5] = h;
  }
  return out;
}

// Full O(n^2) autocorrelation table, then argmax over the lag range.
inline std::array<double, 2> autocorr(const std::vector<double>& m, double fs,
                                      double min_lag_s = 0.25, double max_lag_s = 3.0) {
  const std::size_t n = m.size();
  const double mu = mean(m);
  double c0 = 0;
  for (double x : m) c0 += (x - mu) * (x - mu);
  std::size_t lo = static_cast<std::size_t>(std::max(1.0, std::round(min_lag_s * fs)));
  std::size_t hi = std::min(static_cast<std::size_t>(std::round(max_lag_s * fs)), n - 1);
  if (c0 == 0) return {static_cast<double>(lo) / fs, 0.0};
  std::vector<double> r(n, 0.0);
  for (std::size_t lag = 0; lag < n; ++lag) {
    double acc = 0;
    for (std::size_t t = 0; t + lag < n; ++t) acc += (m[t] - mu) * (m[t + lag] - mu);
    r[lag] = acc / c0;
  }
  std::size_t best = lo;
  for (std::size_t lag = lo; lag <= hi; ++lag)
    if (r[lag] > r[best]) best = lag;
  return {static_cast<double>(best) / fs, r[best]};
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0 || vb == 0) return 0;
  return cov / std::sqrt(va * vb);
}

// ---------------------------------------------------------------------------
// Textbook MFCC stages (dense matrices, direct DFT)

struct NaiveMfcc {
  std::vector<std::vector<double>> filter_energies;  // frames x n_mels
  std::vector<std::vector<double>> coefficients;     // frames x n_mfcc
};

inline NaiveMfcc naive_mfcc(const std::vector<double>& samples, double fs, int n_mfcc = 20,
                            int n_mels = 40, double frame_ms = 25, double hop_ms = 10,
                            double preemph = 0.97) {
  const std::size_t frame = static_cast<std::size_t>(std::lround(frame_ms / 1000.0 * fs));
  const std::size_t hop = static_cast<std::size_t>(std::lround(hop_ms / 1000.0 * fs));
  std::size_t n_fft = 1;
  while (n_fft < frame) n_fft <<= 1;
  std::vector<double> pre(samples.size());
  pre[0] = samples[0];
  for (std::size_t i = 1; i < samples.size(); ++i) pre[i] = samples[i] - preemph * samples[i - 1];
  const std::size_t n_frames = (samples.size() - frame) / hop + 1;
  // Dense mel filter matrix over bins 0..n_fft/2.
  const auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  const auto imel = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  const double top = mel(fs / 2.0);
  std::vector<double> pts(static_cast<std::size_t>(n_mels) + 2);
  for (std::size_t i = 0; i < pts.size(); ++i)
    pts[i] = imel(top * static_cast<double>(i) / static_cast<double>(pts.size() - 1));
  const std::size_t n_bins = n_fft / 2 + 1;
  std::vector<std::vector<double>> filters(static_cast<std::size_t>(n_mels),
                                           std::vector<double>(n_bins, 0.0));
  for (int f = 0; f < n_mels; ++f) {
    const double lo = pts[static_cast<std::size_t>(f)];
    const double mid = pts[static_cast<std::size_t>(f) + 1];
    const double hi = pts[static_cast<std::size_t>(f) + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double hz = static_cast<double>(k) * fs / static_cast<double>(n_fft);
      double v = 0;
      if (hz > lo && hz < mid)
        v = (hz - lo) / (mid - lo);
      else if (hz == mid)
        v = 1.0;
      else if (hz > mid && hz < hi)
        v = (hi - hz) / (hi - mid);
      filters[static_cast<std::size_t>(f)][k] = v;
    }
  }
  NaiveMfcc out;
  for (std::size_t t = 0; t < n_frames; ++t) {
    std::vector<double> windowed(n_fft, 0.0);
    for (std::size_t i = 0; i < frame; ++i) {
      const double w =
          frame < 2 ? 1.0
                    : 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                            static_cast<double>(frame - 1)));
      windowed[i] = pre[t * hop + i] * w;
    }
    const auto spec = direct_dft(windowed);
    std::vector<double> energies(static_cast<std::size_t>(n_mels), 0.0);
    for (int f = 0; f < n_mels; ++f)
      for (std::size_t k = 0; k < n_bins; ++k)
        energies[static_cast<std::size_t>(f)] +=
            filters[static_cast<std::size_t>(f)][k] * std::norm(spec[k]);
    std::vector<double> coeffs(static_cast<std::size_t>(n_mfcc), 0.0);
    for (int k = 0; k < n_mfcc; ++k) {
      const double scale = k == 0 ? std::sqrt(1.0 / n_mels) : std::sqrt(2.0 / n_mels);
      double acc = 0;
      for (int m = 0; m < n_mels; ++m)
        acc += std::log(std::max(energies[static_cast<std::size_t>(m)], 1e-10)) *
               std::cos(std::numbers::pi * (2.0 * m + 1.0) * k / (2.0 * n_mels));
      coeffs[static_cast<std::size_t>(k)] = scale * acc;
    }
    out.filter_energies.push_back(std::move(energies));
    out.coefficients.push_back(std::move(coeffs));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

struct NaiveMacro {
  double precision = 0, recall = 0, f1 = 0;
};

// Per-class TP/FP/FN by explicit scans over the full matrix.
inline NaiveMacro naive_macro_prf(const std::int64_t* counts, std::size_t k) {
  double sp = 0, sr = 0, sf = 0;
  int present = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const std::int64_t tp = counts[c * k + c];
    std::int64_t fp = 0, fn = 0;
    for (std::size_t r = 0; r < k; ++r)
      if (r != c) fp += counts[r * k + c];
    for (std::size_t j = 0; j < k; ++j)
      if (j != c) fn += counts[c * k + j];
    if (tp + fn == 0) continue;
    ++present;
    const double p = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double r = static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double f = (p + r) > 0 ? 2.0 * p * r / (p + r) : 0.0;
    sp += p;
    sr += r;
    sf += f;
  }
  if (present == 0) return {0, 0, 0};
  return {sp / present, sr / present, sf / present};
}

// Chi-square statistic against expected proportions.
inline double chi_square(const std::vector<std::size_t>& observed,
                         const std::vector<double>& expected_prop) {
  double total = 0;
  for (std::size_t o : observed) total += static_cast<double>(o);
  double stat = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expect = expected_prop[i] * total;
    if (expect <= 0) continue;
    const double d = static_cast<double>(observed[i]) - expect;
    stat += d * d / expect;
  }
  return stat;
}

}  // namespace oracle
