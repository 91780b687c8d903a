#pragma once
// 120-dimensional audio feature vector: per-frame MFCCs (20 coefficients,
// counting the DCT energy term as coefficient 1), their delta and
// delta-delta regressions, summarized as population means and standard
// deviations per coefficient over all frames.
//
// Pipeline per clip: pre-emphasis over the whole signal (y[0] = x[0]),
// Hann-windowed frames advancing by the hop (tail shorter than one frame is
// dropped), power spectrum on an FFT of next_pow2(frame) points, 40
// triangular mel filters spanning [0, fs/2] with mel(f) = 2595*log10(1+f/700),
// natural log of filter energies floored at 1e-10, orthonormal type-II DCT.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dailylog/common.hpp"
#include "dailylog/dsp.hpp"
#include "dailylog/ingest.hpp"

namespace dailylog::audio {

using json = nlohmann::json;
using ingest::AudioClip;

class ClipTooShort : public Error {
 public:
  using Error::Error;
};

constexpr double kLogFloor = 1e-10;

struct MfccConfig {
  int n_mfcc = 20;
  int n_mels = 40;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  double preemphasis = 0.97;
  int delta_halfwidth = 2;

  void validate() const {
    if (n_mfcc <= 0 || n_mels <= 0) throw Error("n_mfcc and n_mels must be > 0");
    if (n_mfcc > n_mels) throw Error("n_mfcc must not exceed n_mels");
    if (!(frame_ms > hop_ms) || !(hop_ms > 0)) throw Error("require frame_ms > hop_ms > 0");
    if (delta_halfwidth < 1) throw Error("delta_halfwidth must be >= 1");
  }

  std::size_t frame_samples(double fs) const {
    return static_cast<std::size_t>(std::lround(frame_ms / 1000.0 * fs));
  }
  std::size_t hop_samples(double fs) const {
    return static_cast<std::size_t>(std::lround(hop_ms / 1000.0 * fs));
  }
};

struct AudioFeatureVector {
  std::array<double, 120> values{};
};

inline void to_json(json& j, const AudioFeatureVector& v) {
  j = json(std::vector<double>(v.values.begin(), v.values.end()));
}

inline std::vector<std::string> feature_names() {
  std::vector<std::string> names;
  names.reserve(120);
  for (const char* stat : {"mean", "std"})
    for (const char* group : {"mfcc", "delta", "delta2"})
      for (int c = 1; c <= 20; ++c) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%s_%s_%02d", group, stat, c);
        names.emplace_back(buf);
      }
  return names;
}

// floor((len - frame) / hop) + 1; requires len >= frame.
inline std::size_t frame_count(std::size_t len, std::size_t frame, std::size_t hop) {
  if (len < frame) return 0;
  return (len - frame) / hop + 1;
}

inline double mel_from_hz(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double hz_from_mel(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Filter edge frequencies: n_mels + 2 points equally spaced on the mel scale
// over [0, fs/2]. Center of filter i (0-based) is point i + 1.
inline std::vector<double> mel_points_hz(const MfccConfig& cfg, double fs) {
  const double top = mel_from_hz(fs / 2.0);
  std::vector<double> pts(static_cast<std::size_t>(cfg.n_mels) + 2);
  for (std::size_t i = 0; i < pts.size(); ++i)
    pts[i] = hz_from_mel(top * static_cast<double>(i) / static_cast<double>(pts.size() - 1));
  return pts;
}

inline double mel_center_hz(const MfccConfig& cfg, double fs, int filter_index) {
  return mel_points_hz(cfg, fs)[static_cast<std::size_t>(filter_index) + 1];
}

namespace detail {

struct MelBank {
  std::size_t n_bins = 0;  // n_fft/2 + 1
  // Per filter: first bin with nonzero weight and the weight run.
  std::vector<std::size_t> start;
  std::vector<std::vector<double>> weights;
};

// Triangular weights evaluated at bin frequencies k*fs/n_fft.
inline MelBank make_mel_bank(const MfccConfig& cfg, double fs, std::size_t n_fft) {
  const auto pts = mel_points_hz(cfg, fs);
  MelBank bank;
  bank.n_bins = n_fft / 2 + 1;
  bank.start.resize(static_cast<std::size_t>(cfg.n_mels));
  bank.weights.resize(static_cast<std::size_t>(cfg.n_mels));
  const double bin_hz = fs / static_cast<double>(n_fft);
  for (int f = 0; f < cfg.n_mels; ++f) {
    const double lo = pts[static_cast<std::size_t>(f)];
    const double mid = pts[static_cast<std::size_t>(f) + 1];
    const double hi = pts[static_cast<std::size_t>(f) + 2];
    std::vector<double> w;
    std::size_t first = 0;
    bool seen = false;
    for (std::size_t k = 0; k < bank.n_bins; ++k) {
      const double hz = static_cast<double>(k) * bin_hz;
      double v = 0.0;
      if (hz > lo && hz < mid)
        v = (hz - lo) / (mid - lo);
      else if (hz == mid)
        v = 1.0;
      else if (hz > mid && hz < hi)
        v = (hi - hz) / (hi - mid);
      if (v > 0.0) {
        if (!seen) {
          first = k;
          seen = true;
        }
        w.push_back(v);
      } else if (seen) {
        break;
      }
    }
    bank.start[static_cast<std::size_t>(f)] = first;
    bank.weights[static_cast<std::size_t>(f)] = std::move(w);
  }
  return bank;
}

// Orthonormal type-II DCT matrix, n_mfcc x n_mels.
inline std::vector<double> make_dct(int n_mfcc, int n_mels) {
  std::vector<double> dct(static_cast<std::size_t>(n_mfcc) * static_cast<std::size_t>(n_mels));
  const double M = static_cast<double>(n_mels);
  for (int k = 0; k < n_mfcc; ++k) {
    const double scale = (k == 0) ? std::sqrt(1.0 / M) : std::sqrt(2.0 / M);
    for (int m = 0; m < n_mels; ++m)
      dct[static_cast<std::size_t>(k) * static_cast<std::size_t>(n_mels) +
          static_cast<std::size_t>(m)] =
          scale * std::cos(std::numbers::pi * (2.0 * m + 1.0) * k / (2.0 * M));
  }
  return dct;
}

inline std::vector<double> preemphasize(const std::vector<double>& x, double alpha) {
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  y[0] = x[0];
  for (std::size_t i = 1; i < x.size(); ++i) y[i] = x[i] - alpha * x[i - 1];
  return y;
}

}  // namespace detail

using Matrix = std::vector<std::vector<double>>;  // frames x coefficients

// Per-frame mel filter energies (before the log), frames x n_mels. Exposed
// for analysis and the tone-at-filter-center checks.
inline Matrix mel_filter_energies(const AudioClip& clip, const MfccConfig& cfg = {}) {
  cfg.validate();
  if (clip.sample_rate_hz <= 0) throw Error("audio sample rate must be > 0");
  const std::size_t frame = cfg.frame_samples(clip.sample_rate_hz);
  const std::size_t hop = cfg.hop_samples(clip.sample_rate_hz);
  if (frame == 0 || hop == 0) throw Error("frame and hop must span at least one sample");
  if (clip.samples.size() < frame)
    throw ClipTooShort("clip shorter than one frame (" + std::to_string(frame) + " samples)");
  const std::size_t n_frames = frame_count(clip.samples.size(), frame, hop);
  const std::size_t n_fft = dsp::next_pow2(frame);
  const auto pre = detail::preemphasize(clip.samples, cfg.preemphasis);
  const auto window = dsp::hann_window(frame);
  const auto bank = detail::make_mel_bank(cfg, clip.sample_rate_hz, n_fft);
  const dsp::FftPlan plan(n_fft);
  Matrix energies(n_frames, std::vector<double>(static_cast<std::size_t>(cfg.n_mels), 0.0));
  std::vector<std::complex<double>> buf(n_fft);
  std::vector<double> power(n_fft / 2 + 1);
  for (std::size_t t = 0; t < n_frames; ++t) {
    const std::size_t off = t * hop;
    for (std::size_t i = 0; i < frame; ++i) buf[i] = pre[off + i] * window[i];
    for (std::size_t i = frame; i < n_fft; ++i) buf[i] = 0.0;
    plan.forward(buf);
    for (std::size_t k = 0; k <= n_fft / 2; ++k) power[k] = std::norm(buf[k]);
    for (int f = 0; f < cfg.n_mels; ++f) {
      const auto& w = bank.weights[static_cast<std::size_t>(f)];
      const std::size_t s = bank.start[static_cast<std::size_t>(f)];
      double acc = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * power[s + i];
      energies[t][static_cast<std::size_t>(f)] = acc;
    }
  }
  return energies;
}

// frames x n_mfcc matrix of cepstral coefficients.
inline Matrix mfcc_frames(const AudioClip& clip, const MfccConfig& cfg = {}) {
  const Matrix energies = mel_filter_energies(clip, cfg);
  const auto dct = detail::make_dct(cfg.n_mfcc, cfg.n_mels);
  Matrix out(energies.size(), std::vector<double>(static_cast<std::size_t>(cfg.n_mfcc), 0.0));
  std::vector<double> logs(static_cast<std::size_t>(cfg.n_mels));
  for (std::size_t t = 0; t < energies.size(); ++t) {
    for (int m = 0; m < cfg.n_mels; ++m)
      logs[static_cast<std::size_t>(m)] =
          std::log(std::max(energies[t][static_cast<std::size_t>(m)], kLogFloor));
    for (int k = 0; k < cfg.n_mfcc; ++k) {
      double acc = 0.0;
      const double* row = dct.data() + static_cast<std::size_t>(k) * cfg.n_mels;
      for (int m = 0; m < cfg.n_mels; ++m) acc += row[m] * logs[static_cast<std::size_t>(m)];
      out[t][static_cast<std::size_t>(k)] = acc;
    }
  }
  return out;
}

// Regression delta: d_t = sum_{n=1..N} n*(c_{t+n} - c_{t-n}) / (2*sum n^2),
// edge frames padded by replication.
inline Matrix delta(const Matrix& frames, int halfwidth) {
  if (halfwidth < 1) throw Error("delta halfwidth must be >= 1");
  if (frames.empty()) throw Error("delta input must be nonempty");
  const std::size_t n_frames = frames.size();
  const std::size_t n_coef = frames[0].size();
  double denom = 0.0;
  for (int n = 1; n <= halfwidth; ++n) denom += static_cast<double>(n) * n;
  denom *= 2.0;
  Matrix out(n_frames, std::vector<double>(n_coef, 0.0));
  const auto clamp = [&](std::ptrdiff_t t) {
    if (t < 0) return std::size_t{0};
    if (t >= static_cast<std::ptrdiff_t>(n_frames)) return n_frames - 1;
    return static_cast<std::size_t>(t);
  };
  for (std::size_t t = 0; t < n_frames; ++t) {
    for (std::size_t j = 0; j < n_coef; ++j) {
      double acc = 0.0;
      for (int n = 1; n <= halfwidth; ++n)
        acc += static_cast<double>(n) *
               (frames[clamp(static_cast<std::ptrdiff_t>(t) + n)][j] -
                frames[clamp(static_cast<std::ptrdiff_t>(t) - n)][j]);
      out[t][j] = acc / denom;
    }
  }
  return out;
}

// [mean(mfcc 1..20), mean(delta), mean(delta2), std(mfcc), std(delta), std(delta2)].
inline AudioFeatureVector extract_audio_features(const AudioClip& clip,
                                                 const MfccConfig& cfg = {}) {
  const Matrix mfcc = mfcc_frames(clip, cfg);
  const Matrix d1 = delta(mfcc, cfg.delta_halfwidth);
  const Matrix d2 = delta(d1, cfg.delta_halfwidth);
  AudioFeatureVector out;
  const double n = static_cast<double>(mfcc.size());
  const auto summarize = [&](const Matrix& m, std::size_t mean_off, std::size_t std_off) {
    for (int c = 0; c < cfg.n_mfcc; ++c) {
      double mean = 0.0;
      for (const auto& row : m) mean += row[static_cast<std::size_t>(c)];
      mean /= n;
      double var = 0.0;
      for (const auto& row : m) {
        const double d = row[static_cast<std::size_t>(c)] - mean;
        var += d * d;
      }
      var /= n;
      out.values[mean_off + static_cast<std::size_t>(c)] = mean;
      out.values[std_off + static_cast<std::size_t>(c)] = std::sqrt(var);
    }
  };
  summarize(mfcc, 0, 60);
  summarize(d1, 20, 80);
  summarize(d2, 40, 100);
  return out;
}

}  // namespace dailylog::audio
