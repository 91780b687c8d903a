#pragma once
// FFT (radix-2 plus Bluestein for arbitrary lengths) and window helpers
// shared by the IMU and audio feature extractors.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "dailylog/common.hpp"

namespace dailylog::dsp {

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Symmetric Hann window; w[n] = 0.5*(1 - cos(2*pi*n/(N-1))), w = {1} for N == 1.
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  const double k = 2.0 * std::numbers::pi / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) w[i] = 0.5 * (1.0 - std::cos(k * static_cast<double>(i)));
  return w;
}

// In-place iterative radix-2 FFT with precomputed twiddles and bit-reversal.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    if (n_ == 0 || (n_ & (n_ - 1)) != 0) throw Error("FftPlan size must be a power of two");
    bitrev_.resize(n_);
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < n_) ++log2n;
    for (std::size_t i = 0; i < n_; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < log2n; ++b)
        if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
      bitrev_[i] = r;
    }
    twiddle_.resize(n_ / 2);
    for (std::size_t k = 0; k < n_ / 2; ++k) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_);
      twiddle_[k] = {std::cos(ang), std::sin(ang)};
    }
  }

  std::size_t size() const { return n_; }

  void forward(std::vector<std::complex<double>>& a) const { transform(a, false); }
  void inverse(std::vector<std::complex<double>>& a) const {
    transform(a, true);
    const double inv = 1.0 / static_cast<double>(n_);
    for (auto& v : a) v *= inv;
  }

 private:
  void transform(std::vector<std::complex<double>>& a, bool invert) const {
    if (a.size() != n_) throw Error("FftPlan input size mismatch");
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j = bitrev_[i];
      if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t step = n_ / len;
      for (std::size_t i = 0; i < n_; i += len) {
        for (std::size_t k = 0; k < len / 2; ++k) {
          std::complex<double> w = twiddle_[k * step];
          if (invert) w = std::conj(w);
          const std::complex<double> u = a[i + k];
          const std::complex<double> v = a[i + k + len / 2] * w;
          a[i + k] = u + v;
          a[i + k + len / 2] = u - v;
        }
      }
    }
  }

  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  std::vector<std::complex<double>> twiddle_;
};

// DFT of arbitrary length. Power-of-two inputs run straight through the
// radix-2 plan; other lengths use Bluestein's chirp-z reformulation.
inline std::vector<std::complex<double>> dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  if ((n & (n - 1)) == 0) {
    std::vector<std::complex<double>> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = x[i];
    FftPlan(n).forward(a);
    return a;
  }
  // Bluestein: X[k] = conj(w[k]) * IFFT(FFT(a) .* FFT(b))[k]
  // with a[i] = x[i]*conj(w[i]), b[i] = w[i], w[i] = exp(i*pi*i^2/n).
  const std::size_t m = next_pow2(2 * n - 1);
  std::vector<std::complex<double>> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    // i^2 mod 2n keeps the chirp argument small for long inputs.
    const std::size_t sq = (i * i) % (2 * n);
    const double ang = std::numbers::pi * static_cast<double>(sq) / static_cast<double>(n);
    w[i] = {std::cos(ang), std::sin(ang)};
  }
  std::vector<std::complex<double>> a(m, {0.0, 0.0}), b(m, {0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) a[i] = x[i] * std::conj(w[i]);
  b[0] = w[0];
  for (std::size_t i = 1; i < n; ++i) b[i] = b[m - i] = w[i];
  FftPlan plan(m);
  plan.forward(a);
  plan.forward(b);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  plan.inverse(a);
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * std::conj(w[k]);
  return out;
}

// One-sided power spectrum |X_k|^2 for k = 1..floor(n/2) (DC excluded,
// Nyquist included when n is even).
inline std::vector<double> one_sided_power(const std::vector<std::complex<double>>& spectrum) {
  const std::size_t n = spectrum.size();
  std::vector<double> p;
  p.reserve(n / 2);
  for (std::size_t k = 1; k <= n / 2; ++k) p.push_back(std::norm(spectrum[k]));
  return p;
}

}  // namespace dailylog::dsp
