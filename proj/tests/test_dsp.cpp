#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dailylog/dsp.hpp"
#include "oracles.hpp"

using namespace dailylog;

TEST_CASE("radix-2 FFT matches the direct DFT") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (std::size_t n : {8u, 64u, 256u}) {
    std::vector<double> x(n);
    for (double& v : x) v = dist(rng);
    const auto fast = dsp::dft(x);
    const auto slow = oracle::direct_dft(x);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(std::abs(fast[k].real() - slow[k].real()) < 1e-9);
      CHECK(std::abs(fast[k].imag() - slow[k].imag()) < 1e-9);
    }
  }
}

TEST_CASE("Bluestein handles arbitrary lengths") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (std::size_t n : {3u, 10u, 100u, 37u, 500u}) {
    std::vector<double> x(n);
    for (double& v : x) v = dist(rng);
    const auto fast = dsp::dft(x);
    const auto slow = oracle::direct_dft(x);
    REQUIRE(fast.size() == n);
    for (std::size_t k = 0; k < n; ++k)
      CHECK(std::abs(fast[k] - slow[k]) < 1e-8 * (1.0 + std::abs(slow[k])));
  }
}

TEST_CASE("hann window endpoints and symmetry") {
  const auto w = dsp::hann_window(9);
  CHECK(w[0] == doctest::Approx(0.0));
  CHECK(w[8] == doctest::Approx(0.0));
  CHECK(w[4] == doctest::Approx(1.0));
  for (std::size_t i = 0; i < 9; ++i) CHECK(w[i] == doctest::Approx(w[8 - i]));
  CHECK(dsp::hann_window(1)[0] == 1.0);
}

TEST_CASE("next_pow2") {
  CHECK(dsp::next_pow2(1) == 1);
  CHECK(dsp::next_pow2(2) == 2);
  CHECK(dsp::next_pow2(3) == 4);
  CHECK(dsp::next_pow2(400) == 512);
  CHECK(dsp::next_pow2(512) == 512);
}

TEST_CASE("one_sided_power drops DC and keeps Nyquist") {
  std::vector<double> x = {1, -1, 1, -1, 1, -1, 1, -1};  // pure Nyquist tone
  const auto p = dsp::one_sided_power(dsp::dft(x));
  REQUIRE(p.size() == 4);
  CHECK(p[3] == doctest::Approx(64.0));  // |X_4|^2 = (8)^2
  CHECK(p[0] == doctest::Approx(0.0));
  CHECK(p[1] == doctest::Approx(0.0));
}
