#pragma once

// Analytic test signals: beat trains with known rates.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace ppg2ecg::testing {

/// Gaussian QRS-like bumps (sigma in seconds) every 60/bpm seconds.
inline std::vector<double> qrs_train(double bpm, double rate, std::size_t n, double phase_s = 0.3,
                                     double sigma_s = 0.012) {
  std::vector<double> x(n, 0.0);
  const double period = 60.0 / bpm;
  for (double c = phase_s; c < n / rate + 1.0; c += period) {
    for (std::size_t i = 0; i < n; ++i) {
      const double t = i / rate - c;
      if (std::abs(t) < 8 * sigma_s) x[i] += std::exp(-0.5 * t * t / (sigma_s * sigma_s));
    }
  }
  return x;
}

/// Raised-cosine pulses of width `width_s` every 60/bpm seconds.
inline std::vector<double> pulse_train(double bpm, double rate, std::size_t n, double width_s = 0.4,
                                       double phase_s = 0.2) {
  std::vector<double> x(n, 0.0);
  const double period = 60.0 / bpm;
  for (double c = phase_s; c < n / rate + 1.0; c += period) {
    for (std::size_t i = 0; i < n; ++i) {
      const double t = i / rate - c;
      if (std::abs(t) < width_s / 2) x[i] += 0.5 * (1 + std::cos(2 * std::numbers::pi * t / width_s));
    }
  }
  return x;
}

inline double power(const std::vector<double>& x) {
  double mean = 0;
  for (double v : x) mean += v;
  mean /= x.size();
  double p = 0;
  for (double v : x) p += (v - mean) * (v - mean);
  return p / x.size();
}

/// Adds white Gaussian noise at the given SNR (signal variance over noise variance).
inline std::vector<double> add_noise(std::vector<double> x, double snr_db, std::uint64_t seed) {
  const double sigma = std::sqrt(power(x) / std::pow(10.0, snr_db / 10.0));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, sigma);
  for (double& v : x) v += nd(rng);
  return x;
}

}  // namespace ppg2ecg::testing
