#pragma once

// Interchange fixtures: wrist-like PPG at 64 Hz and chest-like ECG at 700 Hz
// driven by the same beat times.

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "ppg2ecg/dataset/interchange.hpp"

namespace ppg2ecg::testing {

struct SubjectFixture {
  double seconds = 60;
  double bpm = 72;
  double bpm_swing = 8;  // slow sinusoidal heart-rate variation
  double noise = 0.02;
  std::uint64_t seed = 1;
};

inline dataset::SubjectRecord fixture_record(const std::string& id, const SubjectFixture& f) {
  dataset::SubjectRecord r;
  r.subject = id;
  r.ppg = {{}, 64.0, signal::Channel::PPG, id, {}};
  r.ecg = {{}, 700.0, signal::Channel::ECG, id, {}};
  r.ppg.samples.assign(static_cast<std::size_t>(f.seconds * 64), 0.0);
  r.ecg.samples.assign(static_cast<std::size_t>(f.seconds * 700), 0.0);
  std::mt19937_64 rng(f.seed);
  std::normal_distribution<double> nd(0.0, f.noise);
  std::vector<double> beats;
  for (double t = 0.3; t < f.seconds + 1; ) {
    beats.push_back(t);
    const double bpm = f.bpm + f.bpm_swing * std::sin(2 * std::numbers::pi * t / 40.0);
    t += 60.0 / bpm;
  }
  for (std::size_t i = 0; i < r.ecg.size(); ++i) {
    const double t = i / 700.0;
    double v = nd(rng);
    for (double b : beats) {
      const double d = t - b;
      if (std::abs(d) > 0.5) continue;
      v += std::exp(-0.5 * d * d / (0.012 * 0.012)) - 0.15 * std::exp(-0.5 * (d - 0.03) * (d - 0.03) / (0.01 * 0.01)) +
           0.2 * std::exp(-0.5 * (d - 0.25) * (d - 0.25) / (0.04 * 0.04));
    }
    r.ecg.samples[i] = v;
  }
  for (std::size_t i = 0; i < r.ppg.size(); ++i) {
    const double t = i / 64.0;
    double v = nd(rng);
    for (double b : beats) {
      const double d = t - b - 0.2;
      if (std::abs(d) < 0.25) v += 0.5 * (1 + std::cos(std::numbers::pi * d / 0.25));
    }
    r.ppg.samples[i] = v;
  }
  r.activities = {{0, f.seconds / 2, "sitting"}, {f.seconds / 2, f.seconds, "walking"}};
  return r;
}

inline void write_fixture(const std::filesystem::path& dir, const std::string& id, const SubjectFixture& f = {}) {
  dataset::write_subject(dir, fixture_record(id, f));
}

}  // namespace ppg2ecg::testing
