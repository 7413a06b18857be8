#pragma once

#include <span>
#include <vector>

#include "ppg2ecg/signal/waveform.hpp"

namespace ppg2ecg::signal {

/// Windowed-sinc polyphase resampler parameters.
struct ResamplerOptions {
  double kaiser_beta = 8.0;
  /// Low-pass cutoff as a fraction of the lower of the two Nyquist rates.
  double cutoff_fraction = 0.9;
  /// One-sided filter support, counted in samples of the lower rate.
  int half_width = 64;
};

/// Resamples `x` from `rate` to `target_rate`. The output has
/// round(len * target_rate / rate) samples. The anti-alias/anti-image
/// low-pass is always applied; edges are extended by point reflection.
/// Identical rates return the input unchanged.
std::vector<double> resample(std::span<const double> x, double rate, double target_rate,
                             const ResamplerOptions& options = {});

/// Resamples a waveform and remaps its activity intervals proportionally.
Waveform resample(const Waveform& w, double target_rate, const ResamplerOptions& options = {});

}  // namespace ppg2ecg::signal
