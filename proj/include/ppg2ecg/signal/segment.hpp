#pragma once

#include <cstddef>
#include <vector>

#include "ppg2ecg/signal/waveform.hpp"

namespace ppg2ecg::signal {

/// floor((length - window) / hop) + 1 when length >= window, else 0.
std::size_t segment_count(std::size_t length, std::size_t window, std::size_t hop);

/// Window length and hop in samples; throws InputError unless both durations
/// are whole sample counts and hop <= window.
struct WindowSamples {
  std::size_t window = 0;
  std::size_t hop = 0;
};
WindowSamples window_samples(double rate, double window_s, double hop_s);

/// Cuts overlapping windows starting at i * hop. Each window takes the
/// activity label covering its midpoint.
std::vector<Segment> segment(const Waveform& w, double window_s, double hop_s);

}  // namespace ppg2ecg::signal
