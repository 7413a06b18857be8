#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace ppg2ecg::eval {

inline constexpr double kMinHeartRate = 20.0;
inline constexpr double kMaxHeartRate = 300.0;

/// Hamilton-style QRS detector. Band-pass 8-16 Hz, differentiate, rectify,
/// 80 ms moving average; adaptive detection threshold from median peak and
/// noise levels, 200 ms refractory, T-wave slope test within 360 ms and
/// search-back after 1.5 median RR intervals. Detections are moved to the
/// largest deflection within 200 ms. Returns strictly increasing indices
/// spaced at least 200 ms apart.
std::vector<std::size_t> detect_qrs(std::span<const double> ecg, double rate);

/// Elgendi systolic peak detector: Butterworth 0.5-8 Hz, clip negatives,
/// square, 111 ms and 667 ms moving averages, blocks where the short average
/// exceeds the long one plus 2% of the mean energy, highest maximum per block
/// of at least 111 ms, 300 ms minimum spacing.
std::vector<std::size_t> detect_ppg_peaks(std::span<const double> ppg, double rate);

/// 60 / mean inter-peak interval, or nullopt with fewer than two peaks or a
/// result outside [20, 300] bpm.
std::optional<double> heart_rate(std::span<const std::size_t> peaks, double rate);

}  // namespace ppg2ecg::eval
