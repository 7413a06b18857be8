#pragma once

#include <span>
#include <vector>

#include "ppg2ecg/signal/waveform.hpp"

namespace ppg2ecg::signal {

/// Affine map of the samples onto [-1, 1]. Constant input maps to all zeros.
/// Throws InputError on empty input.
std::vector<double> minmax_scale(std::span<const double> x);
Segment minmax_scale(const Segment& seg);

}  // namespace ppg2ecg::signal
