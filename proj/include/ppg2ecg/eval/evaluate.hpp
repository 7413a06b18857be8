#pragma once

#include <span>
#include <vector>

#include "ppg2ecg/dataset/pairs.hpp"
#include "ppg2ecg/eval/metrics.hpp"
#include "ppg2ecg/model/generator.hpp"

namespace ppg2ecg::eval {

/// Runs the generator over every PPG window; result is laid out like
/// `pairs.ecg`. Window length must suit the generator's strides.
std::vector<float> synthesize(const model::Generator<float>& generator,
                              const dataset::PairSet& pairs, int batch_size = 32);

/// Heart rates of the real ECG, the synthetic ECG and (optionally) the PPG
/// baseline for each window.
std::vector<EvalRecord> evaluate_windows(const dataset::PairSet& pairs,
                                         std::span<const float> synthetic, bool ppg_baseline);

}  // namespace ppg2ecg::eval
