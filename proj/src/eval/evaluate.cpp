#include "ppg2ecg/eval/evaluate.hpp"

#include <algorithm>
#include <stdexcept>

#include "ppg2ecg/eval/detectors.hpp"

namespace ppg2ecg::eval {

std::vector<float> synthesize(const model::Generator<float>& generator,
                              const dataset::PairSet& pairs, int batch_size) {
  const std::size_t len = static_cast<std::size_t>(pairs.length);
  std::vector<float> out(pairs.size() * len);
  for (std::size_t start = 0; start < pairs.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t count = std::min(pairs.size() - start, static_cast<std::size_t>(batch_size));
    model::Tensor<float> x(static_cast<int>(count), 1, pairs.length);
    std::copy_n(pairs.ppg.begin() + static_cast<std::ptrdiff_t>(start * len), count * len,
                x.data.begin());
    const auto y = generator.forward(x);
    std::copy(y.data.begin(), y.data.end(), out.begin() + static_cast<std::ptrdiff_t>(start * len));
  }
  return out;
}

std::vector<EvalRecord> evaluate_windows(const dataset::PairSet& pairs,
                                         std::span<const float> synthetic, bool ppg_baseline) {
  const std::size_t len = static_cast<std::size_t>(pairs.length);
  if (synthetic.size() != pairs.size() * len) {
    throw std::invalid_argument("synthetic signal count does not match the pair store");
  }
  std::vector<EvalRecord> records(pairs.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(pairs.size()); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const auto& info = pairs.info[k];
    auto as_double = [](std::span<const float> s) { return std::vector<double>(s.begin(), s.end()); };
    const auto real = as_double(pairs.ecg_item(k));
    const auto synth = as_double(synthetic.subspan(k * len, len));
    EvalRecord r{info.subject, info.activity, info.origin, {}, {}, {}};
    r.hr_real = heart_rate(detect_qrs(real, pairs.rate), pairs.rate);
    r.hr_synth = heart_rate(detect_qrs(synth, pairs.rate), pairs.rate);
    if (ppg_baseline) {
      r.hr_ppg = heart_rate(detect_ppg_peaks(as_double(pairs.ppg_item(k)), pairs.rate), pairs.rate);
    }
    records[k] = std::move(r);
  }
  return records;
}

}  // namespace ppg2ecg::eval
