#include "ppg2ecg/signal/waveform.hpp"

#include <string>

#include "ppg2ecg/error.hpp"

namespace ppg2ecg::signal {

std::string_view to_string(Channel c) {
  return c == Channel::PPG ? "ppg" : "ecg";
}

void validate(const Waveform& w) {
  if (!(w.rate > 0.0)) {
    throw InputError("waveform '" + w.subject + "': sampling rate must be positive");
  }
  std::size_t previous_end = 0;
  for (const auto& a : w.activities) {
    if (a.start >= a.end || a.end > w.samples.size()) {
      throw InputError("waveform '" + w.subject + "': activity '" + a.label +
                       "' lies outside the sample range");
    }
    if (a.start < previous_end) {
      throw InputError("waveform '" + w.subject + "': activity intervals overlap or are unsorted");
    }
    previous_end = a.end;
  }
}

std::string label_at(const std::vector<ActivityInterval>& activities, std::size_t index) {
  // Intervals are sorted; a linear scan is fine for the handful per subject.
  for (const auto& a : activities) {
    if (index < a.start) break;
    if (index < a.end) return a.label;
  }
  return std::string(kTransientLabel);
}

}  // namespace ppg2ecg::signal
