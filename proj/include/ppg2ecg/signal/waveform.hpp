#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ppg2ecg::signal {

enum class Channel { PPG, ECG };

std::string_view to_string(Channel c);

/// Label for windows that fall between annotated activities.
inline constexpr std::string_view kTransientLabel = "transient";

/// Half-open sample interval [start, end) carrying an activity label.
struct ActivityInterval {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;
};

struct Waveform {
  std::vector<double> samples;
  double rate = 0.0;
  Channel channel = Channel::PPG;
  std::string subject;
  std::vector<ActivityInterval> activities;

  std::size_t size() const { return samples.size(); }
  double duration_s() const { return static_cast<double>(samples.size()) / rate; }
};

/// Throws InputError unless rate > 0 and the activity intervals are sorted,
/// non-overlapping and inside the sample range.
void validate(const Waveform& w);

/// Label of the interval covering `index`, or the transient label.
std::string label_at(const std::vector<ActivityInterval>& activities, std::size_t index);

/// A fixed-length window cut from a Waveform.
struct Segment {
  std::vector<double> samples;
  double rate = 0.0;
  Channel channel = Channel::PPG;
  std::string subject;
  std::string activity_label;
  std::size_t origin_index = 0;

  std::size_t size() const { return samples.size(); }
};

}  // namespace ppg2ecg::signal
