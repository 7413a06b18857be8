#include "ppg2ecg/signal/segment.hpp"

#include <cmath>
#include <string>

#include "ppg2ecg/error.hpp"

namespace ppg2ecg::signal {
namespace {

std::size_t whole_samples(double seconds, double rate, const char* what) {
  const double n = seconds * rate;
  const double rounded = std::round(n);
  if (!(rounded >= 1.0) || std::abs(n - rounded) > 1e-9 * std::max(1.0, n)) {
    throw InputError(std::string("segment: ") + what + " of " + std::to_string(seconds) +
                     " s is not a positive whole number of samples at " + std::to_string(rate) +
                     " Hz");
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace

std::size_t segment_count(std::size_t length, std::size_t window, std::size_t hop) {
  if (window == 0 || hop == 0 || length < window) return 0;
  return (length - window) / hop + 1;
}

WindowSamples window_samples(double rate, double window_s, double hop_s) {
  WindowSamples ws{whole_samples(window_s, rate, "window"), whole_samples(hop_s, rate, "hop")};
  if (ws.hop > ws.window) throw InputError("segment: hop must not exceed the window");
  return ws;
}

std::vector<Segment> segment(const Waveform& w, double window_s, double hop_s) {
  const WindowSamples ws = window_samples(w.rate, window_s, hop_s);
  const std::size_t count = segment_count(w.samples.size(), ws.window, ws.hop);
  std::vector<Segment> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t start = i * ws.hop;
    Segment s;
    s.samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(start),
                     w.samples.begin() + static_cast<std::ptrdiff_t>(start + ws.window));
    s.rate = w.rate;
    s.channel = w.channel;
    s.subject = w.subject;
    s.activity_label = label_at(w.activities, start + ws.window / 2);
    s.origin_index = start;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ppg2ecg::signal
