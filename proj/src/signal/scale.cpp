#include "ppg2ecg/signal/scale.hpp"

#include <algorithm>

#include "ppg2ecg/error.hpp"

namespace ppg2ecg::signal {

std::vector<double> minmax_scale(std::span<const double> x) {
  if (x.empty()) throw InputError("minmax_scale: empty input");
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> y(x.size(), 0.0);
  if (hi == lo) return y;
  const double span = hi - lo;
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = std::clamp(2.0 * (x[i] - lo) / span - 1.0, -1.0, 1.0);
  }
  // Pin the extremes so the endpoints are exact.
  y[static_cast<std::size_t>(lo_it - x.begin())] = -1.0;
  y[static_cast<std::size_t>(hi_it - x.begin())] = 1.0;
  return y;
}

Segment minmax_scale(const Segment& seg) {
  Segment out = seg;
  out.samples = minmax_scale(seg.samples);
  return out;
}

}  // namespace ppg2ecg::signal
