#include "ppg2ecg/eval/detectors.hpp"

#include <algorithm>
#include <cmath>

#include "ppg2ecg/signal/filter.hpp"

namespace ppg2ecg::eval {
namespace {

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
  const double hi = v[n / 2];
  if (n % 2) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2));
  return 0.5 * (lo + hi);
}

// Indices i with x[i-1] < x[i] >= x[i+1].
std::vector<std::size_t> local_maxima(std::span<const double> x) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    if (x[i] > x[i - 1] && x[i] >= x[i + 1]) out.push_back(i);
  }
  return out;
}

// Centred moving average of width `w` with mirrored edges.
std::vector<double> moving_average(std::span<const double> x, std::size_t w) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(w / 2);
  auto at = [&](std::ptrdiff_t i) {
    if (n == 1) return x[0];
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
    return x[static_cast<std::size_t>(i)];
  };
  std::vector<double> out(x.size());
  double acc = 0;
  const std::ptrdiff_t first = -half, last = first + static_cast<std::ptrdiff_t>(w);
  for (std::ptrdiff_t j = first; j < last; ++j) acc += at(j);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = acc / static_cast<double>(w);
    acc += at(i + last) - at(i + first);
  }
  return out;
}

bool flat(std::span<const double> x) {
  if (x.empty()) return true;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *lo == *hi;
}

// Raw slopes in [c - r, c + r), clipped to the signal.
std::vector<double> slopes_around(std::span<const double> x, std::size_t c, std::size_t r) {
  const std::size_t a = c >= r ? c - r : 0;
  const std::size_t b = std::min(x.size(), c + r);
  std::vector<double> d;
  for (std::size_t i = a; i + 1 < b; ++i) d.push_back(x[i + 1] - x[i]);
  return d;
}

// Ring buffer of the most recent values, median-queried.
struct Ring {
  std::vector<double> v;
  std::size_t next = 0;
  void push(double x) {
    v[next] = x;
    next = (next + 1) % v.size();
  }
  double med() const { return median(v); }
};

}  // namespace

std::vector<std::size_t> detect_qrs(std::span<const double> ecg, double rate) {
  const std::size_t n = ecg.size();
  if (n < static_cast<std::size_t>(rate) || flat(ecg)) return {};

  const auto v1s = static_cast<std::size_t>(rate);
  const double th_elapsed = std::ceil(0.36 * rate);
  const auto lim = static_cast<std::size_t>(std::ceil(0.2 * rate));
  const auto diff_nr = static_cast<std::size_t>(std::ceil(0.045 * rate));
  const std::size_t init = std::max<std::size_t>(1, std::min<std::size_t>(8, n / v1s));

  const auto sos = signal::design_butterworth_bandpass(2, 8.0, 16.0, rate);
  const auto filtered = signal::sosfiltfilt(sos, ecg);
  std::vector<double> dx(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) dx[i] = std::abs(filtered[i + 1] - filtered[i]) * rate;
  dx = moving_average(dx, std::max<std::size_t>(1, static_cast<std::size_t>(0.08 * rate)));

  Ring qrs{std::vector<double>(init, 0.0)}, noise{std::vector<double>(init, 0.0)},
      rr{std::vector<double>(init, rate)};
  for (std::size_t i = 0; i < init; ++i) {
    const std::size_t a = i * v1s, b = std::min(dx.size(), a + v1s);
    if (a >= b) break;
    const std::span<const double> part(dx.data() + a, b - a);
    double best = -1;
    for (std::size_t p : local_maxima(part)) best = std::max(best, part[p]);
    if (best >= 0) qrs.v[i] = best;
  }

  const auto all_peaks = local_maxima(dx);
  double dt = noise.med() + 0.475 * (qrs.med() - noise.med());
  std::vector<std::size_t> beats;

  auto record_beat = [&](std::size_t f) {
    if (!beats.empty()) rr.push(static_cast<double>(f - beats.back()));
    beats.push_back(f);
    qrs.push(dx[f]);
  };

  for (std::size_t pi = 0; pi < all_peaks.size(); ++pi) {
    const std::size_t f = all_peaks[pi];
    // Defer to a larger peak within 200 ms on either side.
    bool dominated = false;
    for (std::size_t j = pi; j-- > 0 && all_peaks[j] + lim > f;) dominated |= dx[all_peaks[j]] > dx[f];
    for (std::size_t j = pi + 1; j < all_peaks.size() && all_peaks[j] < f + lim; ++j) {
      dominated |= dx[all_peaks[j]] > dx[f];
    }
    if (dominated) continue;

    if (dx[f] > dt) {
      const auto now = slopes_around(ecg, f, diff_nr);
      const auto rising = std::count_if(now.begin(), now.end(), [](double d) { return d > 0; });
      if (rising == 0 || rising == static_cast<std::ptrdiff_t>(now.size())) continue;
      if (!beats.empty()) {
        const std::size_t prev = beats.back();
        if (static_cast<double>(f - prev) < th_elapsed) {
          // A much shallower upstroke shortly after a beat is a T wave.
          const auto before = slopes_around(ecg, prev, diff_nr);
          if (*std::max_element(now.begin(), now.end()) <
              0.5 * *std::max_element(before.begin(), before.end())) {
            continue;
          }
        }
      }
      if (dx[f] >= 3.0 * qrs.med()) continue;
      record_beat(f);
    } else {
      // Search back for a missed beat after a long pause.
      const double elapsed = beats.empty() ? 0.0 : static_cast<double>(f - beats.back());
      if (beats.size() >= 2 && elapsed >= 1.5 * rr.med() && elapsed > th_elapsed) {
        if (dx[f] > 0.5 * dt) record_beat(f);
      } else {
        noise.push(dx[f]);
      }
    }
    dt = noise.med() + 0.475 * (qrs.med() - noise.med());
  }

  // Move each detection to the largest deflection from the local median.
  std::vector<std::size_t> refined;
  std::vector<double> strength;
  for (std::size_t b : beats) {
    const std::size_t a = b >= lim ? b - lim : 0;
    const std::size_t e = std::min(n, b + lim);
    const std::vector<double> w(ecg.begin() + static_cast<std::ptrdiff_t>(a),
                                ecg.begin() + static_cast<std::ptrdiff_t>(e));
    const double base = median(w);
    std::size_t best = a;
    for (std::size_t i = a; i < e; ++i) {
      if (std::abs(ecg[i] - base) > std::abs(ecg[best] - base)) best = i;
    }
    const double s = std::abs(ecg[best] - base);
    if (!refined.empty() && best < refined.back() + lim) {
      if (s > strength.back()) {
        refined.back() = best;
        strength.back() = s;
      }
      continue;
    }
    refined.push_back(best);
    strength.push_back(s);
  }
  return refined;
}

std::vector<std::size_t> detect_ppg_peaks(std::span<const double> ppg, double rate) {
  const std::size_t n = ppg.size();
  if (n < static_cast<std::size_t>(rate) || flat(ppg)) return {};
  const auto sos = signal::design_butterworth_bandpass(3, 0.5, 8.0, rate);
  auto clipped = signal::sosfiltfilt(sos, ppg);
  std::vector<double> sq(n);
  double mean_sq = 0;
  for (std::size_t i = 0; i < n; ++i) {
    clipped[i] = std::max(clipped[i], 0.0);
    sq[i] = clipped[i] * clipped[i];
    mean_sq += sq[i];
  }
  mean_sq /= static_cast<double>(n);
  const auto peak_w = static_cast<std::size_t>(std::lround(0.111 * rate));
  const auto beat_w = static_cast<std::size_t>(std::lround(0.667 * rate));
  const auto min_delay = static_cast<std::size_t>(std::lround(0.3 * rate));
  const auto ma_peak = moving_average(sq, peak_w);
  const auto ma_beat = moving_average(sq, beat_w);

  std::vector<std::size_t> peaks;
  std::size_t i = 1;
  while (i < n) {
    const bool rise = ma_peak[i] > ma_beat[i] + 0.02 * mean_sq &&
                      !(ma_peak[i - 1] > ma_beat[i - 1] + 0.02 * mean_sq);
    if (!rise) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < n && ma_peak[end] > ma_beat[end] + 0.02 * mean_sq) ++end;
    if (end >= n) break;  // block runs past the window
    if (end - i >= peak_w) {
      const std::span<const double> block(clipped.data() + i, end - i);
      std::size_t best = 0;
      bool found = false;
      for (std::size_t p : local_maxima(block)) {
        if (!found || block[p] > block[best]) best = p;
        found = true;
      }
      const std::size_t peak = i + best;
      if (found && (peaks.empty() || peak - peaks.back() > min_delay)) peaks.push_back(peak);
    }
    i = end + 1;
  }
  return peaks;
}

std::optional<double> heart_rate(std::span<const std::size_t> peaks, double rate) {
  if (peaks.size() < 2) return std::nullopt;
  const double span = static_cast<double>(peaks.back()) - static_cast<double>(peaks.front());
  if (span <= 0) return std::nullopt;
  const double hr = 60.0 * static_cast<double>(peaks.size() - 1) * rate / span;
  if (hr < kMinHeartRate || hr > kMaxHeartRate) return std::nullopt;
  return hr;
}

}  // namespace ppg2ecg::eval
