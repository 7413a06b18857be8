#include "ppg2ecg/signal/resample.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>

#include "ppg2ecg/error.hpp"

namespace ppg2ecg::signal {
namespace {

struct Ratio {
  std::int64_t up = 1;
  std::int64_t down = 1;
};

// Rates are expressed in millihertz so that fractional rates still reduce to
// a small rational factor.
Ratio rational_ratio(double rate, double target_rate) {
  const auto num = static_cast<std::int64_t>(std::llround(target_rate * 1000.0));
  const auto den = static_cast<std::int64_t>(std::llround(rate * 1000.0));
  if (num <= 0 || den <= 0) {
    throw InputError("resample: rates must be at least 1 mHz");
  }
  const std::int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  const std::int64_t q = a / b;
  return (a % b != 0 && a > 0) ? q + 1 : q;
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

std::vector<double> design_lowpass(const Ratio& r, double rate, double target_rate,
                                   const ResamplerOptions& opt, std::size_t half_len) {
  const double upsampled_rate = rate * static_cast<double>(r.up);
  const double cutoff_hz = opt.cutoff_fraction * 0.5 * std::min(rate, target_rate);
  const double fc = cutoff_hz / upsampled_rate;
  const std::size_t n = 2 * half_len + 1;
  const double i0_beta = std::cyl_bessel_i(0.0, opt.kaiser_beta);
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) - static_cast<double>(half_len);
    const double ratio = t / static_cast<double>(half_len);
    const double window =
        std::cyl_bessel_i(0.0, opt.kaiser_beta * std::sqrt(std::max(0.0, 1.0 - ratio * ratio))) /
        i0_beta;
    h[i] = 2.0 * fc * sinc(2.0 * fc * t) * window * static_cast<double>(r.up);
  }
  return h;
}

// Point reflection about the end samples keeps value and slope continuous.
double extended(std::span<const double> x, std::int64_t i) {
  const auto n = static_cast<std::int64_t>(x.size());
  if (i >= 0 && i < n) return x[static_cast<std::size_t>(i)];
  if (i < 0) {
    const std::int64_t m = std::min(-i, n - 1);
    return 2.0 * x.front() - x[static_cast<std::size_t>(m)];
  }
  const std::int64_t m = std::max<std::int64_t>(2 * (n - 1) - i, 0);
  return 2.0 * x.back() - x[static_cast<std::size_t>(m)];
}

}  // namespace

std::vector<double> resample(std::span<const double> x, double rate, double target_rate,
                             const ResamplerOptions& options) {
  if (x.empty()) throw InputError("resample: empty input");
  if (!(rate > 0.0) || !(target_rate > 0.0)) {
    throw InputError("resample: rates must be positive");
  }
  if (rate == target_rate) return {x.begin(), x.end()};

  const Ratio r = rational_ratio(rate, target_rate);
  const auto half_len = static_cast<std::size_t>(options.half_width) *
                        static_cast<std::size_t>(std::max(r.up, r.down));
  const std::vector<double> h = design_lowpass(r, rate, target_rate, options, half_len);

  const auto out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(x.size()) * target_rate / rate));
  std::vector<double> y(out_len, 0.0);
  const auto hl = static_cast<std::int64_t>(half_len);

#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < static_cast<std::int64_t>(out_len); ++j) {
    const std::int64_t u = j * r.down;
    // Input samples i contribute when |u - i * up| <= half_len.
    const std::int64_t first = ceil_div(u - hl, r.up);
    const std::int64_t last = (u + hl) / r.up;
    double acc = 0.0;
    for (std::int64_t i = first; i <= last; ++i) {
      acc += extended(x, i) * h[static_cast<std::size_t>(u - i * r.up + hl)];
    }
    y[static_cast<std::size_t>(j)] = acc;
  }
  return y;
}

Waveform resample(const Waveform& w, double target_rate, const ResamplerOptions& options) {
  validate(w);
  Waveform out;
  out.samples = resample(w.samples, w.rate, target_rate, options);
  out.rate = target_rate;
  out.channel = w.channel;
  out.subject = w.subject;
  const double factor = target_rate / w.rate;
  const std::size_t n = out.samples.size();
  for (const auto& a : w.activities) {
    auto start = static_cast<std::size_t>(std::llround(static_cast<double>(a.start) * factor));
    auto end = static_cast<std::size_t>(std::llround(static_cast<double>(a.end) * factor));
    start = std::min(start, n);
    end = std::min(end, n);
    if (!out.activities.empty()) start = std::max(start, out.activities.back().end);
    if (start < end) out.activities.push_back({start, end, a.label});
  }
  return out;
}

}  // namespace ppg2ecg::signal
