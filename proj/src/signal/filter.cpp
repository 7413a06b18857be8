#include "ppg2ecg/signal/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ppg2ecg/error.hpp"

namespace ppg2ecg::signal {
namespace {

using cplx = std::complex<double>;

struct Zpk {
  std::vector<cplx> zeros;
  std::vector<cplx> poles;
  double gain = 1.0;
};

// Analog Chebyshev II low-pass prototype with its stopband edge at 1 rad/s.
Zpk chebyshev2_prototype(int order, double stopband_db) {
  const double de = 1.0 / std::sqrt(std::pow(10.0, 0.1 * stopband_db) - 1.0);
  const double mu = std::asinh(1.0 / de) / order;
  Zpk proto;
  for (int m = -order + 1; m < order; m += 2) {
    if (m == 0) continue;
    const double s = std::sin(m * std::numbers::pi / (2.0 * order));
    proto.zeros.push_back(std::conj(cplx(0.0, 1.0) / s) * -1.0);
  }
  for (int m = -order + 1; m < order; m += 2) {
    const cplx p = -std::exp(cplx(0.0, std::numbers::pi * m / (2.0 * order)));
    const cplx warped(std::sinh(mu) * p.real(), std::cosh(mu) * p.imag());
    proto.poles.push_back(1.0 / warped);
  }
  cplx num(1.0), den(1.0);
  for (const auto& p : proto.poles) num *= -p;
  for (const auto& z : proto.zeros) den *= -z;
  proto.gain = (num / den).real();
  return proto;
}

Zpk butterworth_prototype(int order) {
  Zpk proto;
  for (int m = -order + 1; m < order; m += 2) {
    proto.poles.push_back(-std::exp(cplx(0.0, std::numbers::pi * m / (2.0 * order))));
  }
  return proto;
}

// Frequency scaling s -> s * factor.
Zpk scale_frequency(Zpk f, double factor) {
  for (auto& z : f.zeros) z /= factor;
  for (auto& p : f.poles) p /= factor;
  const auto excess = static_cast<int>(f.zeros.size()) - static_cast<int>(f.poles.size());
  f.gain *= std::pow(factor, excess);
  return f;
}

Zpk lowpass_to_bandpass(const Zpk& lp, double center, double bandwidth) {
  Zpk bp;
  const auto transform = [&](const std::vector<cplx>& roots, std::vector<cplx>& out) {
    for (const auto& r : roots) {
      const cplx scaled = r * bandwidth / 2.0;
      const cplx disc = std::sqrt(scaled * scaled - center * center);
      out.push_back(scaled + disc);
      out.push_back(scaled - disc);
    }
  };
  transform(lp.zeros, bp.zeros);
  transform(lp.poles, bp.poles);
  const std::size_t degree = lp.poles.size() - lp.zeros.size();
  bp.zeros.insert(bp.zeros.end(), degree, cplx(0.0));
  bp.gain = lp.gain * std::pow(bandwidth, static_cast<double>(degree));
  return bp;
}

Zpk bilinear(const Zpk& analog, double rate) {
  const double fs2 = 2.0 * rate;
  Zpk digital;
  cplx num(1.0), den(1.0);
  for (const auto& z : analog.zeros) {
    digital.zeros.push_back((fs2 + z) / (fs2 - z));
    num *= fs2 - z;
  }
  for (const auto& p : analog.poles) {
    digital.poles.push_back((fs2 + p) / (fs2 - p));
    den *= fs2 - p;
  }
  const std::size_t degree = analog.poles.size() - analog.zeros.size();
  digital.zeros.insert(digital.zeros.end(), degree, cplx(-1.0));
  digital.gain = analog.gain * (num / den).real();
  return digital;
}

// Splits roots into second-order groups: conjugate pairs, then real roots two
// at a time.
std::vector<std::array<cplx, 2>> root_pairs(std::vector<cplx> roots) {
  constexpr double tol = 1e-10;
  std::vector<std::array<cplx, 2>> pairs;
  std::vector<cplx> reals;
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    if (std::abs(roots[i].imag()) <= tol * std::max(1.0, std::abs(roots[i]))) {
      reals.push_back(cplx(roots[i].real(), 0.0));
      used[i] = true;
      continue;
    }
    std::size_t best = roots.size();
    double best_dist = 0.0;
    for (std::size_t j = i + 1; j < roots.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(roots[j] - std::conj(roots[i]));
      if (best == roots.size() || d < best_dist) {
        best = j;
        best_dist = d;
      }
    }
    if (best == roots.size()) throw std::logic_error("unpaired complex root");
    used[i] = used[best] = true;
    const cplx upper = roots[i].imag() > 0 ? roots[i] : roots[best];
    pairs.push_back({upper, std::conj(upper)});
  }
  std::sort(reals.begin(), reals.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2) pairs.push_back({reals[i], reals[i + 1]});
  if (reals.size() % 2 == 1) pairs.push_back({reals.back(), cplx(0.0)});
  return pairs;
}

Biquad section_from(const std::array<cplx, 2>& z, const std::array<cplx, 2>& p) {
  Biquad s;
  s.b = {1.0, -(z[0] + z[1]).real(), (z[0] * z[1]).real()};
  s.a = {1.0, -(p[0] + p[1]).real(), (p[0] * p[1]).real()};
  return s;
}

// Poles nearest the unit circle are paired first with their nearest zeros.
SosFilter zpk_to_sos(const Zpk& f) {
  auto pole_pairs = root_pairs(f.poles);
  auto zero_pairs = root_pairs(f.zeros);
  std::sort(pole_pairs.begin(), pole_pairs.end(), [](const auto& a, const auto& b) {
    return std::abs(1.0 - std::abs(a[0])) < std::abs(1.0 - std::abs(b[0]));
  });
  SosFilter sos;
  for (const auto& pp : pole_pairs) {
    std::array<cplx, 2> zp{cplx(0.0), cplx(0.0)};
    if (!zero_pairs.empty()) {
      auto it = std::min_element(zero_pairs.begin(), zero_pairs.end(),
                                 [&](const auto& a, const auto& b) {
                                   return std::abs(a[0] - pp[0]) < std::abs(b[0] - pp[0]);
                                 });
      zp = *it;
      zero_pairs.erase(it);
    }
    sos.push_back(section_from(zp, pp));
  }
  for (auto& b : sos.front().b) b *= f.gain;
  return sos;
}

double prewarp(double hz, double rate) {
  return 2.0 * rate * std::tan(std::numbers::pi * hz / rate);
}

SosFilter bandpass_from_prototype(const Zpk& proto, double low_hz, double high_hz, double rate) {
  const double w1 = prewarp(low_hz, rate);
  const double w2 = prewarp(high_hz, rate);
  return zpk_to_sos(bilinear(lowpass_to_bandpass(proto, std::sqrt(w1 * w2), w2 - w1), rate));
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Steady-state DF-II-transposed state of one biquad for a unit step.
std::array<double, 2> biquad_step_state(const Biquad& s) {
  const double m00 = 1.0 + s.a[1], m01 = -1.0;
  const double m10 = s.a[2], m11 = 1.0;
  const double r0 = s.b[1] - s.a[1] * s.b[0];
  const double r1 = s.b[2] - s.a[2] * s.b[0];
  const double det = m00 * m11 - m01 * m10;
  return {(r0 * m11 - m01 * r1) / det, (m00 * r1 - m10 * r0) / det};
}

void sos_run(const SosFilter& sos, std::vector<double>& x, double initial) {
  double scale = initial;
  for (const auto& s : sos) {
    auto z = biquad_step_state(s);
    z[0] *= scale;
    z[1] *= scale;
    for (double& v : x) {
      const double y = s.b[0] * v + z[0];
      z[0] = s.b[1] * v - s.a[1] * y + z[1];
      z[1] = s.b[2] * v - s.a[2] * y;
      v = y;
    }
    scale *= (s.b[0] + s.b[1] + s.b[2]) / (s.a[0] + s.a[1] + s.a[2]);
  }
}

std::vector<double> odd_extend(std::span<const double> x, std::size_t pad) {
  const std::size_t n = x.size();
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x.back() - x[n - 1 - i]);
  return ext;
}

// A causal FIR started in steady state for a constant history equal to the
// first sample.
void fir_run(std::span<const double> taps, std::vector<double>& x) {
  const std::vector<double> in = x;
  const double history = in.front();
  for (std::size_t n = 0; n < in.size(); ++n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < taps.size(); ++k) {
      acc += taps[k] * (n >= k ? in[n - k] : history);
    }
    x[n] = acc;
  }
}

template <typename Run>
std::vector<double> forward_backward(std::span<const double> x, std::size_t padlen, Run run) {
  if (x.empty()) return {};
  const std::size_t pad = std::min(padlen, x.size() - 1);
  std::vector<double> ext = odd_extend(x, pad);
  run(ext);
  std::reverse(ext.begin(), ext.end());
  run(ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + x.size())};
}

}  // namespace

void BandpassSpec::validate(double rate) const {
  if (!(low_hz > 0.0 && low_hz < high_hz)) {
    throw InputError("bandpass: need 0 < low_hz < high_hz");
  }
  if (!(high_hz < rate / 2.0)) {
    throw InputError("bandpass: high edge " + std::to_string(high_hz) +
                     " Hz is not below the Nyquist rate " + std::to_string(rate / 2.0) + " Hz");
  }
  if (const auto* c = std::get_if<ChebyshevII>(&design)) {
    if (c->order < 1 || !(c->stopband_attenuation_db > 0.0)) {
      throw InputError("bandpass: Chebyshev II needs order >= 1 and positive attenuation");
    }
  }
}

BandpassSpec ppg_bandpass_spec() { return {ChebyshevII{4, 40.0}, 0.4, 8.0}; }
BandpassSpec ecg_bandpass_spec() { return {Fir{0}, 3.0, 45.0}; }

SosFilter design_chebyshev2_bandpass(int order, double stopband_db, double low_hz,
                                     double high_hz, double rate) {
  // Move the -3 dB point of the prototype to 1 rad/s so the band edges are
  // passband edges.
  const double eps = 1.0 / std::sqrt(std::pow(10.0, 0.1 * stopband_db) - 1.0);
  const double w3 = 1.0 / std::cosh(std::acosh(1.0 / eps) / order);
  const Zpk proto = scale_frequency(chebyshev2_prototype(order, stopband_db), w3);
  return bandpass_from_prototype(proto, low_hz, high_hz, rate);
}

SosFilter design_butterworth_bandpass(int order, double low_hz, double high_hz, double rate) {
  return bandpass_from_prototype(butterworth_prototype(order), low_hz, high_hz, rate);
}

int fir_tap_heuristic(double rate, double low_hz) {
  auto taps = static_cast<int>(std::ceil(3.0 * rate / low_hz - 1e-9));
  if (taps % 2 == 0) ++taps;
  return taps;
}

std::vector<double> design_fir_bandpass(int num_taps, double low_hz, double high_hz,
                                        double rate) {
  if (num_taps < 3 || num_taps % 2 == 0) {
    throw InputError("FIR band-pass needs an odd tap count >= 3");
  }
  const double f1 = low_hz / rate;
  const double f2 = high_hz / rate;
  const double mid = 0.5 * (num_taps - 1);
  std::vector<double> h(static_cast<std::size_t>(num_taps));
  for (int n = 0; n < num_taps; ++n) {
    const double t = n - mid;
    const double window = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (num_taps - 1));
    h[static_cast<std::size_t>(n)] = window * (2.0 * f2 * sinc(2.0 * f2 * t) - 2.0 * f1 * sinc(2.0 * f1 * t));
  }
  // Unit gain at the band centre.
  const double fc = 0.5 * (f1 + f2);
  double gain = 0.0;
  for (int n = 0; n < num_taps; ++n) {
    gain += h[static_cast<std::size_t>(n)] * std::cos(2.0 * std::numbers::pi * fc * (n - mid));
  }
  for (double& v : h) v /= gain;
  return h;
}

std::complex<double> frequency_response(const SosFilter& sos, double freq_hz, double rate) {
  const cplx zinv = std::exp(cplx(0.0, -2.0 * std::numbers::pi * freq_hz / rate));
  cplx h(1.0);
  for (const auto& s : sos) {
    h *= (s.b[0] + s.b[1] * zinv + s.b[2] * zinv * zinv) /
         (s.a[0] + s.a[1] * zinv + s.a[2] * zinv * zinv);
  }
  return h;
}

std::complex<double> frequency_response(std::span<const double> taps, double freq_hz,
                                        double rate) {
  cplx h(0.0);
  for (std::size_t n = 0; n < taps.size(); ++n) {
    h += taps[n] * std::exp(cplx(0.0, -2.0 * std::numbers::pi * freq_hz * n / rate));
  }
  return h;
}

std::vector<double> sosfilt(const SosFilter& sos, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  sos_run(sos, y, 0.0);
  return y;
}

std::vector<double> sosfiltfilt(const SosFilter& sos, std::span<const double> x) {
  const std::size_t padlen = 3 * (2 * sos.size() + 1);
  return forward_backward(x, padlen, [&](std::vector<double>& v) { sos_run(sos, v, v.front()); });
}

std::vector<double> firfiltfilt(std::span<const double> taps, std::span<const double> x) {
  const std::size_t padlen = 3 * taps.size();
  return forward_backward(x, padlen, [&](std::vector<double>& v) { fir_run(taps, v); });
}

BandpassFilter::BandpassFilter(const BandpassSpec& spec, double rate) : spec_(spec), rate_(rate) {
  spec_.validate(rate);
  if (const auto* c = std::get_if<ChebyshevII>(&spec_.design)) {
    sos_ = design_chebyshev2_bandpass(c->order, c->stopband_attenuation_db, spec_.low_hz,
                                      spec_.high_hz, rate);
  } else {
    const auto& fir = std::get<Fir>(spec_.design);
    const int taps = fir.num_taps > 0 ? fir.num_taps : fir_tap_heuristic(rate, spec_.low_hz);
    taps_ = design_fir_bandpass(taps, spec_.low_hz, spec_.high_hz, rate);
  }
}

std::vector<double> BandpassFilter::apply(std::span<const double> x) const {
  return taps_.empty() ? sosfiltfilt(sos_, x) : firfiltfilt(taps_, x);
}

std::vector<double> bandpass(std::span<const double> x, double rate, const BandpassSpec& spec) {
  return BandpassFilter(spec, rate).apply(x);
}

Segment bandpass(const Segment& seg, const BandpassSpec& spec) {
  Segment out = seg;
  out.samples = bandpass(seg.samples, seg.rate, spec);
  return out;
}

Waveform bandpass(const Waveform& w, const BandpassSpec& spec) {
  Waveform out = w;
  out.samples = bandpass(w.samples, w.rate, spec);
  return out;
}

}  // namespace ppg2ecg::signal
