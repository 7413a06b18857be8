#pragma once

#include <array>
#include <complex>
#include <span>
#include <variant>
#include <vector>

#include "ppg2ecg/signal/waveform.hpp"

namespace ppg2ecg::signal {

/// Chebyshev type II IIR band-pass. `order` is the low-pass prototype order,
/// so the band-pass has 2 * order poles. The band edges are the -3 dB points
/// of a single pass.
struct ChebyshevII {
  int order = 4;
  double stopband_attenuation_db = 40.0;
};

/// Linear-phase Hamming-window FIR band-pass. `num_taps == 0` selects
/// 3 * rate / low_hz rounded up to odd.
struct Fir {
  int num_taps = 0;
};

struct BandpassSpec {
  std::variant<ChebyshevII, Fir> design;
  double low_hz = 0.0;
  double high_hz = 0.0;

  /// Throws InputError unless 0 < low_hz < high_hz < rate / 2.
  void validate(double rate) const;
};

/// 0.4-8 Hz Chebyshev II (order 4, 40 dB) used for PPG.
BandpassSpec ppg_bandpass_spec();
/// 3-45 Hz Hamming FIR used for ECG.
BandpassSpec ecg_bandpass_spec();

/// Direct-form II transposed biquad with a[0] == 1.
struct Biquad {
  std::array<double, 3> b{1.0, 0.0, 0.0};
  std::array<double, 3> a{1.0, 0.0, 0.0};
};

using SosFilter = std::vector<Biquad>;

SosFilter design_chebyshev2_bandpass(int order, double stopband_db, double low_hz,
                                     double high_hz, double rate);
SosFilter design_butterworth_bandpass(int order, double low_hz, double high_hz, double rate);
std::vector<double> design_fir_bandpass(int num_taps, double low_hz, double high_hz,
                                        double rate);
int fir_tap_heuristic(double rate, double low_hz);

/// Complex response of a cascade at `freq_hz`.
std::complex<double> frequency_response(const SosFilter& sos, double freq_hz, double rate);
std::complex<double> frequency_response(std::span<const double> taps, double freq_hz,
                                        double rate);

/// Single causal pass from rest.
std::vector<double> sosfilt(const SosFilter& sos, std::span<const double> x);

/// Zero-phase forward-backward filtering with odd-extension padding and
/// steady-state initial conditions.
std::vector<double> sosfiltfilt(const SosFilter& sos, std::span<const double> x);
std::vector<double> firfiltfilt(std::span<const double> taps, std::span<const double> x);

/// A band-pass designed once for a fixed sampling rate.
class BandpassFilter {
 public:
  BandpassFilter(const BandpassSpec& spec, double rate);

  /// Zero-phase application; output length equals input length.
  std::vector<double> apply(std::span<const double> x) const;

  double rate() const { return rate_; }
  const BandpassSpec& spec() const { return spec_; }

 private:
  BandpassSpec spec_;
  double rate_;
  SosFilter sos_;
  std::vector<double> taps_;
};

std::vector<double> bandpass(std::span<const double> x, double rate, const BandpassSpec& spec);
Segment bandpass(const Segment& seg, const BandpassSpec& spec);
Waveform bandpass(const Waveform& w, const BandpassSpec& spec);

}  // namespace ppg2ecg::signal
