#pragma once

#include <complex>
#include <span>
#include <vector>

namespace ppg2ecg::signal {

/// Unnormalized forward DFT, X_k = sum_n x_n exp(-2 pi i k n / N).
/// Radix-2 for powers of two, Bluestein otherwise.
std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x);
std::vector<std::complex<double>> fft(std::span<const double> x);

/// |X_k| for k = 1 .. N/2 (DC excluded, Nyquist included for even N).
/// Length floor(N / 2). Requires N >= 2.
std::vector<double> magnitude_spectrum(std::span<const double> x);

}  // namespace ppg2ecg::signal
