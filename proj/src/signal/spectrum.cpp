#include "ppg2ecg/signal/spectrum.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "ppg2ecg/error.hpp"

namespace ppg2ecg::signal {
namespace {

using cplx = std::complex<double>;

void radix2_inplace(std::vector<cplx>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t k = 0; k < len / 2; ++k) {
      const cplx w = std::polar(1.0, angle * static_cast<double>(k));
      for (std::size_t i = 0; i < n; i += len) {
        const cplx u = a[i + k];
        const cplx v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

// Chirp-z formulation of an arbitrary-length DFT on a power-of-two grid.
std::vector<cplx> bluestein(std::span<const cplx> x) {
  const std::size_t n = x.size();
  const std::size_t m = std::bit_ceil(2 * n - 1);
  std::vector<cplx> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the phase argument small.
    const auto k2 = static_cast<double>((k * k) % (2 * n));
    chirp[k] = std::polar(1.0, -std::numbers::pi * k2 / static_cast<double>(n));
  }
  std::vector<cplx> a(m, 0.0), b(m, 0.0);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);
  radix2_inplace(a);
  radix2_inplace(b);
  for (std::size_t i = 0; i < m; ++i) a[i] = std::conj(a[i] * b[i]);
  radix2_inplace(a);  // inverse via conjugation
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = std::conj(a[k]) / static_cast<double>(m) * chirp[k];
  return out;
}

}  // namespace

std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x) {
  if (x.empty()) return {};
  if (std::has_single_bit(x.size())) {
    std::vector<cplx> a(x.begin(), x.end());
    radix2_inplace(a);
    return a;
  }
  return bluestein(x);
}

std::vector<std::complex<double>> fft(std::span<const double> x) {
  std::vector<cplx> c(x.begin(), x.end());
  return fft(std::span<const cplx>(c));
}

std::vector<double> magnitude_spectrum(std::span<const double> x) {
  if (x.size() < 2) throw InputError("magnitude_spectrum: need at least 2 samples");
  const auto X = fft(x);
  const std::size_t bins = x.size() / 2;
  std::vector<double> mag(bins);
  for (std::size_t k = 1; k <= bins; ++k) mag[k - 1] = std::abs(X[k]);
  return mag;
}

}  // namespace ppg2ecg::signal
