#include "ppg2ecg/kernels/pointwise.hpp"

#include <cmath>
#include <cstddef>

namespace ppg2ecg::kernels {

template <typename T>
void leaky_relu(std::span<const T> x, T slope, std::span<T> y) {
#pragma omp parallel for simd schedule(static)
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : slope * x[i];
}

template <typename T>
void leaky_relu_backward(std::span<const T> x, T slope, std::span<const T> gy, std::span<T> gx) {
#pragma omp parallel for simd schedule(static)
  for (std::size_t i = 0; i < x.size(); ++i) gx[i] = x[i] > T(0) ? gy[i] : slope * gy[i];
}

template <typename T>
void tanh_forward(std::span<const T> x, std::span<T> y) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
}

template <typename T>
void tanh_backward(std::span<const T> y, std::span<const T> gy, std::span<T> gx) {
#pragma omp parallel for simd schedule(static)
  for (std::size_t i = 0; i < y.size(); ++i) gx[i] = gy[i] * (T(1) - y[i] * y[i]);
}

template <typename T>
T sigmoid(T z) {
  if (z >= T(0)) return T(1) / (T(1) + std::exp(-z));
  const T e = std::exp(z);
  return e / (T(1) + e);
}

template <typename T>
void upsample2(int rows, int length, std::span<const T> x, std::span<T> y) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const T* src = x.data() + static_cast<std::size_t>(r) * length;
    T* dst = y.data() + static_cast<std::size_t>(r) * 2 * length;
    for (int t = 0; t < length; ++t) dst[2 * t] = dst[2 * t + 1] = src[t];
  }
}

template <typename T>
void upsample2_backward(int rows, int length, std::span<const T> gy, std::span<T> gx) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const T* src = gy.data() + static_cast<std::size_t>(r) * 2 * length;
    T* dst = gx.data() + static_cast<std::size_t>(r) * length;
    for (int t = 0; t < length; ++t) dst[t] = src[2 * t] + src[2 * t + 1];
  }
}

template <typename T>
void instance_norm(int batch, int channels, int length, T eps, std::span<const T> x,
                   std::span<const T> gamma, std::span<const T> beta, std::span<T> y) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < batch; ++b) {
    for (int c = 0; c < channels; ++c) {
      const std::size_t base = (static_cast<std::size_t>(b) * channels + c) * length;
      double mean = 0.0;
      for (int t = 0; t < length; ++t) mean += x[base + t];
      mean /= length;
      double var = 0.0;
      for (int t = 0; t < length; ++t) {
        const double d = x[base + t] - mean;
        var += d * d;
      }
      var /= length;
      const double inv = 1.0 / std::sqrt(var + static_cast<double>(eps));
      for (int t = 0; t < length; ++t) {
        y[base + t] = static_cast<T>(gamma[c] * ((x[base + t] - mean) * inv) + beta[c]);
      }
    }
  }
}

template <typename T>
void instance_norm_backward(int batch, int channels, int length, T eps, std::span<const T> x,
                            std::span<const T> gamma, std::span<const T> gy, std::span<T> gx,
                            std::span<T> ggamma, std::span<T> gbeta) {
  // Per-channel parameter gradients are reduced over the batch serially so
  // the summation order is fixed.
  for (int c = 0; c < channels; ++c) {
    double sum_g = 0.0, sum_gxhat = 0.0;
    for (int b = 0; b < batch; ++b) {
      const std::size_t base = (static_cast<std::size_t>(b) * channels + c) * length;
      double mean = 0.0;
      for (int t = 0; t < length; ++t) mean += x[base + t];
      mean /= length;
      double var = 0.0;
      for (int t = 0; t < length; ++t) {
        const double d = x[base + t] - mean;
        var += d * d;
      }
      var /= length;
      const double inv = 1.0 / std::sqrt(var + static_cast<double>(eps));
      double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
      for (int t = 0; t < length; ++t) {
        const double xhat = (x[base + t] - mean) * inv;
        const double g = gy[base + t];
        sum_g += g;
        sum_gxhat += g * xhat;
        const double dxhat = g * gamma[c];
        sum_dxhat += dxhat;
        sum_dxhat_xhat += dxhat * xhat;
      }
      if (!gx.empty()) {
        for (int t = 0; t < length; ++t) {
          const double xhat = (x[base + t] - mean) * inv;
          const double dxhat = gy[base + t] * gamma[c];
          gx[base + t] = static_cast<T>(inv / length *
                                        (length * dxhat - sum_dxhat - xhat * sum_dxhat_xhat));
        }
      }
    }
    if (!ggamma.empty()) ggamma[c] += static_cast<T>(sum_gxhat);
    if (!gbeta.empty()) gbeta[c] += static_cast<T>(sum_g);
  }
}

#define PPG2ECG_INSTANTIATE_POINTWISE(T)                                                         \
  template void leaky_relu<T>(std::span<const T>, T, std::span<T>);                              \
  template void leaky_relu_backward<T>(std::span<const T>, T, std::span<const T>, std::span<T>); \
  template void tanh_forward<T>(std::span<const T>, std::span<T>);                               \
  template void tanh_backward<T>(std::span<const T>, std::span<const T>, std::span<T>);          \
  template T sigmoid<T>(T);                                                                      \
  template void upsample2<T>(int, int, std::span<const T>, std::span<T>);                        \
  template void upsample2_backward<T>(int, int, std::span<const T>, std::span<T>);               \
  template void instance_norm<T>(int, int, int, T, std::span<const T>, std::span<const T>,       \
                                 std::span<const T>, std::span<T>);                              \
  template void instance_norm_backward<T>(int, int, int, T, std::span<const T>,                  \
                                          std::span<const T>, std::span<const T>, std::span<T>,  \
                                          std::span<T>, std::span<T>);

PPG2ECG_INSTANTIATE_POINTWISE(float)
PPG2ECG_INSTANTIATE_POINTWISE(double)

}  // namespace ppg2ecg::kernels
