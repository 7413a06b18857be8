#pragma once

#include <span>

namespace ppg2ecg::kernels {

// Elementwise activations. Backward functions take the forward input (or
// output where noted) and the upstream gradient and write the downstream
// gradient.

template <typename T>
void leaky_relu(std::span<const T> x, T slope, std::span<T> y);
template <typename T>
void leaky_relu_backward(std::span<const T> x, T slope, std::span<const T> gy, std::span<T> gx);

/// Output-based: gx = gy * (1 - y^2).
template <typename T>
void tanh_forward(std::span<const T> x, std::span<T> y);
template <typename T>
void tanh_backward(std::span<const T> y, std::span<const T> gy, std::span<T> gx);

/// Overflow-safe logistic function.
template <typename T>
T sigmoid(T z);

/// Nearest-neighbour x2 along the length axis; `rows` = batch * channels.
template <typename T>
void upsample2(int rows, int length, std::span<const T> x, std::span<T> y);
template <typename T>
void upsample2_backward(int rows, int length, std::span<const T> gy, std::span<T> gx);

/// Per-(item, channel) normalisation over the length axis with affine
/// gamma/beta per channel. Statistics are recomputed in backward.
template <typename T>
void instance_norm(int batch, int channels, int length, T eps, std::span<const T> x,
                   std::span<const T> gamma, std::span<const T> beta, std::span<T> y);
template <typename T>
void instance_norm_backward(int batch, int channels, int length, T eps, std::span<const T> x,
                            std::span<const T> gamma, std::span<const T> gy, std::span<T> gx,
                            std::span<T> ggamma, std::span<T> gbeta);

}  // namespace ppg2ecg::kernels
