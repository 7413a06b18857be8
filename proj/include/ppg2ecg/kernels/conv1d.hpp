#pragma once

#include <span>

namespace ppg2ecg::kernels {

/// Shape of a 1-D convolution with "same" padding: the output length is
/// ceil(input_length / stride) and the total padding
/// max((out - 1) * stride + kernel - in, 0) is split with the smaller half on
/// the left (7 left / 8 right for kernel 16, stride 1).
struct Conv1dGeometry {
  int in_channels = 1;
  int out_channels = 1;
  int kernel = 1;
  int stride = 1;
  int input_length = 1;

  int output_length() const { return (input_length + stride - 1) / stride; }
  int total_padding() const {
    const int need = (output_length() - 1) * stride + kernel - input_length;
    return need > 0 ? need : 0;
  }
  int pad_left() const { return total_padding() / 2; }
};

// Tensors are dense (batch, channels, length), weights (out, in, kernel).
//
// forward:  y = conv(x, w) + b          (y overwritten)
// backward: gx = d/dx                   (overwritten; skipped when empty)
//           gw += d/dw, gb += d/db      (accumulated; skipped when empty)

template <typename T>
void conv1d_forward(const Conv1dGeometry& g, int batch, std::span<const T> x, std::span<const T> w,
                    std::span<const T> b, std::span<T> y);

template <typename T>
void conv1d_backward(const Conv1dGeometry& g, int batch, std::span<const T> x,
                     std::span<const T> w, std::span<const T> gy, std::span<T> gx,
                     std::span<T> gw, std::span<T> gb);

/// Direct-loop serial versions kept as the correctness oracle and the
/// benchmark baseline.
namespace reference {

template <typename T>
void conv1d_forward(const Conv1dGeometry& g, int batch, std::span<const T> x, std::span<const T> w,
                    std::span<const T> b, std::span<T> y);

template <typename T>
void conv1d_backward(const Conv1dGeometry& g, int batch, std::span<const T> x,
                     std::span<const T> w, std::span<const T> gy, std::span<T> gx,
                     std::span<T> gw, std::span<T> gb);

}  // namespace reference
}  // namespace ppg2ecg::kernels
