#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppg2ecg::model {

/// Dense (batch, channels, length) buffer.
template <typename T>
struct Tensor {
  int batch = 0;
  int channels = 0;
  int length = 0;
  std::vector<T> data;

  Tensor() = default;
  Tensor(int b, int c, int l, T fill = T(0))
      : batch(b), channels(c), length(l),
        data(static_cast<std::size_t>(b) * c * l, fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t item_size() const { return static_cast<std::size_t>(channels) * length; }

  T& operator()(int b, int c, int t) {
    return data[(static_cast<std::size_t>(b) * channels + c) * length + t];
  }
  T operator()(int b, int c, int t) const {
    return data[(static_cast<std::size_t>(b) * channels + c) * length + t];
  }

  std::span<T> span() { return data; }
  std::span<const T> span() const { return data; }
  std::span<T> item(int b) { return span().subspan(b * item_size(), item_size()); }
  std::span<const T> item(int b) const { return span().subspan(b * item_size(), item_size()); }

  bool same_shape(const Tensor& o) const {
    return batch == o.batch && channels == o.channels && length == o.length;
  }
  std::string shape_string() const {
    return "(" + std::to_string(batch) + ", " + std::to_string(channels) + ", " +
           std::to_string(length) + ")";
  }
};

/// Channel-wise concatenation of two tensors with equal batch and length.
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.batch != b.batch || a.length != b.length) {
    throw std::invalid_argument("concat_channels: " + a.shape_string() + " vs " + b.shape_string());
  }
  Tensor<T> out(a.batch, a.channels + b.channels, a.length);
  for (int n = 0; n < a.batch; ++n) {
    auto dst = out.item(n);
    auto sa = a.item(n);
    auto sb = b.item(n);
    std::copy(sa.begin(), sa.end(), dst.begin());
    std::copy(sb.begin(), sb.end(), dst.begin() + static_cast<std::ptrdiff_t>(sa.size()));
  }
  return out;
}

/// Inverse of concat_channels: the leading `first_channels` go to `a`.
template <typename T>
void split_channels(const Tensor<T>& x, int first_channels, Tensor<T>& a, Tensor<T>& b) {
  a = Tensor<T>(x.batch, first_channels, x.length);
  b = Tensor<T>(x.batch, x.channels - first_channels, x.length);
  for (int n = 0; n < x.batch; ++n) {
    auto src = x.item(n);
    auto da = a.item(n);
    auto db = b.item(n);
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(da.size()), da.begin());
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(da.size()), src.end(), db.begin());
  }
}

}  // namespace ppg2ecg::model
