#include "ppg2ecg/model/layers.hpp"

#include <algorithm>
#include <stdexcept>

#include "ppg2ecg/kernels/pointwise.hpp"

namespace ppg2ecg::model {

template <typename T>
Conv1d<T>::Conv1d(ParameterSet<T>& params, const std::string& name, int in_channels,
                  int out_channels, int kernel, int stride, bool bias)
    : in_channels_(in_channels), out_channels_(out_channels), kernel_(kernel), stride_(stride) {
  weight_ = params.add(name + ".weight", {out_channels, in_channels, kernel}, Init::Normal);
  if (bias) bias_ = params.add(name + ".bias", {out_channels}, Init::Zeros);
}

template <typename T>
kernels::Conv1dGeometry Conv1d<T>::geometry(int input_length) const {
  return {in_channels_, out_channels_, kernel_, stride_, input_length};
}

template <typename T>
Tensor<T> Conv1d<T>::forward(const ParameterSet<T>& params, const Tensor<T>& x) const {
  if (x.channels != in_channels_) {
    throw std::invalid_argument("conv: expected " + std::to_string(in_channels_) +
                                " input channels, got " + x.shape_string());
  }
  const auto g = geometry(x.length);
  Tensor<T> y(x.batch, out_channels_, g.output_length());
  const std::span<const T> bias = bias_ ? params.values(*bias_) : std::span<const T>{};
  kernels::conv1d_forward<T>(g, x.batch, x.span(), params.values(weight_), bias, y.span());
  return y;
}

template <typename T>
Tensor<T> Conv1d<T>::backward(const ParameterSet<T>& params, const Tensor<T>& x,
                              const Tensor<T>& gy, std::span<T> grads, bool input_grad) const {
  const auto g = geometry(x.length);
  Tensor<T> gx;
  if (input_grad) gx = Tensor<T>(x.batch, x.channels, x.length);
  const std::span<T> gb = bias_ ? params.slice(grads, *bias_) : std::span<T>{};
  kernels::conv1d_backward<T>(g, x.batch, x.span(), params.values(weight_), gy.span(), gx.span(),
                              params.slice(grads, weight_), gb);
  return gx;
}

template <typename T>
InstanceNorm<T>::InstanceNorm(ParameterSet<T>& params, const std::string& name, int channels)
    : channels_(channels) {
  gamma_ = params.add(name + ".gamma", {channels}, Init::Ones);
  beta_ = params.add(name + ".beta", {channels}, Init::Zeros);
}

template <typename T>
Tensor<T> InstanceNorm<T>::forward(const ParameterSet<T>& params, const Tensor<T>& x) const {
  Tensor<T> y(x.batch, x.channels, x.length);
  kernels::instance_norm<T>(x.batch, x.channels, x.length, kEps, x.span(), params.values(gamma_),
                            params.values(beta_), y.span());
  return y;
}

template <typename T>
Tensor<T> InstanceNorm<T>::backward(const ParameterSet<T>& params, const Tensor<T>& x,
                                    const Tensor<T>& gy, std::span<T> grads) const {
  Tensor<T> gx(x.batch, x.channels, x.length);
  kernels::instance_norm_backward<T>(x.batch, x.channels, x.length, kEps, x.span(),
                                     params.values(gamma_), gy.span(), gx.span(),
                                     params.slice(grads, gamma_), params.slice(grads, beta_));
  return gx;
}

namespace {

template <typename T>
Tensor<T> align_length(const Tensor<T>& g, int length) {
  if (g.length == length) return g;
  Tensor<T> out(g.batch, g.channels, length);
  for (int b = 0; b < g.batch; ++b) {
    for (int c = 0; c < g.channels; ++c) {
      for (int t = 0; t < length; ++t) {
        out(b, c, t) = g(b, c, static_cast<int>(static_cast<long>(t) * g.length / length));
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> align_length_backward(const Tensor<T>& g_aligned, int gating_length) {
  if (g_aligned.length == gating_length) return g_aligned;
  Tensor<T> out(g_aligned.batch, g_aligned.channels, gating_length);
  for (int b = 0; b < g_aligned.batch; ++b) {
    for (int c = 0; c < g_aligned.channels; ++c) {
      for (int t = 0; t < g_aligned.length; ++t) {
        out(b, c, static_cast<int>(static_cast<long>(t) * gating_length / g_aligned.length)) +=
            g_aligned(b, c, t);
      }
    }
  }
  return out;
}

}  // namespace

template <typename T>
AttentionGate<T>::AttentionGate(ParameterSet<T>& params, const std::string& name,
                                int skip_channels, int gating_channels)
    : skip_channels_(skip_channels), gating_channels_(gating_channels) {
  const int inter = std::max(skip_channels / 2, 1);
  theta_ = Conv1d<T>(params, name + ".theta", skip_channels, inter, 1, 1, false);
  phi_ = Conv1d<T>(params, name + ".phi", gating_channels, inter, 1, 1, true);
  psi_ = Conv1d<T>(params, name + ".psi", inter, 1, 1, 1, true);
}

template <typename T>
Tensor<T> AttentionGate<T>::forward(const ParameterSet<T>& params, const Tensor<T>& skip,
                                    const Tensor<T>& gating, Cache* cache) const {
  if (skip.channels != skip_channels_ || gating.channels != gating_channels_ ||
      skip.batch != gating.batch) {
    throw std::invalid_argument("attention gate: skip " + skip.shape_string() + " / gating " +
                                gating.shape_string() + " do not match the configured channels");
  }
  Tensor<T> aligned = align_length(gating, skip.length);
  Tensor<T> pre = theta_.forward(params, skip);
  const Tensor<T> phi = phi_.forward(params, aligned);
  for (std::size_t i = 0; i < pre.size(); ++i) pre.data[i] += phi.data[i];
  Tensor<T> q = leaky_relu(pre, T(0));
  Tensor<T> alpha = psi_.forward(params, q);
  for (T& a : alpha.data) a = kernels::sigmoid(a);

  Tensor<T> out(skip.batch, skip.channels, skip.length);
  for (int b = 0; b < skip.batch; ++b) {
    for (int c = 0; c < skip.channels; ++c) {
      for (int t = 0; t < skip.length; ++t) out(b, c, t) = skip(b, c, t) * alpha(b, 0, t);
    }
  }
  if (cache) {
    cache->skip = skip;
    cache->aligned = std::move(aligned);
    cache->pre = std::move(pre);
    cache->q = std::move(q);
    cache->alpha = std::move(alpha);
    cache->gating_length = gating.length;
  }
  return out;
}

template <typename T>
Tensor<T> AttentionGate<T>::coefficients(const ParameterSet<T>& params, const Tensor<T>& skip,
                                         const Tensor<T>& gating) const {
  Cache cache;
  forward(params, skip, gating, &cache);
  return cache.alpha;
}

template <typename T>
void AttentionGate<T>::backward(const ParameterSet<T>& params, const Cache& cache,
                                const Tensor<T>& g_out, std::span<T> grads, Tensor<T>& g_skip,
                                Tensor<T>& g_gating) const {
  const Tensor<T>& skip = cache.skip;
  const Tensor<T>& alpha = cache.alpha;
  g_skip = Tensor<T>(skip.batch, skip.channels, skip.length);
  Tensor<T> g_psi(skip.batch, 1, skip.length);
  for (int b = 0; b < skip.batch; ++b) {
    for (int t = 0; t < skip.length; ++t) {
      T acc = T(0);
      const T a = alpha(b, 0, t);
      for (int c = 0; c < skip.channels; ++c) {
        g_skip(b, c, t) = g_out(b, c, t) * a;
        acc += g_out(b, c, t) * skip(b, c, t);
      }
      g_psi(b, 0, t) = acc * a * (T(1) - a);
    }
  }
  const Tensor<T> g_q = psi_.backward(params, cache.q, g_psi, grads);
  const Tensor<T> g_pre = leaky_relu_backward(cache.pre, T(0), g_q);
  const Tensor<T> g_skip_theta = theta_.backward(params, skip, g_pre, grads);
  for (std::size_t i = 0; i < g_skip.size(); ++i) g_skip.data[i] += g_skip_theta.data[i];
  const Tensor<T> g_aligned = phi_.backward(params, cache.aligned, g_pre, grads);
  g_gating = align_length_backward(g_aligned, cache.gating_length);
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope) {
  Tensor<T> y(x.batch, x.channels, x.length);
  kernels::leaky_relu<T>(x.span(), slope, y.span());
  return y;
}

template <typename T>
Tensor<T> leaky_relu_backward(const Tensor<T>& x, T slope, const Tensor<T>& gy) {
  Tensor<T> gx(x.batch, x.channels, x.length);
  kernels::leaky_relu_backward<T>(x.span(), slope, gy.span(), gx.span());
  return gx;
}

template <typename T>
Tensor<T> upsample2(const Tensor<T>& x) {
  Tensor<T> y(x.batch, x.channels, 2 * x.length);
  kernels::upsample2<T>(x.batch * x.channels, x.length, x.span(), y.span());
  return y;
}

template <typename T>
Tensor<T> upsample2_backward(const Tensor<T>& gy) {
  Tensor<T> gx(gy.batch, gy.channels, gy.length / 2);
  kernels::upsample2_backward<T>(gy.batch * gy.channels, gx.length, gy.span(), gx.span());
  return gx;
}

#define PPG2ECG_INSTANTIATE_LAYERS(T)                                               \
  template class Conv1d<T>;                                                         \
  template class InstanceNorm<T>;                                                   \
  template class AttentionGate<T>;                                                  \
  template Tensor<T> leaky_relu<T>(const Tensor<T>&, T);                            \
  template Tensor<T> leaky_relu_backward<T>(const Tensor<T>&, T, const Tensor<T>&); \
  template Tensor<T> upsample2<T>(const Tensor<T>&);                                \
  template Tensor<T> upsample2_backward<T>(const Tensor<T>&);

PPG2ECG_INSTANTIATE_LAYERS(float)
PPG2ECG_INSTANTIATE_LAYERS(double)

}  // namespace ppg2ecg::model
