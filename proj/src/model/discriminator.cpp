#include "ppg2ecg/model/discriminator.hpp"

#include <stdexcept>
#include <string>

#include "ppg2ecg/kernels/pointwise.hpp"

namespace ppg2ecg::model {
namespace {
constexpr double kSlope = 0.2;
}

template <typename T>
Discriminator<T>::Discriminator(DiscriminatorConfig config) : config_(std::move(config)) {
  config_.validate();
  int in = 1;
  for (std::size_t i = 0; i < config_.filters.size(); ++i) {
    convs_.emplace_back(params_, "conv" + std::to_string(i), in, config_.filters[i],
                        config_.kernel_size, config_.stride);
    in = config_.filters[i];
  }
  head_ = Conv1d<T>(params_, "head", in, 1, config_.kernel_size, 1);
}

template <typename T>
std::vector<T> Discriminator<T>::forward(const Tensor<T>& y, Cache* cache) const {
  if (y.channels != 1 || y.batch < 1 || y.length < 1) {
    throw std::invalid_argument("discriminator: expected (batch, 1, L), got " + y.shape_string());
  }
  Cache local;
  Cache& c = cache ? *cache : local;
  c.inputs.clear();
  c.pre.clear();
  const T slope = static_cast<T>(kSlope);
  Tensor<T> h = y;
  for (const auto& conv : convs_) {
    Tensor<T> pre = conv.forward(params_, h);
    c.inputs.push_back(std::move(h));
    h = leaky_relu(pre, slope);
    c.pre.push_back(std::move(pre));
  }
  c.head_out = head_.forward(params_, h);
  c.inputs.push_back(std::move(h));
  c.scores.assign(static_cast<std::size_t>(y.batch), T(0));
  for (int b = 0; b < y.batch; ++b) {
    T logit = T(0);
    for (T v : c.head_out.item(b)) logit += v;
    logit /= static_cast<T>(c.head_out.length);
    c.scores[static_cast<std::size_t>(b)] = kernels::sigmoid(logit);
  }
  return c.scores;
}

template <typename T>
Tensor<T> Discriminator<T>::backward(const Cache& c, std::span<const T> grad_scores,
                                     std::span<T> grads) const {
  const Tensor<T>& out = c.head_out;
  Tensor<T> g(out.batch, 1, out.length);
  for (int b = 0; b < out.batch; ++b) {
    const T sc = c.scores[static_cast<std::size_t>(b)];
    const T g_logit = grad_scores[static_cast<std::size_t>(b)] * sc * (T(1) - sc);
    for (T& v : g.item(b)) v = g_logit / static_cast<T>(out.length);
  }
  const T slope = static_cast<T>(kSlope);
  g = head_.backward(params_, c.inputs.back(), g, grads);
  for (std::size_t i = convs_.size(); i-- > 0;) {
    g = leaky_relu_backward(c.pre[i], slope, g);
    g = convs_[i].backward(params_, c.inputs[i], g, grads);
  }
  return g;
}

template class Discriminator<float>;
template class Discriminator<double>;

}  // namespace ppg2ecg::model
