#include "ppg2ecg/model/generator.hpp"

#include <stdexcept>
#include <string>

#include "ppg2ecg/kernels/pointwise.hpp"

namespace ppg2ecg::model {
namespace {

constexpr double kEncoderSlope = 0.2;

template <typename T>
void accumulate(Tensor<T>& acc, const Tensor<T>& g) {
  if (acc.size() == 0) {
    acc = g;
    return;
  }
  for (std::size_t i = 0; i < acc.size(); ++i) acc.data[i] += g.data[i];
}

}  // namespace

template <typename T>
Generator<T>::Generator(GeneratorConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto& f = config_.encoder_filters;
  const auto& s = config_.encoder_strides;
  const int k = config_.kernel_size;
  const std::size_t n = f.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::string name = "enc" + std::to_string(i);
    enc_conv_.emplace_back(params_, name + ".conv", i == 0 ? 1 : f[i - 1], f[i], k, s[i]);
    enc_norm_.emplace_back(params_, name + ".norm", f[i]);
  }
  gates_.resize(n > 0 ? n - 1 : 0);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const std::size_t i = n - 1 - j;
    const std::string name = "dec" + std::to_string(j);
    const int in = (j == 0) ? f[i] : 2 * f[i];
    dec_conv_.emplace_back(params_, name + ".conv", in, f[i - 1], k, 1);
    dec_norm_.emplace_back(params_, name + ".norm", f[i - 1]);
    if (config_.attention_gates) {
      gates_[i - 1] = AttentionGate<T>(params_, "gate" + std::to_string(i - 1), f[i - 1], f[i - 1]);
    }
  }
  head_ = Conv1d<T>(params_, "head", n >= 2 ? 2 * f[0] : f[0], 1, k, 1);
}

template <typename T>
std::vector<int> Generator<T>::encoder_lengths(int length) const {
  std::vector<int> out;
  for (int s : config_.encoder_strides) {
    length = (length + s - 1) / s;
    out.push_back(length);
  }
  return out;
}

template <typename T>
Tensor<T> Generator<T>::forward(const Tensor<T>& x, Cache* cache) const {
  if (x.channels != 1 || x.batch < 1 || x.length < 1 ||
      x.length % config_.length_multiple() != 0) {
    throw std::invalid_argument("generator: expected (batch, 1, L) with L a multiple of " +
                                std::to_string(config_.length_multiple()) + ", got " +
                                x.shape_string());
  }
  const auto& s = config_.encoder_strides;
  const std::size_t n = enc_conv_.size();
  Cache local;
  Cache& c = cache ? *cache : local;
  c.encoder.assign(n, {});
  c.decoder.assign(n - 1, {});
  c.gates.assign(n - 1, {});
  const T slope = static_cast<T>(kEncoderSlope);

  Tensor<T> h = x;
  for (std::size_t i = 0; i < n; ++i) {
    Stage& st = c.encoder[i];
    st.input = std::move(h);
    st.conv_out = enc_conv_[i].forward(params_, st.input);
    st.norm_out = enc_norm_[i].forward(params_, st.conv_out);
    st.output = leaky_relu(st.norm_out, slope);
    h = st.output;
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const std::size_t i = n - 1 - j;
    Stage& st = c.decoder[j];
    st.input = std::move(h);
    st.conv_in = s[i] == 2 ? upsample2(st.input) : st.input;
    st.conv_out = dec_conv_[j].forward(params_, st.conv_in);
    st.norm_out = dec_norm_[j].forward(params_, st.conv_out);
    st.output = leaky_relu(st.norm_out, T(0));
    const Tensor<T>& skip = c.encoder[i - 1].output;
    h = config_.attention_gates
            ? concat_channels(st.output, gates_[i - 1].forward(params_, skip, st.output, &c.gates[j]))
            : concat_channels(st.output, skip);
  }
  Stage& head = c.head;
  head.input = std::move(h);
  head.conv_in = s[0] == 2 ? upsample2(head.input) : head.input;
  head.conv_out = head_.forward(params_, head.conv_in);
  head.output = Tensor<T>(x.batch, 1, head.conv_out.length);
  kernels::tanh_forward<T>(head.conv_out.span(), head.output.span());
  if (!cache) return std::move(head.output);
  return head.output;
}

template <typename T>
Tensor<T> Generator<T>::backward(const Cache& c, const Tensor<T>& grad_out,
                                 std::span<T> grads) const {
  const auto& s = config_.encoder_strides;
  const auto& f = config_.encoder_filters;
  const std::size_t n = enc_conv_.size();
  const T slope = static_cast<T>(kEncoderSlope);

  Tensor<T> g(grad_out.batch, 1, grad_out.length);
  kernels::tanh_backward<T>(c.head.output.span(), grad_out.span(), g.span());
  g = head_.backward(params_, c.head.conv_in, g, grads);
  if (s[0] == 2) g = upsample2_backward(g);

  std::vector<Tensor<T>> g_enc(n);
  for (std::size_t jj = n - 1; jj-- > 0;) {
    const std::size_t j = jj;
    const std::size_t i = n - 1 - j;
    const Stage& st = c.decoder[j];
    Tensor<T> g_out, g_skip_part;
    split_channels(g, f[i - 1], g_out, g_skip_part);
    if (config_.attention_gates) {
      Tensor<T> g_skip, g_gating;
      gates_[i - 1].backward(params_, c.gates[j], g_skip_part, grads, g_skip, g_gating);
      accumulate(g_out, g_gating);
      accumulate(g_enc[i - 1], g_skip);
    } else {
      accumulate(g_enc[i - 1], g_skip_part);
    }
    g = leaky_relu_backward(st.norm_out, T(0), g_out);
    g = dec_norm_[j].backward(params_, st.conv_out, g, grads);
    g = dec_conv_[j].backward(params_, st.conv_in, g, grads);
    if (s[i] == 2) g = upsample2_backward(g);
  }
  accumulate(g_enc[n - 1], g);

  Tensor<T> g_input;
  for (std::size_t i = n; i-- > 0;) {
    const Stage& st = c.encoder[i];
    Tensor<T> gi = leaky_relu_backward(st.norm_out, slope, g_enc[i]);
    gi = enc_norm_[i].backward(params_, st.conv_out, gi, grads);
    gi = enc_conv_[i].backward(params_, st.input, gi, grads);
    if (i > 0) {
      accumulate(g_enc[i - 1], gi);
    } else {
      g_input = std::move(gi);
    }
  }
  return g_input;
}

template class Generator<float>;
template class Generator<double>;

}  // namespace ppg2ecg::model
