#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ppg2ecg/model/config.hpp"
#include "ppg2ecg/model/layers.hpp"

namespace ppg2ecg::model {

/// 1-D U-Net with attention-gated skips.
///
/// Encoder stage i: conv(stride s_i) -> instance norm -> leaky ReLU(0.2).
/// Decoder mirrors it from the bottleneck: for i = n..2, optional x2
/// nearest upsampling (when s_i == 2), conv -> instance norm -> ReLU down to
/// f_{i-1} channels, then concatenation with the gated encoder output
/// e_{i-1}. A final (upsample +) conv to one channel and tanh give the output.
template <typename T>
class Generator {
 public:
  struct Stage {
    Tensor<T> input;  // before upsampling
    Tensor<T> conv_in;
    Tensor<T> conv_out;
    Tensor<T> norm_out;
    Tensor<T> output;
  };
  struct Cache {
    std::vector<Stage> encoder;
    std::vector<Stage> decoder;  // decoder[j] mirrors encoder stage n - j
    std::vector<typename AttentionGate<T>::Cache> gates;
    Stage head;
  };

  explicit Generator(GeneratorConfig config);

  const GeneratorConfig& config() const { return config_; }
  ParameterSet<T>& parameters() { return params_; }
  const ParameterSet<T>& parameters() const { return params_; }
  void initialize(std::uint64_t seed) { params_.initialize(seed); }

  /// Input (batch, 1, L) with L a positive multiple of length_multiple();
  /// output has the same shape with values in [-1, 1]. Throws
  /// std::invalid_argument on a shape mismatch.
  Tensor<T> forward(const Tensor<T>& x, Cache* cache = nullptr) const;

  /// Accumulates parameter gradients into `grads` (if non-empty) and returns
  /// the gradient with respect to the input.
  Tensor<T> backward(const Cache& cache, const Tensor<T>& grad_out, std::span<T> grads) const;

  /// Output lengths of the encoder stages for an input of `length`.
  std::vector<int> encoder_lengths(int length) const;

  const AttentionGate<T>& gate(std::size_t skip_index) const { return gates_.at(skip_index); }

 private:
  GeneratorConfig config_;
  ParameterSet<T> params_;
  std::vector<Conv1d<T>> enc_conv_;
  std::vector<InstanceNorm<T>> enc_norm_;
  std::vector<Conv1d<T>> dec_conv_;
  std::vector<InstanceNorm<T>> dec_norm_;
  std::vector<AttentionGate<T>> gates_;  // gates_[k] gates encoder output k
  Conv1d<T> head_;
};

}  // namespace ppg2ecg::model
