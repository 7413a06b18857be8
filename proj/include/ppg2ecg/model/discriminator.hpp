#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ppg2ecg/model/config.hpp"
#include "ppg2ecg/model/layers.hpp"

namespace ppg2ecg::model {

/// Stack of same-padded convolutions with leaky ReLU(0.2), a one-channel
/// head convolution, global average pooling and a sigmoid.
template <typename T>
class Discriminator {
 public:
  struct Cache {
    std::vector<Tensor<T>> inputs;     // input of each conv, head last
    std::vector<Tensor<T>> pre;        // conv outputs before activation
    Tensor<T> head_out;
    std::vector<T> scores;
  };

  explicit Discriminator(DiscriminatorConfig config);

  const DiscriminatorConfig& config() const { return config_; }
  ParameterSet<T>& parameters() { return params_; }
  const ParameterSet<T>& parameters() const { return params_; }
  void initialize(std::uint64_t seed) { params_.initialize(seed); }
  const Conv1d<T>& head() const { return head_; }

  /// One probability in (0, 1) per batch item. Input must be (batch, 1, L).
  std::vector<T> forward(const Tensor<T>& y, Cache* cache = nullptr) const;

  /// `grad_scores[b]` is dLoss/dscore_b. Parameter gradients accumulate into
  /// `grads` when non-empty; the input gradient is returned.
  Tensor<T> backward(const Cache& cache, std::span<const T> grad_scores, std::span<T> grads) const;

 private:
  DiscriminatorConfig config_;
  ParameterSet<T> params_;
  std::vector<Conv1d<T>> convs_;
  Conv1d<T> head_;
};

}  // namespace ppg2ecg::model
