#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "ppg2ecg/kernels/conv1d.hpp"
#include "ppg2ecg/model/parameters.hpp"
#include "ppg2ecg/model/tensor.hpp"

namespace ppg2ecg::model {

// Layers hold only parameter indices; values live in a ParameterSet so the
// same layer objects serve any copy of the parameters. Backward passes take
// the forward inputs back from the caller, return the input gradient and
// accumulate parameter gradients into `grads` (skipped when empty).

template <typename T>
class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(ParameterSet<T>& params, const std::string& name, int in_channels, int out_channels,
         int kernel, int stride, bool bias = true);

  kernels::Conv1dGeometry geometry(int input_length) const;
  int in_channels() const { return in_channels_; }
  int out_channels() const { return out_channels_; }
  std::size_t weight_index() const { return weight_; }
  std::optional<std::size_t> bias_index() const { return bias_; }

  Tensor<T> forward(const ParameterSet<T>& params, const Tensor<T>& x) const;
  Tensor<T> backward(const ParameterSet<T>& params, const Tensor<T>& x, const Tensor<T>& gy,
                     std::span<T> grads, bool input_grad = true) const;

 private:
  int in_channels_ = 0;
  int out_channels_ = 0;
  int kernel_ = 1;
  int stride_ = 1;
  std::size_t weight_ = 0;
  std::optional<std::size_t> bias_;
};

template <typename T>
class InstanceNorm {
 public:
  static constexpr T kEps = T(1e-5);

  InstanceNorm() = default;
  InstanceNorm(ParameterSet<T>& params, const std::string& name, int channels);

  Tensor<T> forward(const ParameterSet<T>& params, const Tensor<T>& x) const;
  Tensor<T> backward(const ParameterSet<T>& params, const Tensor<T>& x, const Tensor<T>& gy,
                     std::span<T> grads) const;

 private:
  int channels_ = 0;
  std::size_t gamma_ = 0;
  std::size_t beta_ = 0;
};

/// Additive attention gate: alpha = sigmoid(psi(relu(theta(skip) + phi(gating))))
/// with 1-wide convolutions, output = skip * alpha broadcast over channels.
/// The gating signal is aligned to the skip length by nearest-neighbour
/// indexing when the lengths differ.
template <typename T>
class AttentionGate {
 public:
  struct Cache {
    Tensor<T> skip;
    Tensor<T> aligned;
    Tensor<T> pre;  // theta + phi, before the rectifier
    Tensor<T> q;
    Tensor<T> alpha;
    int gating_length = 0;
  };

  AttentionGate() = default;
  AttentionGate(ParameterSet<T>& params, const std::string& name, int skip_channels,
                int gating_channels);

  int intermediate_channels() const { return theta_.out_channels(); }
  const Conv1d<T>& psi() const { return psi_; }

  /// Throws std::invalid_argument on channel or batch mismatch.
  Tensor<T> forward(const ParameterSet<T>& params, const Tensor<T>& skip, const Tensor<T>& gating,
                    Cache* cache = nullptr) const;
  /// Coefficients alpha, shape (batch, 1, skip length).
  Tensor<T> coefficients(const ParameterSet<T>& params, const Tensor<T>& skip,
                         const Tensor<T>& gating) const;
  void backward(const ParameterSet<T>& params, const Cache& cache, const Tensor<T>& g_out,
                std::span<T> grads, Tensor<T>& g_skip, Tensor<T>& g_gating) const;

 private:
  Conv1d<T> theta_;
  Conv1d<T> phi_;
  Conv1d<T> psi_;
  int skip_channels_ = 0;
  int gating_channels_ = 0;
};

// Tensor-level activations.
template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope);
template <typename T>
Tensor<T> leaky_relu_backward(const Tensor<T>& x, T slope, const Tensor<T>& gy);
template <typename T>
Tensor<T> upsample2(const Tensor<T>& x);
template <typename T>
Tensor<T> upsample2_backward(const Tensor<T>& gy);

}  // namespace ppg2ecg::model
