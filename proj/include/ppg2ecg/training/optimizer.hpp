#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ppg2ecg::training {

/// Adam with bias-corrected moments.
template <typename T>
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, double beta1, double beta2, double eps);

  /// params -= lr * m_hat / (sqrt(v_hat) + eps). Increments the step count
  /// even when lr is zero so moments stay consistent with the gradients seen.
  void step(std::span<T> params, std::span<const T> grads, double lr);

  std::int64_t steps() const { return t_; }
  std::vector<T>& first_moment() { return m_; }
  std::vector<T>& second_moment() { return v_; }
  const std::vector<T>& first_moment() const { return m_; }
  const std::vector<T>& second_moment() const { return v_; }
  void set_steps(std::int64_t t) { t_ = t; }

 private:
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::int64_t t_ = 0;
  std::vector<T> m_;
  std::vector<T> v_;
};

/// Learning-rate multiplier at fractional epoch position `p` in [0, epochs]:
/// 1 up to `constant_epochs`, then linear down to 0 at `epochs`.
double lr_multiplier(double p, int epochs, int constant_epochs);

/// Multiplier used by 0-based iteration `it`: position (it + 1) / batches_per_epoch,
/// so the last iteration of the run uses exactly 0.
double lr_multiplier_at(std::int64_t it, std::int64_t batches_per_epoch, int epochs,
                        int constant_epochs);

/// Whether 0-based iteration `it` includes a discriminator update. The first
/// happens after `period` generator updates have been scheduled.
inline bool discriminator_step(std::int64_t it, int period) { return (it + 1) % period == 0; }

}  // namespace ppg2ecg::training
