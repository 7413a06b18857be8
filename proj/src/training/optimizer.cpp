#include "ppg2ecg/training/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ppg2ecg::training {

template <typename T>
Adam<T>::Adam(std::size_t size, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, T(0)), v_(size, T(0)) {}

template <typename T>
void Adam<T>::step(std::span<T> params, std::span<const T> grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw std::invalid_argument("Adam: size mismatch");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const T b1 = static_cast<T>(beta1_), b2 = static_cast<T>(beta2_);
  const T step = static_cast<T>(lr / c1);
  const T inv_c2 = static_cast<T>(1.0 / c2);
  const T eps = static_cast<T>(eps_);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(params.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const T g = grads[i];
    m_[i] = b1 * m_[i] + (T(1) - b1) * g;
    v_[i] = b2 * v_[i] + (T(1) - b2) * g * g;
    params[i] -= step * m_[i] / (std::sqrt(v_[i] * inv_c2) + eps);
  }
}

template class Adam<float>;
template class Adam<double>;

double lr_multiplier(double p, int epochs, int constant_epochs) {
  if (p <= constant_epochs) return 1.0;
  if (p >= epochs) return 0.0;
  return (epochs - p) / static_cast<double>(epochs - constant_epochs);
}

double lr_multiplier_at(std::int64_t it, std::int64_t batches_per_epoch, int epochs,
                        int constant_epochs) {
  const double p = static_cast<double>(it + 1) / static_cast<double>(batches_per_epoch);
  return lr_multiplier(p, epochs, constant_epochs);
}

}  // namespace ppg2ecg::training
