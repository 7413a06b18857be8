#pragma once

#include <cstddef>
#include <span>

#include "ppg2ecg/model/tensor.hpp"

namespace ppg2ecg::training {

enum class GeneratorLoss { NonSaturating, Minimax };

/// Scores are clamped to [eps, 1 - eps] before logarithms.
inline constexpr double kScoreEps = 1e-7;

struct AdversarialLoss {
  double loss_d = 0;     // real_term + fake_term
  double real_term = 0;  // -mean log D(y)
  double fake_term = 0;  // -mean log(1 - D(G(x)))
  double loss_g = 0;
  std::size_t clamped = 0;
};

/// Either score span may be empty, in which case its terms are zero.
template <typename T>
AdversarialLoss adversarial_loss(std::span<const T> real_scores, std::span<const T> fake_scores,
                                 GeneratorLoss variant = GeneratorLoss::NonSaturating);

/// d loss_d / d score for real and fake scores (zero where clamped).
template <typename T>
void discriminator_score_grads(std::span<const T> real_scores, std::span<const T> fake_scores,
                               std::span<T> grad_real, std::span<T> grad_fake);

/// d loss_g / d fake score (zero where clamped).
template <typename T>
void generator_score_grads(std::span<const T> fake_scores, GeneratorLoss variant,
                           std::span<T> grad_fake);

/// Batch mean of the L1 distance between DC-excluded DFT magnitudes of each
/// item. Shapes must match; throws std::invalid_argument otherwise. When
/// `grad_fake` is given it receives d loss / d fake (same shape).
template <typename T>
double freq_loss(const model::Tensor<T>& fake, const model::Tensor<T>& real,
                 model::Tensor<T>* grad_fake = nullptr);

inline double combined_generator_loss(double adv_g, double lf, double lambda_freq) {
  return adv_g + lambda_freq * lf;
}

}  // namespace ppg2ecg::training
