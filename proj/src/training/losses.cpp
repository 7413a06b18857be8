#include "ppg2ecg/training/losses.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "ppg2ecg/signal/spectrum.hpp"

namespace ppg2ecg::training {
namespace {

double clamp_score(double s, std::size_t& clamped) {
  if (s < kScoreEps) {
    ++clamped;
    return kScoreEps;
  }
  if (s > 1.0 - kScoreEps) {
    ++clamped;
    return 1.0 - kScoreEps;
  }
  return s;
}

bool inside(double s) { return s >= kScoreEps && s <= 1.0 - kScoreEps; }

}  // namespace

template <typename T>
AdversarialLoss adversarial_loss(std::span<const T> real_scores, std::span<const T> fake_scores,
                                 GeneratorLoss variant) {
  AdversarialLoss out;
  if (!real_scores.empty()) {
    double acc = 0;
    for (T s : real_scores) acc += std::log(clamp_score(s, out.clamped));
    out.real_term = -acc / static_cast<double>(real_scores.size());
  }
  if (!fake_scores.empty()) {
    double acc_neg = 0, acc_pos = 0;
    for (T s : fake_scores) {
      const double c = clamp_score(s, out.clamped);
      acc_neg += std::log(1.0 - c);
      acc_pos += std::log(c);
    }
    const double n = static_cast<double>(fake_scores.size());
    out.fake_term = -acc_neg / n;
    out.loss_g = variant == GeneratorLoss::NonSaturating ? -acc_pos / n : acc_neg / n;
  }
  out.loss_d = out.real_term + out.fake_term;
  return out;
}

template <typename T>
void discriminator_score_grads(std::span<const T> real_scores, std::span<const T> fake_scores,
                               std::span<T> grad_real, std::span<T> grad_fake) {
  const double nr = static_cast<double>(real_scores.size());
  for (std::size_t i = 0; i < real_scores.size(); ++i) {
    const double s = real_scores[i];
    grad_real[i] = inside(s) ? static_cast<T>(-1.0 / (nr * s)) : T(0);
  }
  const double nf = static_cast<double>(fake_scores.size());
  for (std::size_t i = 0; i < fake_scores.size(); ++i) {
    const double s = fake_scores[i];
    grad_fake[i] = inside(s) ? static_cast<T>(1.0 / (nf * (1.0 - s))) : T(0);
  }
}

template <typename T>
void generator_score_grads(std::span<const T> fake_scores, GeneratorLoss variant,
                           std::span<T> grad_fake) {
  const double n = static_cast<double>(fake_scores.size());
  for (std::size_t i = 0; i < fake_scores.size(); ++i) {
    const double s = fake_scores[i];
    if (!inside(s)) {
      grad_fake[i] = T(0);
    } else if (variant == GeneratorLoss::NonSaturating) {
      grad_fake[i] = static_cast<T>(-1.0 / (n * s));
    } else {
      grad_fake[i] = static_cast<T>(-1.0 / (n * (1.0 - s)));
    }
  }
}

template <typename T>
double freq_loss(const model::Tensor<T>& fake, const model::Tensor<T>& real,
                 model::Tensor<T>* grad_fake) {
  if (!fake.same_shape(real)) {
    throw std::invalid_argument("freq_loss: shape mismatch " + fake.shape_string() + " vs " +
                                real.shape_string());
  }
  const int batch = fake.batch;
  const std::size_t n = fake.item_size();
  if (grad_fake) *grad_fake = model::Tensor<T>(fake.batch, fake.channels, fake.length);
  if (batch == 0 || n < 2) return 0.0;

  std::vector<double> per_item(static_cast<std::size_t>(batch), 0.0);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < batch; ++b) {
    const auto fs = fake.item(b);
    const auto rs = real.item(b);
    std::vector<double> x(fs.begin(), fs.end()), y(rs.begin(), rs.end());
    const auto X = signal::fft(std::span<const double>(x));
    const auto Y = signal::magnitude_spectrum(y);
    const std::size_t half = n / 2;
    double acc = 0;
    std::vector<std::complex<double>> z(grad_fake ? n : 0);
    for (std::size_t k = 1; k <= half; ++k) {
      const double mag = std::abs(X[k]);
      const double d = mag - Y[k - 1];
      acc += std::abs(d);
      if (grad_fake && mag > 0 && d != 0) {
        z[k] = (d > 0 ? 1.0 : -1.0) / batch * std::conj(X[k]) / mag;
      }
    }
    per_item[static_cast<std::size_t>(b)] = acc;
    if (grad_fake) {
      // d|X_k|/dx_n = Re(conj(X_k) e^{-2 pi i k n / N}) / |X_k|, summed over k.
      const auto g = signal::fft(std::span<const std::complex<double>>(z));
      auto dst = grad_fake->item(b);
      for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<T>(g[i].real());
    }
  }
  double total = 0;
  for (double v : per_item) total += v;
  return total / batch;
}

#define PPG2ECG_INSTANTIATE(T)                                                                \
  template AdversarialLoss adversarial_loss<T>(std::span<const T>, std::span<const T>,        \
                                               GeneratorLoss);                                \
  template void discriminator_score_grads<T>(std::span<const T>, std::span<const T>,          \
                                             std::span<T>, std::span<T>);                     \
  template void generator_score_grads<T>(std::span<const T>, GeneratorLoss, std::span<T>);   \
  template double freq_loss<T>(const model::Tensor<T>&, const model::Tensor<T>&,              \
                               model::Tensor<T>*);
PPG2ECG_INSTANTIATE(float)
PPG2ECG_INSTANTIATE(double)
#undef PPG2ECG_INSTANTIATE

}  // namespace ppg2ecg::training
