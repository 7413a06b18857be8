#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "ppg2ecg/dataset/pairs.hpp"
#include "ppg2ecg/model/checkpoint.hpp"
#include "ppg2ecg/model/discriminator.hpp"
#include "ppg2ecg/model/generator.hpp"
#include "ppg2ecg/training/config.hpp"
#include "ppg2ecg/training/optimizer.hpp"

namespace ppg2ecg::training {

struct IterationMetrics {
  std::int64_t iteration = 0;
  int epoch = 0;
  bool d_step = false;
  double loss_d = 0;
  double loss_d_real = 0;
  double loss_d_fake = 0;
  double loss_g_adv = 0;
  double loss_freq = 0;
  double loss_g = 0;  // adv + lambda * freq
  double lr_g = 0;
  double lr_d = 0;
  double grad_norm_g = 0;
  double grad_norm_d = 0;  // zero on iterations without a discriminator step
};

struct EpochSummary {
  int epoch = 0;  // 1-based
  double mean_loss_d = 0;
  double mean_loss_g_adv = 0;
  double mean_loss_freq = 0;
  std::optional<double> validation_mape;
  std::size_t validation_failures = 0;  // windows where the synthetic ECG gave no heart rate
  std::size_t clamp_events = 0;
};

void to_json(nlohmann::json& j, const EpochSummary& e);
void from_json(const nlohmann::json& j, EpochSummary& e);

struct TrainResult {
  std::vector<EpochSummary> epochs;
  std::optional<int> best_epoch;
  std::optional<double> best_validation_mape;
  std::optional<std::size_t> best_validation_failures;
  std::int64_t iterations = 0;
  std::int64_t d_updates = 0;
  std::size_t clamp_events = 0;
};

/// Alternating adversarial training. One iteration is one generator update;
/// every `d_update_period`-th iteration first updates the discriminator.
class Trainer {
 public:
  explicit Trainer(TrainConfig config);

  const TrainConfig& config() const { return config_; }
  model::Generator<float>& generator() { return generator_; }
  const model::Generator<float>& generator() const { return generator_; }
  model::Discriminator<float>& discriminator() { return discriminator_; }

  std::int64_t iteration() const { return iteration_; }
  std::int64_t d_updates() const { return d_updates_; }
  int completed_epochs() const { return completed_epochs_; }
  std::size_t clamp_events() const { return clamp_events_; }

  /// One iteration on a batch of (batch, 1, L) PPG inputs and ECG targets.
  /// Throws NumericalAbort (with a state dump) on a non-finite loss or
  /// gradient.
  IterationMetrics step(const model::Tensor<float>& x, const model::Tensor<float>& y,
                        std::int64_t batches_per_epoch);

  using Observer = std::function<void(const IterationMetrics&)>;

  /// Runs the remaining epochs. With a run directory, writes config.json,
  /// metrics.csv, checkpoints/epoch_N.ckpt and summary.json, resuming from
  /// the newest checkpoint there. With a validation set (windows of any
  /// length the generator accepts), each epoch is scored by MAPE and the best
  /// epoch kept.
  TrainResult fit(const dataset::PairSet& train, const dataset::PairSet* validation = nullptr,
                  const std::optional<std::filesystem::path>& run_dir = std::nullopt,
                  const Observer& observer = {});

  model::Checkpoint checkpoint() const;
  /// Throws FingerprintMismatch for a different architecture.
  void restore(const model::Checkpoint& ckpt);

 private:
  TrainConfig config_;
  model::Generator<float> generator_;
  model::Discriminator<float> discriminator_;
  Adam<float> adam_g_;
  Adam<float> adam_d_;
  std::int64_t iteration_ = 0;
  std::int64_t d_updates_ = 0;
  int completed_epochs_ = 0;
  std::size_t clamp_events_ = 0;
  std::vector<EpochSummary> history_;
};

/// Newest checkpoints/epoch_N.ckpt under `run_dir`, if any.
std::optional<std::filesystem::path> latest_checkpoint(const std::filesystem::path& run_dir);

/// Assembles a (batch, 1, L) tensor from PPG or ECG items.
model::Tensor<float> gather(const dataset::PairSet& pairs, const std::vector<std::size_t>& idx,
                            bool ecg);

}  // namespace ppg2ecg::training
