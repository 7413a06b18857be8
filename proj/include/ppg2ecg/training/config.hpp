#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "ppg2ecg/model/config.hpp"
#include "ppg2ecg/training/losses.hpp"

namespace ppg2ecg::training {

enum class Objective { Gan, GanPlusFreq };

std::string to_string(Objective o);
/// Accepts "gan" and "gan_freq"; throws InputError otherwise.
Objective parse_objective(const std::string& s);

struct TrainConfig {
  Objective objective = Objective::GanPlusFreq;
  GeneratorLoss generator_loss = GeneratorLoss::NonSaturating;
  double lr_g = 1e-4;
  double lr_d = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_size = 128;
  int d_update_period = 5;
  int epochs = 11;
  int lr_constant_epochs = 5;
  double lambda_freq = 0.1;
  std::uint64_t seed = 0;
  bool drop_last = true;
  model::GeneratorConfig generator;
  model::DiscriminatorConfig discriminator;

  /// Schedule defaults per objective: 15 epochs / 4 constant for GAN,
  /// 11 / 5 with the frequency term.
  static TrainConfig defaults(Objective objective);

  /// Frequency weight actually applied (zero for the plain objective).
  double effective_lambda() const {
    return objective == Objective::GanPlusFreq ? lambda_freq : 0.0;
  }
  /// Throws InputError.
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
/// Missing keys keep the objective's defaults.
void from_json(const nlohmann::json& j, TrainConfig& c);

/// Fingerprint of the network architecture, used by checkpoints.
std::string architecture_fingerprint(const model::GeneratorConfig& g,
                                     const model::DiscriminatorConfig& d);

}  // namespace ppg2ecg::training
