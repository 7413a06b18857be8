#include "ppg2ecg/training/config.hpp"

#include "ppg2ecg/error.hpp"

namespace ppg2ecg::training {

std::string to_string(Objective o) { return o == Objective::Gan ? "gan" : "gan_freq"; }

Objective parse_objective(const std::string& s) {
  if (s == "gan") return Objective::Gan;
  if (s == "gan_freq" || s == "gan_plus_freq") return Objective::GanPlusFreq;
  throw InputError("unknown objective '" + s + "' (expected gan or gan_freq)");
}

TrainConfig TrainConfig::defaults(Objective objective) {
  TrainConfig c;
  c.objective = objective;
  if (objective == Objective::Gan) {
    c.epochs = 15;
    c.lr_constant_epochs = 4;
  } else {
    c.epochs = 11;
    c.lr_constant_epochs = 5;
  }
  return c;
}

void TrainConfig::validate() const {
  if (!(lr_g > 0) || !(lr_d > 0)) throw InputError("learning rates must be positive");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1) || !(adam_eps > 0)) {
    throw InputError("invalid optimizer constants");
  }
  if (batch_size < 1 || d_update_period < 1) throw InputError("batch_size and d_update_period must be >= 1");
  if (epochs < 1 || lr_constant_epochs < 0 || lr_constant_epochs >= epochs) {
    throw InputError("need 0 <= lr_constant_epochs < epochs");
  }
  if (!(lambda_freq >= 0)) throw InputError("lambda_freq must be non-negative");
  generator.validate();
  discriminator.validate();
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"objective", to_string(c.objective)},
       {"generator_loss",
        c.generator_loss == GeneratorLoss::NonSaturating ? "non_saturating" : "minimax"},
       {"lr_g", c.lr_g},
       {"lr_d", c.lr_d},
       {"betas", {c.beta1, c.beta2}},
       {"adam_eps", c.adam_eps},
       {"batch_size", c.batch_size},
       {"d_update_period", c.d_update_period},
       {"epochs", c.epochs},
       {"lr_constant_epochs", c.lr_constant_epochs},
       {"lambda_freq", c.lambda_freq},
       {"seed", c.seed},
       {"drop_last", c.drop_last},
       {"generator", c.generator},
       {"discriminator", c.discriminator}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  try {
    c = TrainConfig::defaults(parse_objective(j.value("objective", std::string("gan_freq"))));
    const auto loss = j.value("generator_loss", std::string("non_saturating"));
    if (loss == "non_saturating") {
      c.generator_loss = GeneratorLoss::NonSaturating;
    } else if (loss == "minimax") {
      c.generator_loss = GeneratorLoss::Minimax;
    } else {
      throw InputError("unknown generator_loss '" + loss + "'");
    }
    c.lr_g = j.value("lr_g", c.lr_g);
    c.lr_d = j.value("lr_d", c.lr_d);
    if (j.contains("betas")) {
      c.beta1 = j.at("betas").at(0).get<double>();
      c.beta2 = j.at("betas").at(1).get<double>();
    }
    c.adam_eps = j.value("adam_eps", c.adam_eps);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.d_update_period = j.value("d_update_period", c.d_update_period);
    c.epochs = j.value("epochs", c.epochs);
    c.lr_constant_epochs = j.value("lr_constant_epochs", c.lr_constant_epochs);
    c.lambda_freq = j.value("lambda_freq", c.lambda_freq);
    c.seed = j.value("seed", c.seed);
    c.drop_last = j.value("drop_last", c.drop_last);
    if (j.contains("generator")) c.generator = j.at("generator").get<model::GeneratorConfig>();
    if (j.contains("discriminator")) {
      c.discriminator = j.at("discriminator").get<model::DiscriminatorConfig>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed training config: ") + e.what());
  }
}

std::string architecture_fingerprint(const model::GeneratorConfig& g,
                                     const model::DiscriminatorConfig& d) {
  return model::fingerprint({{"generator", g}, {"discriminator", d}});
}

}  // namespace ppg2ecg::training
