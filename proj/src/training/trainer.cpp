#include "ppg2ecg/training/trainer.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include "ppg2ecg/dataset/batches.hpp"
#include "ppg2ecg/error.hpp"
#include "ppg2ecg/eval/evaluate.hpp"

namespace ppg2ecg::training {
namespace fs = std::filesystem;
namespace {

double norm(std::span<const float> g) {
  double s = 0;
  for (float v : g) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

void check_finite(const IterationMetrics& m, const char* where) {
  const double values[] = {m.loss_d, m.loss_g_adv, m.loss_freq, m.loss_g, m.grad_norm_g,
                           m.grad_norm_d};
  for (double v : values) {
    if (std::isfinite(v)) continue;
    const nlohmann::json dump = {{"where", where},
                                 {"iteration", m.iteration},
                                 {"epoch", m.epoch},
                                 {"loss_d", m.loss_d},
                                 {"loss_d_real", m.loss_d_real},
                                 {"loss_d_fake", m.loss_d_fake},
                                 {"loss_g_adv", m.loss_g_adv},
                                 {"loss_freq", m.loss_freq},
                                 {"grad_norm_g", m.grad_norm_g},
                                 {"grad_norm_d", m.grad_norm_d}};
    throw NumericalAbort(dump.dump());
  }
}


void write_metrics_header(std::ofstream& out) {
  out << "iteration,loss_d,loss_g_adv,loss_freq,lr_g,lr_d\n";
}

// Keeps the metric rows for iterations below `keep` (resume support).
void truncate_metrics(const fs::path& file, std::int64_t keep) {
  std::vector<std::string> lines;
  {
    std::ifstream in(file);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (std::stoll(line.substr(0, line.find(','))) < keep) lines.push_back(line);
    }
  }
  std::ofstream out(file, std::ios::trunc);
  write_metrics_header(out);
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace

void to_json(nlohmann::json& j, const EpochSummary& e) {
  j = {{"epoch", e.epoch},
       {"mean_loss_d", e.mean_loss_d},
       {"mean_loss_g_adv", e.mean_loss_g_adv},
       {"mean_loss_freq", e.mean_loss_freq},
       {"validation_mape", e.validation_mape ? nlohmann::json(*e.validation_mape) : nlohmann::json()},
       {"validation_failures", e.validation_failures},
       {"clamp_events", e.clamp_events}};
}

void from_json(const nlohmann::json& j, EpochSummary& e) {
  e.epoch = j.at("epoch").get<int>();
  e.mean_loss_d = j.at("mean_loss_d").get<double>();
  e.mean_loss_g_adv = j.at("mean_loss_g_adv").get<double>();
  e.mean_loss_freq = j.at("mean_loss_freq").get<double>();
  if (!j.at("validation_mape").is_null()) e.validation_mape = j.at("validation_mape").get<double>();
  e.validation_failures = j.value("validation_failures", std::size_t{0});
  e.clamp_events = j.value("clamp_events", std::size_t{0});
}

Trainer::Trainer(TrainConfig config)
    : config_((config.validate(), std::move(config))),
      generator_(config_.generator),
      discriminator_(config_.discriminator) {
  // Distinct streams for the two networks from one run seed.
  generator_.initialize(config_.seed * 2 + 0);
  discriminator_.initialize(config_.seed * 2 + 1);
  adam_g_ = Adam<float>(generator_.parameters().size(), config_.beta1, config_.beta2, config_.adam_eps);
  adam_d_ = Adam<float>(discriminator_.parameters().size(), config_.beta1, config_.beta2,
                        config_.adam_eps);
}

IterationMetrics Trainer::step(const model::Tensor<float>& x, const model::Tensor<float>& y,
                               std::int64_t batches_per_epoch) {
  IterationMetrics m;
  m.iteration = iteration_;
  m.epoch = static_cast<int>(iteration_ / batches_per_epoch);
  const double mult =
      lr_multiplier_at(iteration_, batches_per_epoch, config_.epochs, config_.lr_constant_epochs);
  m.lr_g = config_.lr_g * mult;
  m.lr_d = config_.lr_d * mult;
  const double lambda = config_.effective_lambda();
  const std::size_t b = static_cast<std::size_t>(x.batch);

  // The discriminator update leaves G untouched, so one forward serves both.
  typename model::Generator<float>::Cache gc;
  const auto fake = generator_.forward(x, &gc);

  m.d_step = discriminator_step(iteration_, config_.d_update_period);
  if (m.d_step) {
    typename model::Discriminator<float>::Cache cr, cf;
    const auto sr = discriminator_.forward(y, &cr);
    const auto sf = discriminator_.forward(fake, &cf);
    const auto adv = adversarial_loss<float>(sr, sf, config_.generator_loss);
    clamp_events_ += adv.clamped;
    std::vector<float> gr(b), gf(b);
    discriminator_score_grads<float>(sr, sf, gr, gf);
    auto grads = discriminator_.parameters().zeros_like();
    discriminator_.backward(cr, gr, grads);
    discriminator_.backward(cf, gf, grads);
    m.loss_d = adv.loss_d;
    m.loss_d_real = adv.real_term;
    m.loss_d_fake = adv.fake_term;
    m.grad_norm_d = norm(grads);
    check_finite(m, "discriminator step");
    adam_d_.step(discriminator_.parameters().flat(), grads, m.lr_d);
    ++d_updates_;
  }

  typename model::Discriminator<float>::Cache cf;
  const auto sf = discriminator_.forward(fake, &cf);
  const auto adv_g = adversarial_loss<float>({}, sf, config_.generator_loss);
  clamp_events_ += adv_g.clamped;
  if (!m.d_step) {
    const auto sr = discriminator_.forward(y);
    const auto adv = adversarial_loss<float>(sr, sf, config_.generator_loss);
    m.loss_d = adv.loss_d;
    m.loss_d_real = adv.real_term;
    m.loss_d_fake = adv.fake_term;
  }
  m.loss_g_adv = adv_g.loss_g;

  std::vector<float> gs(b);
  generator_score_grads<float>(sf, config_.generator_loss, gs);
  auto g_fake = discriminator_.backward(cf, gs, {});
  if (lambda > 0) {
    model::Tensor<float> g_freq;
    m.loss_freq = freq_loss(fake, y, &g_freq);
    const float l = static_cast<float>(lambda);
    for (std::size_t i = 0; i < g_fake.size(); ++i) g_fake.data[i] += l * g_freq.data[i];
  } else {
    m.loss_freq = freq_loss(fake, y);
  }
  m.loss_g = combined_generator_loss(m.loss_g_adv, m.loss_freq, lambda);

  auto grads = generator_.parameters().zeros_like();
  generator_.backward(gc, g_fake, grads);
  m.grad_norm_g = norm(grads);
  check_finite(m, "generator step");
  adam_g_.step(generator_.parameters().flat(), grads, m.lr_g);
  ++iteration_;
  return m;
}

model::Checkpoint Trainer::checkpoint() const {
  model::Checkpoint c;
  c.fingerprint = architecture_fingerprint(config_.generator, config_.discriminator);
  c.seed = config_.seed;
  c.epoch = completed_epochs_;
  c.meta = {{"config", config_},
            {"iteration", iteration_},
            {"d_updates", d_updates_},
            {"adam_g_steps", adam_g_.steps()},
            {"adam_d_steps", adam_d_.steps()},
            {"clamp_events", clamp_events_},
            {"history", history_}};
  model::store(generator_.parameters(), "G/", c);
  model::store(discriminator_.parameters(), "D/", c);
  model::store_flat("adam_g/m", adam_g_.first_moment(), c);
  model::store_flat("adam_g/v", adam_g_.second_moment(), c);
  model::store_flat("adam_d/m", adam_d_.first_moment(), c);
  model::store_flat("adam_d/v", adam_d_.second_moment(), c);
  return c;
}

void Trainer::restore(const model::Checkpoint& c) {
  model::require_fingerprint(c, architecture_fingerprint(config_.generator, config_.discriminator));
  model::restore(c, "G/", generator_.parameters());
  model::restore(c, "D/", discriminator_.parameters());
  const auto ng = generator_.parameters().size(), nd = discriminator_.parameters().size();
  adam_g_.first_moment() = model::restore_flat(c, "adam_g/m", ng);
  adam_g_.second_moment() = model::restore_flat(c, "adam_g/v", ng);
  adam_d_.first_moment() = model::restore_flat(c, "adam_d/m", nd);
  adam_d_.second_moment() = model::restore_flat(c, "adam_d/v", nd);
  try {
    adam_g_.set_steps(c.meta.at("adam_g_steps").get<std::int64_t>());
    adam_d_.set_steps(c.meta.at("adam_d_steps").get<std::int64_t>());
    iteration_ = c.meta.at("iteration").get<std::int64_t>();
    d_updates_ = c.meta.at("d_updates").get<std::int64_t>();
    clamp_events_ = c.meta.value("clamp_events", std::size_t{0});
    history_ = c.meta.value("history", std::vector<EpochSummary>{});
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("checkpoint lacks training state: ") + e.what());
  }
  completed_epochs_ = c.epoch;
}

model::Tensor<float> gather(const dataset::PairSet& pairs, const std::vector<std::size_t>& idx,
                            bool ecg) {
  model::Tensor<float> t(static_cast<int>(idx.size()), 1, pairs.length);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto src = ecg ? pairs.ecg_item(idx[i]) : pairs.ppg_item(idx[i]);
    std::copy(src.begin(), src.end(), t.item(static_cast<int>(i)).begin());
  }
  return t;
}

std::optional<fs::path> latest_checkpoint(const fs::path& run_dir) {
  const fs::path dir = run_dir / "checkpoints";
  if (!fs::is_directory(dir)) return std::nullopt;
  static const std::regex pattern(R"(epoch_(\d+)\.ckpt)");
  std::optional<fs::path> best;
  long best_n = -1;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern) && std::stol(m[1]) > best_n) {
      best_n = std::stol(m[1]);
      best = entry.path();
    }
  }
  return best;
}

TrainResult Trainer::fit(const dataset::PairSet& train, const dataset::PairSet* validation,
                         const std::optional<fs::path>& run_dir, const Observer& observer) {
  if (train.size() == 0) throw InputError("no training pairs");
  const auto bpe = static_cast<std::int64_t>(dataset::batches_per_epoch(
      train.size(), static_cast<std::size_t>(config_.batch_size), config_.drop_last));
  if (bpe == 0) {
    throw InputError("fewer training pairs (" + std::to_string(train.size()) +
                     ") than one batch of " + std::to_string(config_.batch_size));
  }

  std::ofstream metrics;
  if (run_dir) {
    fs::create_directories(*run_dir / "checkpoints");
    const fs::path cfg_file = *run_dir / "config.json";
    const nlohmann::json cfg = config_;
    if (fs::exists(cfg_file)) {
      std::ifstream in(cfg_file);
      nlohmann::json existing;
      try {
        existing = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception&) {
        throw InputError("malformed " + cfg_file.string());
      }
      if (existing != cfg) {
        throw FingerprintMismatch("run directory " + run_dir->string() +
                                  " holds a different configuration");
      }
    } else {
      std::ofstream(cfg_file) << cfg.dump(2) << '\n';
    }
    if (const auto latest = latest_checkpoint(*run_dir); latest && completed_epochs_ == 0) {
      restore(model::load_checkpoint(*latest));
    }
    const fs::path metrics_file = *run_dir / "metrics.csv";
    if (fs::exists(metrics_file)) {
      truncate_metrics(metrics_file, iteration_);
      metrics.open(metrics_file, std::ios::app);
    } else {
      metrics.open(metrics_file);
      write_metrics_header(metrics);
    }
    metrics.precision(9);
  }

  for (int epoch = completed_epochs_; epoch < config_.epochs; ++epoch) {
    const auto batches = dataset::epoch_batches(train.size(), static_cast<std::size_t>(config_.batch_size),
                                                config_.seed, static_cast<std::uint64_t>(epoch),
                                                config_.drop_last);
    EpochSummary summary;
    summary.epoch = epoch + 1;
    const std::size_t clamps_before = clamp_events_;
    for (const auto& idx : batches) {
      const auto m = step(gather(train, idx, false), gather(train, idx, true), bpe);
      summary.mean_loss_d += m.loss_d;
      summary.mean_loss_g_adv += m.loss_g_adv;
      summary.mean_loss_freq += m.loss_freq;
      if (metrics.is_open()) {
        metrics << m.iteration << ',' << m.loss_d << ',' << m.loss_g_adv << ',' << m.loss_freq << ','
                << m.lr_g << ',' << m.lr_d << '\n';
      }
      if (observer) observer(m);
    }
    const double n = static_cast<double>(batches.size());
    summary.mean_loss_d /= n;
    summary.mean_loss_g_adv /= n;
    summary.mean_loss_freq /= n;
    summary.clamp_events = clamp_events_ - clamps_before;
    if (validation && validation->size() > 0) {
      const auto synth = eval::synthesize(generator_, *validation);
      const auto records = eval::evaluate_windows(*validation, synth, false);
      summary.validation_failures = eval::failure_count(records);
      try {
        summary.validation_mape = eval::mape(records, eval::Subset::All).mape_percent;
      } catch (const InputError&) {
        summary.validation_mape.reset();
      }
    }
    history_.push_back(summary);
    completed_epochs_ = epoch + 1;
    if (run_dir) {
      metrics.flush();
      model::save_checkpoint(*run_dir / "checkpoints" /
                                 ("epoch_" + std::to_string(completed_epochs_) + ".ckpt"),
                             checkpoint());
    }
  }

  TrainResult result;
  result.epochs = history_;
  result.iterations = iteration_;
  result.d_updates = d_updates_;
  result.clamp_events = clamp_events_;
  for (const auto& e : history_) {
    if (e.validation_mape && (!result.best_validation_mape || *e.validation_mape < *result.best_validation_mape)) {
      result.best_validation_mape = e.validation_mape;
      result.best_epoch = e.epoch;
      result.best_validation_failures = e.validation_failures;
    }
  }
  if (run_dir) {
    const nlohmann::json summary = {
        {"objective", to_string(config_.objective)},
        {"generator_loss",
         config_.generator_loss == GeneratorLoss::NonSaturating ? "non_saturating" : "minimax"},
        {"seed", config_.seed},
        {"best_epoch", result.best_epoch ? nlohmann::json(*result.best_epoch) : nlohmann::json()},
        {"validation_mape",
         result.best_validation_mape ? nlohmann::json(*result.best_validation_mape) : nlohmann::json()},
        {"validation_failures", result.best_validation_failures
                                    ? nlohmann::json(*result.best_validation_failures)
                                    : nlohmann::json()},
        {"best_checkpoint",
         result.best_epoch ? nlohmann::json("checkpoints/epoch_" + std::to_string(*result.best_epoch) + ".ckpt")
                           : nlohmann::json()},
        {"iterations", result.iterations},
        {"d_updates", result.d_updates},
        {"clamp_events", result.clamp_events},
        {"epochs", history_}};
    std::ofstream(*run_dir / "summary.json") << summary.dump(2) << '\n';
  }
  return result;
}

}  // namespace ppg2ecg::training
