#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ppg2ecg/dataset/batches.hpp"
#include "ppg2ecg/error.hpp"
#include "ppg2ecg/training/losses.hpp"
#include "ppg2ecg/training/optimizer.hpp"
#include "ppg2ecg/training/sweep.hpp"
#include "ppg2ecg/training/trainer.hpp"
#include "support/oracles.hpp"
#include "support/toy.hpp"

using namespace ppg2ecg;
using namespace ppg2ecg::training;
using model::Tensor;
namespace fs = std::filesystem;

namespace {

std::vector<double> uniform_scores(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

Tensor<double> random_batch(int b, int len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0, 1);
  Tensor<double> t(b, 1, len);
  for (auto& v : t.data) v = nd(rng);
  return t;
}

// Scalar-loop evaluation of the frequency loss from direct DFT sums.
double freq_oracle(const Tensor<double>& fake, const Tensor<double>& real) {
  double acc = 0;
  for (int b = 0; b < fake.batch; ++b) {
    std::vector<double> f(fake.item(b).begin(), fake.item(b).end());
    std::vector<double> r(real.item(b).begin(), real.item(b).end());
    const auto mf = ppg2ecg::testing::direct_magnitudes(f), mr = ppg2ecg::testing::direct_magnitudes(r);
    for (std::size_t k = 0; k < mf.size(); ++k) acc += std::abs(mf[k] - mr[k]);
  }
  return acc / fake.batch;
}

TrainConfig tiny_config(Objective objective = Objective::GanPlusFreq) {
  auto c = TrainConfig::defaults(objective);
  c.generator.encoder_filters = {4, 8};
  c.generator.encoder_strides = {2, 2};
  c.generator.kernel_size = 5;
  c.generator.input_length = 64;
  c.discriminator.filters = {4, 8};
  c.discriminator.kernel_size = 5;
  c.batch_size = 8;
  c.epochs = 3;
  c.lr_constant_epochs = 1;
  c.lr_g = 1e-3;
  c.lr_d = 1e-4;
  c.seed = 5;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("ppg2ecg_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

// Adversarial loss ----------------------------------------------------------------

TEST(AdversarialLoss, Indifference) {
  const std::vector<double> half(16, 0.5);
  const auto l = adversarial_loss<double>(half, half);
  EXPECT_NEAR(l.loss_d, 2 * std::log(2.0), 1e-12);
  EXPECT_NEAR(l.loss_g, std::log(2.0), 1e-12);
  EXPECT_EQ(l.clamped, 0u);
}

TEST(AdversarialLoss, PerfectDiscriminator) {
  const std::vector<double> real(4, 1.0), fake(4, 0.0);
  const auto l = adversarial_loss<double>(real, fake);
  EXPECT_LT(l.loss_d, 1e-6);
  EXPECT_EQ(l.clamped, 8u);
  EXPECT_TRUE(std::isfinite(l.loss_g));
}

TEST(AdversarialLoss, MatchesScalarLoop) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto r = uniform_scores(32, s), f = uniform_scores(32, s + 1000);
    double lr = 0, lf = 0, lg = 0, lm = 0;
    for (int i = 0; i < 32; ++i) {
      lr -= std::log(r[i]) / 32;
      lf -= std::log(1 - f[i]) / 32;
      lg -= std::log(f[i]) / 32;
      lm += std::log(1 - f[i]) / 32;
    }
    const auto ns = adversarial_loss<double>(r, f, GeneratorLoss::NonSaturating);
    const auto mm = adversarial_loss<double>(r, f, GeneratorLoss::Minimax);
    EXPECT_NEAR(ns.loss_d, lr + lf, 1e-12 * (lr + lf));
    EXPECT_NEAR(ns.real_term, lr, 1e-12 * lr);
    EXPECT_NEAR(ns.loss_g, lg, 1e-12 * lg);
    EXPECT_NEAR(mm.loss_g, lm, 1e-12 * std::abs(lm));
  }
}

TEST(AdversarialLoss, ScoreGradientsMatchFiniteDifferences) {
  auto r = uniform_scores(6, 1), f = uniform_scores(6, 2);
  std::vector<double> gr(6), gf(6), gg(6), gm(6);
  discriminator_score_grads<double>(r, f, gr, gf);
  generator_score_grads<double>(f, GeneratorLoss::NonSaturating, gg);
  generator_score_grads<double>(f, GeneratorLoss::Minimax, gm);
  const double h = 1e-7;
  for (int i = 0; i < 6; ++i) {
    auto num = [&](std::vector<double>& v, auto fn) {
      const double keep = v[i];
      v[i] = keep + h;
      const double up = fn();
      v[i] = keep - h;
      const double down = fn();
      v[i] = keep;
      return (up - down) / (2 * h);
    };
    EXPECT_NEAR(gr[i], num(r, [&] { return adversarial_loss<double>(r, f).loss_d; }), 1e-6);
    EXPECT_NEAR(gf[i], num(f, [&] { return adversarial_loss<double>(r, f).loss_d; }), 1e-6);
    EXPECT_NEAR(gg[i], num(f, [&] { return adversarial_loss<double>(r, f).loss_g; }), 1e-6);
    EXPECT_NEAR(gm[i], num(f, [&] {
                  return adversarial_loss<double>(r, f, GeneratorLoss::Minimax).loss_g;
                }), 1e-6);
  }
}

// Frequency loss ----------------------------------------------------------------------

TEST(FreqLoss, IdenticalIsZero) {
  const auto x = random_batch(4, 512, 1);
  EXPECT_EQ(freq_loss(x, x), 0.0);
}

TEST(FreqLoss, SineAgainstZeros) {
  Tensor<double> real(1, 1, 512), fake(1, 1, 512);
  for (int n = 0; n < 512; ++n) real.data[n] = std::sin(2 * std::numbers::pi * 8 * n / 512);
  EXPECT_NEAR(freq_loss(fake, real), 256.0, 1e-9);
  EXPECT_NEAR(freq_oracle(fake, real), 256.0, 1e-9);
}

TEST(FreqLoss, MatchesDirectDftOracle) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = random_batch(3, 64 + static_cast<int>(s), s), b = random_batch(3, 64 + static_cast<int>(s), s + 50);
    const double o = freq_oracle(a, b);
    EXPECT_NEAR(freq_loss(a, b), o, 1e-9 * o);
  }
}

TEST(FreqLoss, CircularShiftInvariant) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = random_batch(2, 512, trial);
    Tensor<double> rot(2, 1, 512), zero(2, 1, 512);
    const int s = static_cast<int>(rng() % 512);
    for (int b = 0; b < 2; ++b) {
      for (int n = 0; n < 512; ++n) rot(b, 0, (n + s) % 512) = x(b, 0, n);
    }
    EXPECT_LE(freq_loss(x, rot), 1e-5 * freq_loss(x, zero));
  }
}

TEST(FreqLoss, NonNegativeAndShapeChecked) {
  for (std::uint64_t s = 0; s < 20; ++s) EXPECT_GE(freq_loss(random_batch(2, 32, s), random_batch(2, 32, s + 7)), 0.0);
  EXPECT_THROW(freq_loss(random_batch(2, 32, 0), random_batch(2, 16, 0)), std::invalid_argument);
}

TEST(FreqLoss, GradientMatchesFiniteDifferences) {
  for (int len : {16, 15}) {
    auto fake = random_batch(2, len, 3);
    const auto real = random_batch(2, len, 4);
    Tensor<double> g;
    freq_loss(fake, real, &g);
    const double h = 1e-6;
    for (std::size_t i = 0; i < fake.size(); ++i) {
      const double keep = fake.data[i];
      fake.data[i] = keep + h;
      const double up = freq_loss(fake, real);
      fake.data[i] = keep - h;
      const double down = freq_loss(fake, real);
      fake.data[i] = keep;
      EXPECT_NEAR(g.data[i], (up - down) / (2 * h), 1e-5) << len << " " << i;
    }
  }
}

// Combined objective ------------------------------------------------------------------

TEST(CombinedLoss, Arithmetic) {
  EXPECT_EQ(combined_generator_loss(0.6931, 10, 0), 0.6931);
  EXPECT_NEAR(combined_generator_loss(0.6931, 10, 0.1), 1.6931, 1e-12);
}

TEST(CombinedLoss, GradientIsSumOfParts) {
  model::DiscriminatorConfig dc;
  dc.filters = {3, 4};
  dc.kernel_size = 3;
  model::Discriminator<double> d(dc);
  d.initialize(2);
  for (auto& v : d.parameters().flat()) v *= 20;
  auto y = random_batch(2, 16, 5);
  const auto real = random_batch(2, 16, 6);
  const double lambda = 0.1;
  auto objective = [&] {
    const auto s = d.forward(y);
    return combined_generator_loss(adversarial_loss<double>({}, s).loss_g, freq_loss(y, real), lambda);
  };
  typename model::Discriminator<double>::Cache cache;
  const auto s = d.forward(y, &cache);
  std::vector<double> gs(2);
  generator_score_grads<double>(s, GeneratorLoss::NonSaturating, gs);
  const auto g_adv = d.backward(cache, gs, {});
  Tensor<double> g_freq;
  freq_loss(y, real, &g_freq);
  const double h = 1e-6;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double keep = y.data[i];
    y.data[i] = keep + h;
    const double up = objective();
    y.data[i] = keep - h;
    const double down = objective();
    y.data[i] = keep;
    EXPECT_NEAR(g_adv.data[i] + lambda * g_freq.data[i], (up - down) / (2 * h), 1e-6) << i;
  }
}

// Optimizer and schedule ------------------------------------------------------------------

TEST(Adam, MatchesScalarRecurrence) {
  Adam<double> opt(3, 0.9, 0.999, 1e-8);
  std::vector<double> p{1.0, -2.0, 0.5}, ref = p, m(3, 0), v(3, 0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (int t = 1; t <= 10; ++t) {
    std::vector<double> g{nd(rng), nd(rng), nd(rng)};
    opt.step(p, g, 1e-2);
    for (int i = 0; i < 3; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * g[i];
      v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(0.9, t)), vh = v[i] / (1 - std::pow(0.999, t));
      ref[i] -= 1e-2 * mh / (std::sqrt(vh) + 1e-8);
    }
  }
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], ref[i], 1e-12);
  EXPECT_EQ(opt.steps(), 10);
}

TEST(LrSchedule, EndpointsAndLinearDecay) {
  EXPECT_EQ(lr_multiplier(0, 15, 4), 1.0);
  EXPECT_EQ(lr_multiplier(4, 15, 4), 1.0);
  for (int e = 4; e <= 15; ++e) EXPECT_NEAR(lr_multiplier(e, 15, 4), (15.0 - e) / 11.0, 1e-15);
  EXPECT_EQ(lr_multiplier(15, 15, 4), 0.0);
  EXPECT_EQ(lr_multiplier(11, 11, 5), 0.0);
}

TEST(LrSchedule, PerIterationMonotoneToExactZero) {
  const std::int64_t bpe = 317;
  double prev = 2;
  for (std::int64_t it = 0; it < bpe * 15; ++it) {
    const double m = lr_multiplier_at(it, bpe, 15, 4);
    EXPECT_LE(m, prev);
    prev = m;
    if (it < bpe * 4) {
      EXPECT_EQ(m, 1.0);
    }
  }
  EXPECT_EQ(lr_multiplier_at(bpe * 15 - 1, bpe, 15, 4), 0.0);
  EXPECT_GT(lr_multiplier_at(bpe * 15 - 2, bpe, 15, 4), 0.0);
}

TEST(Cadence, DiscriminatorUpdateCount) {
  std::int64_t count = 0, last = -1;
  for (std::int64_t it = 0; it < 317 * 15; ++it) {
    if (discriminator_step(it, 5)) {
      if (last >= 0) {
        EXPECT_EQ(it - last, 5);
      }
      last = it;
      ++count;
    }
  }
  EXPECT_EQ(count, 951);
  EXPECT_EQ(dataset::batches_per_epoch(40675, 128), 317u);
}

// Configuration -------------------------------------------------------------------------

TEST(TrainConfig, DefaultsPerObjective) {
  const auto g = TrainConfig::defaults(Objective::Gan);
  EXPECT_EQ(g.epochs, 15);
  EXPECT_EQ(g.lr_constant_epochs, 4);
  EXPECT_EQ(g.effective_lambda(), 0.0);
  const auto f = TrainConfig::defaults(Objective::GanPlusFreq);
  EXPECT_EQ(f.epochs, 11);
  EXPECT_EQ(f.lr_constant_epochs, 5);
  EXPECT_EQ(f.effective_lambda(), 0.1);
  EXPECT_EQ(f.lr_g, 1e-4);
  EXPECT_EQ(f.lr_d, 1e-5);
  EXPECT_EQ(f.batch_size, 128);
  EXPECT_EQ(f.d_update_period, 5);
}

TEST(TrainConfig, JsonRoundTripAndValidation) {
  auto c = tiny_config();
  c.generator_loss = GeneratorLoss::Minimax;
  const nlohmann::json j = c;
  EXPECT_EQ(nlohmann::json(j.get<TrainConfig>()), j);
  c.lr_constant_epochs = c.epochs;
  EXPECT_THROW(c.validate(), InputError);
  EXPECT_THROW(parse_objective("wgan"), InputError);
  EXPECT_THROW(nlohmann::json({{"objective", "gan"}, {"lr_g", "fast"}}).get<TrainConfig>(), InputError);
}

// Trainer -----------------------------------------------------------------------------------

TEST(Trainer, LambdaZeroStepBitIdenticalToGan) {
  const auto data = ppg2ecg::testing::toy_pairs(16, 64, 1);
  auto gan = tiny_config(Objective::Gan);
  auto freq = tiny_config(Objective::GanPlusFreq);
  freq.lambda_freq = 0;
  freq.epochs = gan.epochs;
  freq.lr_constant_epochs = gan.lr_constant_epochs;
  Trainer a(gan), b(freq);
  const std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5, 6, 7};
  for (int i = 0; i < 5; ++i) {  // includes a discriminator step
    a.step(gather(data, idx, false), gather(data, idx, true), 2);
    b.step(gather(data, idx, false), gather(data, idx, true), 2);
  }
  const auto ga = a.generator().parameters().flat(), gb = b.generator().parameters().flat();
  EXPECT_TRUE(std::equal(ga.begin(), ga.end(), gb.begin()));
  const auto da = a.discriminator().parameters().flat(), db = b.discriminator().parameters().flat();
  EXPECT_TRUE(std::equal(da.begin(), da.end(), db.begin()));
}

TEST(Trainer, FreqTermChangesTheStep) {
  const auto data = ppg2ecg::testing::toy_pairs(8, 64, 1);
  Trainer a(tiny_config(Objective::Gan)), b(tiny_config(Objective::GanPlusFreq));
  const std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5, 6, 7};
  a.step(gather(data, idx, false), gather(data, idx, true), 2);
  b.step(gather(data, idx, false), gather(data, idx, true), 2);
  const auto ga = a.generator().parameters().flat(), gb = b.generator().parameters().flat();
  EXPECT_FALSE(std::equal(ga.begin(), ga.end(), gb.begin()));
}

TEST(Trainer, ScheduleCountsAndLossHistoryDeterminism) {
  const auto data = ppg2ecg::testing::toy_pairs(40, 64, 2);  // 5 batches per epoch
  std::vector<IterationMetrics> first, second;
  Trainer a(tiny_config());
  const auto ra = a.fit(data, nullptr, std::nullopt, [&](const IterationMetrics& m) { first.push_back(m); });
  Trainer b(tiny_config());
  b.fit(data, nullptr, std::nullopt, [&](const IterationMetrics& m) { second.push_back(m); });
  ASSERT_EQ(first.size(), 15u);
  EXPECT_EQ(ra.iterations, 15);
  EXPECT_EQ(ra.d_updates, 3);
  for (std::size_t i = 0; i < first.size(); ++i) {
    EXPECT_EQ(first[i].loss_g, second[i].loss_g);
    EXPECT_EQ(first[i].loss_d, second[i].loss_d);
    EXPECT_EQ(first[i].d_step, (i + 1) % 5 == 0);
    EXPECT_GE(first[i].loss_freq, 0.0);
  }
  EXPECT_EQ(first.front().lr_g, 1e-3);
  EXPECT_EQ(first.back().lr_g, 0.0);
  EXPECT_EQ(first.back().lr_d, 0.0);
}

TEST(Trainer, RunDirectoryAndResume) {
  const auto data = ppg2ecg::testing::toy_pairs(24, 64, 3);
  const auto val = ppg2ecg::testing::toy_pairs(4, 1280, 4);
  const auto full_dir = fresh_dir("run_full"), split_dir = fresh_dir("run_split");
  Trainer full(tiny_config());
  const auto r = full.fit(data, &val, full_dir);
  for (const char* f : {"config.json", "metrics.csv", "summary.json", "checkpoints/epoch_1.ckpt",
                        "checkpoints/epoch_2.ckpt", "checkpoints/epoch_3.ckpt"}) {
    EXPECT_TRUE(fs::exists(full_dir / f)) << f;
  }
  EXPECT_EQ(r.epochs.size(), 3u);

  auto short_cfg = tiny_config();
  {
    // Interrupted after epoch 1: strip the later epochs of a complete run.
    Trainer t(short_cfg);
    t.fit(data, &val, split_dir);
    fs::remove(split_dir / "checkpoints/epoch_2.ckpt");
    fs::remove(split_dir / "checkpoints/epoch_3.ckpt");
    fs::remove(split_dir / "summary.json");
  }
  Trainer resumed(short_cfg);
  resumed.fit(data, &val, split_dir);
  EXPECT_EQ(slurp(full_dir / "metrics.csv"), slurp(split_dir / "metrics.csv"));
  EXPECT_EQ(slurp(full_dir / "summary.json"), slurp(split_dir / "summary.json"));

  const auto summary = nlohmann::json::parse(slurp(full_dir / "summary.json"));
  EXPECT_TRUE(summary.contains("best_epoch"));
  EXPECT_TRUE(summary.contains("validation_mape"));
  std::ifstream metrics(full_dir / "metrics.csv");
  std::string header;
  std::getline(metrics, header);
  EXPECT_EQ(header, "iteration,loss_d,loss_g_adv,loss_freq,lr_g,lr_d");

  auto other = tiny_config();
  other.lr_g = 5e-4;
  Trainer clash(other);
  EXPECT_THROW(clash.fit(data, nullptr, full_dir), FingerprintMismatch);
}

TEST(Trainer, CheckpointRoundTrip) {
  Trainer a(tiny_config());
  const auto data = ppg2ecg::testing::toy_pairs(8, 64, 7);
  const std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5, 6, 7};
  for (int i = 0; i < 6; ++i) a.step(gather(data, idx, false), gather(data, idx, true), 2);
  const auto file = fresh_dir("ckpt") / "a.ckpt";
  model::save_checkpoint(file, a.checkpoint());
  Trainer b(tiny_config());
  b.restore(model::load_checkpoint(file));
  EXPECT_EQ(b.iteration(), 6);
  EXPECT_EQ(b.d_updates(), 1);
  const auto ma = a.step(gather(data, idx, false), gather(data, idx, true), 2);
  const auto mb = b.step(gather(data, idx, false), gather(data, idx, true), 2);
  EXPECT_EQ(ma.loss_g, mb.loss_g);
  const auto ga = a.generator().parameters().flat(), gb = b.generator().parameters().flat();
  EXPECT_TRUE(std::equal(ga.begin(), ga.end(), gb.begin()));

  auto wider = tiny_config();
  wider.generator.encoder_filters = {4, 16};
  Trainer c(wider);
  EXPECT_THROW(c.restore(model::load_checkpoint(file)), FingerprintMismatch);
}

TEST(Trainer, CorruptCheckpointRejected) {
  const auto dir = fresh_dir("bad_ckpt");
  fs::create_directories(dir);
  std::ofstream(dir / "x.ckpt") << "not a checkpoint";
  EXPECT_THROW(model::load_checkpoint(dir / "x.ckpt"), InputError);
  EXPECT_THROW(model::load_checkpoint(dir / "missing.ckpt"), InputError);
}

TEST(Trainer, NonFiniteLossAborts) {
  Trainer t(tiny_config());
  auto data = ppg2ecg::testing::toy_pairs(8, 64, 8);
  std::fill(data.ecg.begin(), data.ecg.begin() + 64, std::numeric_limits<float>::quiet_NaN());
  const std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5, 6, 7};
  try {
    t.step(gather(data, idx, false), gather(data, idx, true), 2);
    FAIL() << "expected NumericalAbort";
  } catch (const NumericalAbort& e) {
    const auto dump = nlohmann::json::parse(e.what());
    EXPECT_EQ(dump["iteration"], 0);
    EXPECT_TRUE(dump.contains("grad_norm_g"));
  }
}

TEST(Trainer, TooFewPairs) {
  Trainer t(tiny_config());
  EXPECT_THROW(t.fit(ppg2ecg::testing::toy_pairs(3, 64, 1)), InputError);
}

// Seed sweep ----------------------------------------------------------------------------------

TEST(SeedSweep, SingleSeedDegenerate) {
  auto cfg = tiny_config();
  cfg.epochs = 2;
  const auto data = ppg2ecg::testing::toy_pairs(16, 64, 1);
  const auto val = ppg2ecg::testing::toy_pairs(4, 1280, 2);
  const auto dir = fresh_dir("sweep1");
  const auto r = seed_sweep(cfg, {3}, data, &val, dir);
  ASSERT_EQ(r.runs.size(), 1u);
  EXPECT_TRUE(r.runs[0].ok) << r.runs[0].error;
  EXPECT_EQ(r.mape.std, 0.0);
  const auto again = collect_sweep({dir / "seed_3"});
  EXPECT_EQ(again.runs[0].seed, 3u);
  EXPECT_EQ(again.runs[0].validation_mape, r.runs[0].validation_mape);
  EXPECT_THROW(seed_sweep(cfg, {1, 1}, data, &val, dir), InputError);
}

TEST(SeedSweep, FailureRecordedAndSweepContinues) {
  auto cfg = tiny_config();
  cfg.epochs = 2;
  const auto data = ppg2ecg::testing::toy_pairs(16, 64, 1);
  const auto dir = fresh_dir("sweep2");
  // Pre-seed a clashing config into one run directory.
  fs::create_directories(dir / "seed_1");
  std::ofstream(dir / "seed_1" / "config.json") << "{\"objective\": \"gan\"}";
  const auto r = seed_sweep(cfg, {1, 2}, data, nullptr, dir);
  EXPECT_FALSE(r.runs[0].ok);
  EXPECT_FALSE(r.runs[0].error.empty());
  EXPECT_TRUE(r.runs[1].ok);
}
