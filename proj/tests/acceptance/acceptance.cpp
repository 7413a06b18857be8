// Prints one PASS / FAIL / NOT RUN line per acceptance criterion and exits
// nonzero if any criterion that ran failed. An optional argument restricts
// the run to criteria whose name contains it.

#include <malloc.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ppg2ecg/eval/detectors.hpp"
#include "ppg2ecg/eval/evaluate.hpp"
#include "ppg2ecg/eval/metrics.hpp"
#include "ppg2ecg/model/discriminator.hpp"
#include "ppg2ecg/model/generator.hpp"
#include "ppg2ecg/signal/filter.hpp"
#include "ppg2ecg/training/losses.hpp"
#include "ppg2ecg/training/trainer.hpp"
#include "support/oracles.hpp"
#include "support/signals.hpp"
#include "support/toy.hpp"

using namespace ppg2ecg;
using model::Tensor;
namespace t = ppg2ecg::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;
std::string only;  // optional substring filter on criterion names

void criterion(const char* name, double budget_s, const std::function<Outcome()>& body) {
  if (std::string(name).find(only) == std::string::npos) return;
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = s < budget_s;
  const bool pass = o.pass && in_time;
  failures += !pass;
  std::printf("%s  %s: %s; %.1f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", name, o.detail.c_str(), s,
              budget_s, in_time ? "" : " over time");
  std::fflush(stdout);
}

void not_run(const char* name, const std::string& reason) {
  if (std::string(name).find(only) == std::string::npos) return;
  std::printf("NOT RUN  %s: %s\n", name, reason.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Tensor<double> gaussian_batch(int b, int len, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0, 1);
  Tensor<double> x(b, 1, len);
  for (auto& v : x.data) v = nd(rng);
  return x;
}

// ---------------------------------------------------------------- losses

Outcome loss_oracles() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> score(1e-4, 1 - 1e-4), lam(0.0, 2.0);
  double worst = 0;
  auto rel = [&](double a, double b) {
    worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1e-300));
  };
  for (int batch = 0; batch < 100; ++batch) {
    const int n = 1 + static_cast<int>(rng() % 64);
    std::vector<double> real(n), fake(n);
    for (int i = 0; i < n; ++i) {
      real[i] = score(rng);
      fake[i] = score(rng);
    }
    double ld = 0, lg = 0, lmm = 0;
    for (int i = 0; i < n; ++i) {
      ld += -std::log(real[i]) - std::log(1 - fake[i]);
      lg += -std::log(fake[i]);
      lmm += std::log(1 - fake[i]);
    }
    ld /= n;
    lg /= n;
    lmm /= n;
    const auto ns = training::adversarial_loss<double>(real, fake);
    const auto mm = training::adversarial_loss<double>(real, fake, training::GeneratorLoss::Minimax);
    rel(ns.loss_d, ld);
    rel(ns.loss_g, lg);
    rel(mm.loss_g, lmm);

    const int items = 1 + static_cast<int>(rng() % 4);
    const int len = 64 + static_cast<int>(rng() % 449);
    const auto a = gaussian_batch(items, len, rng), b = gaussian_batch(items, len, rng);
    double lf = 0;
    for (int i = 0; i < items; ++i) {
      const auto ma = t::direct_magnitudes({a.item(i).begin(), a.item(i).end()});
      const auto mb = t::direct_magnitudes({b.item(i).begin(), b.item(i).end()});
      for (std::size_t k = 0; k < ma.size(); ++k) lf += std::abs(ma[k] - mb[k]);
    }
    lf /= items;
    const double f = training::freq_loss(a, b);
    rel(f, lf);
    const double l = lam(rng);
    rel(training::combined_generator_loss(ns.loss_g, f, l), lg + l * lf);
  }
  return {worst <= 1e-6, fmt("max relative error %.2e over 100 batches (tolerance 1e-6)", worst)};
}

Outcome shift_invariance() {
  std::mt19937_64 rng(77);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int len = 512;
    const auto x = gaussian_batch(1, len, rng);
    const int s = static_cast<int>(rng() % len);
    Tensor<double> rot(1, 1, len), zero(1, 1, len);
    for (int n = 0; n < len; ++n) rot(0, 0, (n + s) % len) = x(0, 0, n);
    worst = std::max(worst, training::freq_loss(x, rot) / training::freq_loss(x, zero));
  }
  return {worst <= 1e-5, fmt("max L(x, rot(x)) / L(x, 0) = %.2e over 1000 pairs (tolerance 1e-5)", worst)};
}

// ---------------------------------------------------------------- gradients

std::vector<double> central_differences(std::span<double> params, const std::function<double()>& f) {
  const double h = 1e-6;
  std::vector<double> g(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = f();
    params[i] = keep - h;
    const double down = f();
    params[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

// Worst elementwise relative error. Entries whose gradient is negligible
// next to the overall gradient scale (bias terms feeding an instance norm)
// are compared against that scale instead of themselves.
double worst_relative(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  double norm = 0;
  for (double v : numeric) norm = std::max(norm, std::abs(v));
  double worst = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double den = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-4 * norm});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / den);
  }
  return worst;
}

Outcome gradient_checks() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(0, 1);

  model::GeneratorConfig gc;
  gc.encoder_filters = {2, 3, 2};
  gc.encoder_strides = {2, 1, 2};
  gc.kernel_size = 3;
  gc.input_length = 16;
  model::Generator<double> g(gc);
  g.initialize(11);
  for (auto& v : g.parameters().flat()) v *= 20.0;
  const auto x = gaussian_batch(2, 16, rng);
  std::vector<double> w(x.size());
  for (auto& v : w) v = nd(rng);
  auto g_loss = [&] {
    const auto y = g.forward(x);
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * y.data[i];
    return s;
  };
  typename model::Generator<double>::Cache gcache;
  g.forward(x, &gcache);
  Tensor<double> gout(2, 1, 16);
  std::copy(w.begin(), w.end(), gout.data.begin());
  auto g_grads = g.parameters().zeros_like();
  g.backward(gcache, gout, g_grads);
  const double g_err = worst_relative(g_grads, central_differences(g.parameters().flat(), g_loss));

  model::DiscriminatorConfig dc;
  dc.filters = {2, 3};
  dc.kernel_size = 3;
  model::Discriminator<double> d(dc);
  d.initialize(3);
  for (auto& v : d.parameters().flat()) v *= 30.0;
  const auto y = gaussian_batch(3, 12, rng);
  const std::vector<double> dw{0.7, -1.3, 0.4};
  auto d_loss = [&] {
    const auto s = d.forward(y);
    return dw[0] * s[0] + dw[1] * s[1] + dw[2] * s[2];
  };
  typename model::Discriminator<double>::Cache dcache;
  d.forward(y, &dcache);
  auto d_grads = d.parameters().zeros_like();
  d.backward(dcache, dw, d_grads);
  const double d_err = worst_relative(d_grads, central_differences(d.parameters().flat(), d_loss));

  return {g_err <= 1e-3 && d_err <= 1e-3,
          fmt("worst parameter relative error G %.2e (%zu params), D %.2e (%zu params); tolerance 1e-3", g_err,
              g_grads.size(), d_err, d_grads.size())};
}

// ---------------------------------------------------------------- filters

double probe_gain(const signal::BandpassFilter& f, double freq_hz) {
  const double rate = f.rate();
  const auto n = static_cast<std::size_t>(std::max(60.0, 20.0 / freq_hz) * rate);
  const auto y = f.apply(t::sine(n, freq_hz, rate));
  return t::tone_amplitude(y, freq_hz, rate, n / 10);
}

Outcome filter_conformance() {
  constexpr double rate = 128.0;
  bool ok = true;
  std::string detail;
  for (const auto& [name, spec] : {std::pair{"PPG", signal::ppg_bandpass_spec()},
                                   std::pair{"ECG", signal::ecg_bandpass_spec()}}) {
    const signal::BandpassFilter f(spec, rate);
    const double high_probe = std::min(2.0 * spec.high_hz, 0.95 * rate / 2);
    const double low_db = -20 * std::log10(probe_gain(f, 0.5 * spec.low_hz));
    const double high_db = -20 * std::log10(probe_gain(f, high_probe));
    const double center = std::sqrt(spec.low_hz * spec.high_hz);
    const double ripple_db = std::abs(20 * std::log10(probe_gain(f, center)));
    ok = ok && low_db >= 20 && high_db >= 20 && ripple_db <= 3;
    detail += fmt("%s stop %.1f dB @%.2f Hz, %.1f dB @%.1f Hz, center %.2f dB @%.2f Hz; ", name, low_db,
                  0.5 * spec.low_hz, high_db, high_probe, ripple_db, center);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

// ---------------------------------------------------------------- detectors

Outcome peak_detectors() {
  constexpr double rate = 128.0;
  constexpr std::size_t n = 1280;
  double qrs_worst = 0, ppg_worst = 0;
  int misses = 0;
  for (int noisy = 0; noisy < 2; ++noisy) {
    for (double bpm = 40; bpm <= 200; bpm += 1) {
      auto x = t::qrs_train(bpm, rate, n);
      if (noisy) x = t::add_noise(x, 20, static_cast<std::uint64_t>(bpm));
      const auto hr = eval::heart_rate(eval::detect_qrs(x, rate), rate);
      if (!hr) ++misses;
      else qrs_worst = std::max(qrs_worst, std::abs(*hr - bpm));
    }
  }
  for (double bpm = 40; bpm <= 150; bpm += 1) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto x = t::add_noise(t::pulse_train(bpm, rate, n, std::min(0.4, 0.6 * 60 / bpm)), 10,
                                  s * 1000 + static_cast<std::uint64_t>(bpm));
      const auto hr = eval::heart_rate(eval::detect_ppg_peaks(x, rate), rate);
      if (!hr) ++misses;
      else ppg_worst = std::max(ppg_worst, std::abs(*hr - bpm));
    }
  }
  return {misses == 0 && qrs_worst <= 2 && ppg_worst <= 5,
          fmt("QRS 40-200 bpm clean and 20 dB worst error %.2f bpm (tolerance 2); PPG 40-150 bpm at 10 dB "
              "worst error %.2f bpm (tolerance 5); %d windows without a rate",
              qrs_worst, ppg_worst, misses)};
}

// ---------------------------------------------------------------- training

training::TrainConfig toy_config(int seed) {
  auto c = training::TrainConfig::defaults(training::Objective::GanPlusFreq);
  c.generator.encoder_filters = {16, 32, 64};
  c.generator.encoder_strides = {2, 2, 2};
  c.discriminator.filters = {16, 32, 64};
  c.batch_size = 16;
  c.epochs = 5;
  c.lr_constant_epochs = 2;
  c.lr_g = 1e-3;
  c.lr_d = 1e-4;
  c.seed = static_cast<std::uint64_t>(seed);
  return c;
}

Outcome toy_end_to_end() {
  int decreasing = 0, under = 0;
  std::string detail;
  for (int seed = 0; seed < 5; ++seed) {
    const auto train = t::toy_pairs(2000, 512, 1000 + static_cast<std::uint64_t>(seed));
    const auto val = t::toy_pairs(100, 1280, 5000 + static_cast<std::uint64_t>(seed));
    training::Trainer trainer(toy_config(seed));
    const auto r = trainer.fit(train);
    bool dec = true;
    for (int e = 1; e < 3; ++e) dec = dec && r.epochs[e].mean_loss_freq < r.epochs[e - 1].mean_loss_freq;
    const auto records = eval::evaluate_windows(val, eval::synthesize(trainer.generator(), val), false);
    const double m = eval::mape(records, eval::Subset::All).mape_percent;
    decreasing += dec;
    under += m < 10;
    detail += fmt("seed %d MAPE %.2f%% L_freq %.1f>%.1f>%.1f; ", seed, m, r.epochs[0].mean_loss_freq,
                  r.epochs[1].mean_loss_freq, r.epochs[2].mean_loss_freq);
  }
  detail += fmt("MAPE < 10%% in %d/5, L_freq decreasing in %d/5 (need 4)", under, decreasing);
  return {under == 5 && decreasing >= 4, detail};
}

Outcome lambda_zero() {
  const auto data = t::toy_pairs(16, 512, 1);
  auto gan = training::TrainConfig::defaults(training::Objective::Gan);
  auto freq = training::TrainConfig::defaults(training::Objective::GanPlusFreq);
  freq.lambda_freq = 0;
  // Same schedule for both; the objectives default to different epoch counts.
  freq.epochs = gan.epochs;
  freq.lr_constant_epochs = gan.lr_constant_epochs;
  for (auto* c : {&gan, &freq}) {
    c->generator.encoder_filters = {8, 16};
    c->generator.encoder_strides = {2, 2};
    c->discriminator.filters = {8, 16};
    c->batch_size = 16;
    c->seed = 9;
  }
  training::Trainer a(gan), b(freq);
  std::vector<std::size_t> idx(16);
  std::iota(idx.begin(), idx.end(), 0);
  const auto x = training::gather(data, idx, false), y = training::gather(data, idx, true);
  // Five iterations so that a discriminator update is included.
  for (int i = 0; i < 5; ++i) {
    a.step(x, y, 317);
    b.step(x, y, 317);
  }
  const auto ga = a.generator().parameters().flat(), gb = b.generator().parameters().flat();
  const auto da = a.discriminator().parameters().flat(), db = b.discriminator().parameters().flat();
  const bool g_same = std::equal(ga.begin(), ga.end(), gb.begin());
  const bool d_same = std::equal(da.begin(), da.end(), db.begin());
  return {g_same && d_same && a.d_updates() == 1,
          fmt("after 5 steps (%lld discriminator update) generator %s, discriminator %s",
              static_cast<long long>(a.d_updates()), g_same ? "bit-identical" : "differs",
              d_same ? "bit-identical" : "differs")};
}

// ---------------------------------------------------------------- dataset

Outcome segment_counts(const fs::path& interchange) {
  const auto out = fs::temp_directory_path() / "ppg2ecg_acceptance_counts";
  fs::remove_all(out);
  const std::string cmd = std::string(PPG2ECG_CLI) + " --out " + out.string() + " preprocess --in " +
                          interchange.string() + " > /dev/null";
  if (std::system(cmd.c_str()) != 0) return {false, "preprocess failed"};
  std::ifstream in(out / "split.json");
  const auto report = nlohmann::json::parse(in);
  if (!report.contains("reference_comparison")) {
    return {false, fmt("expected 15 subjects, found %zu", report.at("subjects").size())};
  }
  const auto& cmp = report.at("reference_comparison");
  bool exact = true;
  std::string detail;
  for (const char* s : {"train", "validation", "test"}) {
    const auto got = cmp.at(s).at("actual").get<long>(), ref = cmp.at(s).at("reference").get<long>();
    exact = exact && got == ref;
    detail += fmt("%s %ld vs %ld; ", s, got, ref);
  }
  detail += "per-subject counts in " + (out / "split.json").string();
  return {exact, detail};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) only = argv[1];
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);

  criterion("Loss oracle equivalence", 10, loss_oracles);
  criterion("Frequency loss shift invariance", 10, shift_invariance);
  criterion("Gradient checks", 120, gradient_checks);
  criterion("Filter conformance", 30, filter_conformance);
  criterion("Peak-detector oracle", 60, peak_detectors);
  criterion("Lambda_freq = 0 degeneracy", 60, lambda_zero);
  criterion("Toy end-to-end", 900, toy_end_to_end);

  if (const char* dir = std::getenv("PPG2ECG_DALIA_INTERCHANGE")) {
    criterion("Segment counts", 600, [&] { return segment_counts(dir); });
  } else {
    not_run("Segment counts",
            "dataset-required; set PPG2ECG_DALIA_INTERCHANGE to a directory of converted PPG-DaLiA subjects");
  }
  not_run("Test-set MAPE reproduction",
          "long-running optional; needs the converted dataset and 31-seed full-scale training "
          "(ppg2ecg sweep, then evaluate on the best checkpoint)");
  not_run("Stability direction over seeds",
          "long-running optional; needs at least 11 full-scale seeds per objective "
          "(ppg2ecg sweep for each objective, then ppg2ecg report)");
  return failures == 0 ? 0 : 1;
}
