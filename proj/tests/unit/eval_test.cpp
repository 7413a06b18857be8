#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "ppg2ecg/error.hpp"
#include "ppg2ecg/eval/detectors.hpp"
#include "ppg2ecg/eval/evaluate.hpp"
#include "ppg2ecg/eval/metrics.hpp"
#include "support/signals.hpp"

using namespace ppg2ecg;
using namespace ppg2ecg::eval;
namespace t = ppg2ecg::testing;

namespace {

constexpr double kRate = 128.0;
constexpr std::size_t kWindow = 1280;

EvalRecord rec(const char* activity, std::optional<double> real, std::optional<double> synth) {
  return {"S1", activity, 0, real, synth, std::nullopt};
}

// Two-sided p-value by Simpson integration of the Student t density.
double t_pvalue_oracle(double tv, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) /
                   std::sqrt(df * std::numbers::pi);
  auto pdf = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
  const double a = 0, b = std::abs(tv);
  const int n = 20000;
  const double h = (b - a) / n;
  double s = pdf(a) + pdf(b);
  for (int i = 1; i < n; ++i) s += pdf(a + i * h) * (i % 2 ? 4 : 2);
  return 1.0 - 2.0 * s * h / 3.0;
}

}  // namespace

// QRS detector -----------------------------------------------------------------

TEST(DetectQrs, SixtyBpm) {
  const auto peaks = detect_qrs(t::qrs_train(60, kRate, kWindow), kRate);
  EXPECT_NEAR(static_cast<double>(peaks.size()), 10.0, 1.0);
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    EXPECT_NEAR(static_cast<double>(peaks[i] - peaks[i - 1]), 128.0, 2.0);
  }
}

TEST(DetectQrs, OneEightyBpm) {
  const auto peaks = detect_qrs(t::qrs_train(180, kRate, kWindow), kRate);
  EXPECT_NEAR(static_cast<double>(peaks.size()), 30.0, 1.0);
}

TEST(DetectQrs, ZeroSignalFails) {
  const std::vector<double> zero(kWindow, 0.0);
  const auto peaks = detect_qrs(zero, kRate);
  EXPECT_TRUE(peaks.empty());
  EXPECT_FALSE(heart_rate(peaks, kRate).has_value());
}

TEST(DetectQrs, RecoversRateAcrossRangeCleanAndNoisy) {
  for (int noisy = 0; noisy < 2; ++noisy) {
    for (double bpm = 40; bpm <= 200; bpm += 5) {
      auto x = t::qrs_train(bpm, kRate, kWindow);
      if (noisy) x = t::add_noise(x, 20, static_cast<std::uint64_t>(bpm));
      const auto hr = heart_rate(detect_qrs(x, kRate), kRate);
      ASSERT_TRUE(hr.has_value()) << bpm;
      EXPECT_NEAR(*hr, bpm, 2.0) << "bpm " << bpm << " noisy " << noisy;
    }
  }
}

TEST(DetectQrs, IncreasingWithRefractorySpacing) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = t::add_noise(t::qrs_train(70 + 5.0 * seed, kRate, kWindow), 5, seed);
    const auto peaks = detect_qrs(x, kRate);
    for (std::size_t i = 1; i < peaks.size(); ++i) {
      EXPECT_GE(peaks[i] - peaks[i - 1], static_cast<std::size_t>(std::ceil(0.2 * kRate)));
    }
    EXPECT_EQ(peaks, detect_qrs(x, kRate));
  }
}

TEST(DetectQrs, InvertedPolarity) {
  auto x = t::qrs_train(75, kRate, kWindow);
  for (double& v : x) v = -v;
  const auto hr = heart_rate(detect_qrs(x, kRate), kRate);
  ASSERT_TRUE(hr.has_value());
  EXPECT_NEAR(*hr, 75.0, 2.0);
}

// PPG detector -----------------------------------------------------------------

TEST(DetectPpg, OneHertzPulseTrain) {
  const auto peaks = detect_ppg_peaks(t::pulse_train(60, kRate, kWindow), kRate);
  EXPECT_NEAR(static_cast<double>(peaks.size()), 10.0, 1.0);
  for (std::size_t i = 1; i < peaks.size(); ++i) EXPECT_GT(peaks[i], peaks[i - 1]);
}

TEST(DetectPpg, ZeroSignalFails) {
  const std::vector<double> zero(kWindow, 0.0);
  EXPECT_FALSE(heart_rate(detect_ppg_peaks(zero, kRate), kRate).has_value());
}

TEST(DetectPpg, NoisyTrainsWithinFiveBpm) {
  for (double bpm = 40; bpm <= 150; bpm += 5) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto x = t::add_noise(t::pulse_train(bpm, kRate, kWindow, std::min(0.4, 0.6 * 60 / bpm)),
                                  10, s * 1000 + static_cast<std::uint64_t>(bpm));
      const auto hr = heart_rate(detect_ppg_peaks(x, kRate), kRate);
      ASSERT_TRUE(hr.has_value()) << bpm;
      EXPECT_NEAR(*hr, bpm, 5.0) << "bpm " << bpm << " seed " << s;
    }
  }
}

// Heart rate -------------------------------------------------------------------

TEST(HeartRate, Examples) {
  const std::vector<std::size_t> one_s{0, 128, 256, 384};
  EXPECT_DOUBLE_EQ(*heart_rate(one_s, kRate), 60.0);
  const std::vector<std::size_t> half_s{0, 64, 128, 192};
  EXPECT_DOUBLE_EQ(*heart_rate(half_s, kRate), 120.0);
  const std::vector<std::size_t> single{10};
  EXPECT_FALSE(heart_rate(single, kRate).has_value());
}

TEST(HeartRate, PhysiologicalBounds) {
  const std::vector<std::size_t> slow{0, 500};  // 15.4 bpm
  EXPECT_FALSE(heart_rate(slow, kRate).has_value());
  const std::vector<std::size_t> fast{0, 20, 40};  // 384 bpm
  EXPECT_FALSE(heart_rate(fast, kRate).has_value());
  const std::vector<std::size_t> edge{0, 384};  // exactly 20 bpm
  EXPECT_TRUE(heart_rate(edge, kRate).has_value());
}

// MAPE and subsets ---------------------------------------------------------------

TEST(Mape, IdenticalIsZero) {
  std::vector<EvalRecord> r{rec("sitting", 60, 60), rec("cycling", 95, 95), rec("walking", 120, 120)};
  const auto m = mape(r, Subset::All);
  EXPECT_EQ(m.mape_percent, 0.0);
  EXPECT_EQ(m.n_failures, 0u);
  EXPECT_EQ(m.n_windows, 3u);
}

TEST(Mape, SingleWindowFivePercent) {
  EXPECT_NEAR(mape({rec("sitting", 60, 63)}, Subset::All).mape_percent, 5.0, 1e-12);
}

TEST(Mape, MatchesDirectFormula) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(40, 180);
  std::vector<EvalRecord> r;
  double acc = 0;
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = u(rng);
    r.push_back(rec("working", a, b));
    acc += std::abs(a - b) / a;
  }
  EXPECT_NEAR(mape(r, Subset::Active).mape_percent, 100.0 * acc / 200, 1e-9);
}

TEST(Mape, ScaleAwareness) {
  std::vector<EvalRecord> r{rec("sitting", 60, 66), rec("sitting", 80, 76), rec("lunch", 100, 90)};
  const double base = mape(r, Subset::All).mape_percent;
  auto doubled = r, shifted = r;
  for (auto& x : doubled) {
    x.hr_real = *x.hr_real * 2;
    x.hr_synth = *x.hr_synth * 2;
  }
  for (auto& x : shifted) {
    x.hr_real = *x.hr_real + 30;
    x.hr_synth = *x.hr_synth + 30;
  }
  EXPECT_NEAR(mape(doubled, Subset::All).mape_percent, base, 1e-12);
  EXPECT_GT(std::abs(mape(shifted, Subset::All).mape_percent - base), 1e-3);
}

TEST(Mape, FailureHandling) {
  std::vector<EvalRecord> r{rec("sitting", 60, 63), rec("sitting", 60, std::nullopt),
                            rec("sitting", std::nullopt, 70), rec("sitting", std::nullopt, std::nullopt)};
  const auto ex = mape(r, Subset::All);
  EXPECT_NEAR(ex.mape_percent, 5.0, 1e-12);
  EXPECT_EQ(ex.n_windows, 2u);
  EXPECT_EQ(ex.n_failures, 1u);
  EXPECT_EQ(ex.n_real_failures, 2u);
  EXPECT_LE(ex.n_failures, ex.n_windows);
  const auto full = mape(r, Subset::All, FailurePolicy::CountAsFullError);
  EXPECT_NEAR(full.mape_percent, 52.5, 1e-12);
  EXPECT_EQ(failure_count(r), 1u);
}

TEST(Mape, EmptySubsetThrows) {
  EXPECT_THROW(mape({rec("sitting", 60, 60)}, Subset::Active), InputError);
  EXPECT_THROW(mape({rec("transient", 60, 60)}, Subset::All), InputError);
}

TEST(FailureCount, ZeroOutputsCounted) {
  std::vector<EvalRecord> r;
  for (int i = 0; i < 10; ++i) r.push_back(rec("sitting", 70, 70));
  EXPECT_EQ(failure_count(r), 0u);
  // k windows whose synthetic ECG is all zeros.
  const std::vector<double> zero(kWindow, 0.0);
  for (int k = 0; k < 4; ++k) r[k].hr_synth = heart_rate(detect_qrs(zero, kRate), kRate);
  EXPECT_EQ(failure_count(r), 4u);
}

TEST(ActivitySubset, Membership) {
  EXPECT_TRUE(in_subset("cycling", Subset::Active));
  EXPECT_FALSE(in_subset("cycling", Subset::NotActive));
  EXPECT_TRUE(in_subset("sitting", Subset::NotActive));
  EXPECT_TRUE(in_subset("lunch", Subset::NotActive));
  for (Subset s : {Subset::All, Subset::Active, Subset::NotActive}) {
    EXPECT_FALSE(in_subset("transient", s));
  }
  for (const char* a : {"stairs", "table_soccer", "cycling", "driving", "walking", "working"}) {
    EXPECT_TRUE(in_subset(a, Subset::Active)) << a;
    EXPECT_TRUE(in_subset(a, Subset::All)) << a;
  }
  EXPECT_THROW(in_subset("swimming", Subset::All), InputError);
  const auto sub = activity_subset({rec("sitting", 1, 1), rec("walking", 1, 1), rec("transient", 1, 1)},
                                   Subset::Active);
  ASSERT_EQ(sub.size(), 1u);
  EXPECT_EQ(sub[0].activity, "walking");
}

// Distribution comparison ----------------------------------------------------------

TEST(CompareDistributions, IdenticalLists) {
  const std::vector<double> a{10, 12, 15, 11};
  const auto d = compare_distributions(a, a);
  EXPECT_EQ(d.t, 0.0);
  EXPECT_DOUBLE_EQ(d.p, 1.0);
}

TEST(CompareDistributions, HandComputed) {
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  const auto d = compare_distributions(a, b);
  // pooled variance 1, se = sqrt(2/3), t = -3 / sqrt(2/3)
  EXPECT_NEAR(d.t, -3.0 / std::sqrt(2.0 / 3.0), 1e-12);
  EXPECT_NEAR(d.t, -3.674, 5e-4);
  EXPECT_EQ(d.df, 4.0);
  EXPECT_NEAR(d.p, t_pvalue_oracle(d.t, 4), 1e-8);
  EXPECT_DOUBLE_EQ(d.a.mean, 2.0);
  EXPECT_DOUBLE_EQ(d.b.std, 1.0);
}

TEST(CompareDistributions, ThirtyOnePerSide) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n1(20, 12), n2(12, 3);
  std::vector<double> a(31), b(31);
  for (auto& v : a) v = n1(rng);
  for (auto& v : b) v = n2(rng);
  const auto d = compare_distributions(a, b);
  EXPECT_EQ(d.df, 60.0);
  EXPECT_NEAR(d.p, t_pvalue_oracle(d.t, 60), 1e-8);
}

TEST(CompareDistributions, DegenerateAndTooSmall) {
  const std::vector<double> a{1, 1, 1}, b{2, 2};
  const auto d = compare_distributions(a, b);
  EXPECT_TRUE(std::isinf(d.t));
  EXPECT_EQ(d.p, 0.0);
  EXPECT_TRUE(d.degenerate);
  const std::vector<double> one{1};
  EXPECT_THROW(compare_distributions(one, b), InputError);
}

TEST(Describe, SingleValueHasZeroStd) {
  const std::vector<double> v{7.5};
  const auto d = describe(v);
  EXPECT_EQ(d.mean, 7.5);
  EXPECT_EQ(d.std, 0.0);
}

// Windows and reports ----------------------------------------------------------------

TEST(EvaluateWindows, SelfTestGivesZeroMape) {
  dataset::PairSet set;
  set.length = static_cast<int>(kWindow);
  const char* labels[] = {"sitting", "walking", "cycling", "lunch"};
  for (int i = 0; i < 8; ++i) {
    const auto ecg = t::qrs_train(55 + 9 * i, kRate, kWindow);
    const auto ppg = t::pulse_train(55 + 9 * i, kRate, kWindow);
    set.ecg.insert(set.ecg.end(), ecg.begin(), ecg.end());
    set.ppg.insert(set.ppg.end(), ppg.begin(), ppg.end());
    set.info.push_back({"S" + std::to_string(i % 2), labels[i % 4], static_cast<std::size_t>(i) * 256});
  }
  const auto records = evaluate_windows(set, set.ecg, true);
  for (Subset s : {Subset::All, Subset::Active, Subset::NotActive}) {
    const auto m = mape(records, s);
    EXPECT_EQ(m.mape_percent, 0.0);
    EXPECT_EQ(m.n_failures, 0u);
  }
  EXPECT_EQ(failure_count(records), 0u);
  EXPECT_LT(mape(records, Subset::All, FailurePolicy::Exclude, Estimator::PpgBaseline).mape_percent, 5.0);

  const auto dir = std::filesystem::temp_directory_path() / "ppg2ecg_eval_report";
  std::filesystem::remove_all(dir);
  write_report(dir, records, true, {{"note", "x"}});
  std::ifstream in(dir / "report.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["subsets"]["All"]["mape_percent"].get<double>(), 0.0);
  EXPECT_EQ(j["note"], "x");
  std::ifstream csv(dir / "report.csv");
  std::string line;
  std::size_t rows = 0;
  std::getline(csv, line);
  EXPECT_EQ(line, "subject,activity,origin,hr_real,hr_synth,hr_ppg_baseline,real_failed,synth_failed,ppg_failed");
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 8u);
  // Deterministic repeat.
  const auto again = evaluate_windows(set, set.ecg, true);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(records[i].hr_real, again[i].hr_real);
    EXPECT_EQ(records[i].hr_ppg, again[i].hr_ppg);
  }
}
