#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace ppg2ecg::eval {

struct EvalRecord {
  std::string subject;
  std::string activity;
  std::size_t origin = 0;
  std::optional<double> hr_real;
  std::optional<double> hr_synth;
  std::optional<double> hr_ppg;  // PPG baseline, when computed
};

enum class Subset { All, NotActive, Active };
std::string to_string(Subset s);

/// Throws InputError for labels outside the activity vocabulary.
bool in_subset(const std::string& label, Subset subset);
std::vector<EvalRecord> activity_subset(const std::vector<EvalRecord>& records, Subset subset);

/// How windows whose estimate failed enter the mean.
enum class FailurePolicy { Exclude, CountAsFullError };
enum class Estimator { Synthetic, PpgBaseline };

struct MapeSummary {
  double mape_percent = 0;
  std::size_t n_windows = 0;        // windows with a valid reference rate
  std::size_t n_failures = 0;       // of those, estimator failed
  std::size_t n_real_failures = 0;  // reference itself failed; excluded
};

/// 100 / N * sum |hr_real - hr_est| / hr_real. Throws InputError when the
/// subset has no usable window.
MapeSummary mape(const std::vector<EvalRecord>& records, Subset subset,
                 FailurePolicy policy = FailurePolicy::Exclude,
                 Estimator estimator = Estimator::Synthetic);

/// Windows with a valid real rate whose synthetic rate failed.
std::size_t failure_count(const std::vector<EvalRecord>& records);

struct Description {
  double mean = 0;
  double std = 0;  // sample standard deviation; 0 for a single value
  std::size_t n = 0;
};
Description describe(std::span<const double> values);

struct SeedDistribution {
  Description a;
  Description b;
  double t = 0;
  double df = 0;
  double p = 1;
  bool degenerate = false;  // zero pooled variance with different means
};

/// Pooled-variance two-sample Student t-test, two-sided. Needs at least two
/// values per side (InputError otherwise).
SeedDistribution compare_distributions(std::span<const double> a, std::span<const double> b);

inline constexpr const char* kNormalityCaveat =
    "t-test assumes approximately normal per-seed MAPE distributions with equal variances";

nlohmann::json summary_json(const std::vector<EvalRecord>& records, bool with_baseline);

/// report.json (per-subset MAPE under both failure policies, failure counts,
/// optional extras) and report.csv (one row per window).
void write_report(const std::filesystem::path& dir, const std::vector<EvalRecord>& records,
                  bool with_baseline, const nlohmann::json& extra = nlohmann::json::object());

}  // namespace ppg2ecg::eval
