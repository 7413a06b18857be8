#include "ppg2ecg/eval/metrics.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <fstream>
#include <limits>

#include "ppg2ecg/dataset/interchange.hpp"
#include "ppg2ecg/error.hpp"

namespace ppg2ecg::eval {
namespace {

constexpr std::string_view kActive[] = {"stairs", "table_soccer", "cycling",
                                        "driving", "walking",     "working"};

std::string csv_rate(const std::optional<double>& hr) {
  if (!hr) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *hr);
  return buf;
}

}  // namespace

std::string to_string(Subset s) {
  switch (s) {
    case Subset::All: return "All";
    case Subset::NotActive: return "NotActive";
    case Subset::Active: return "Active";
  }
  return "?";
}

bool in_subset(const std::string& label, Subset subset) {
  if (!dataset::is_known_activity(label)) throw InputError("unknown activity label '" + label + "'");
  if (label == "transient") return false;
  if (subset == Subset::All) return true;
  const bool active = std::find(std::begin(kActive), std::end(kActive), label) != std::end(kActive);
  return subset == Subset::Active ? active : !active;
}

std::vector<EvalRecord> activity_subset(const std::vector<EvalRecord>& records, Subset subset) {
  std::vector<EvalRecord> out;
  for (const auto& r : records) {
    if (in_subset(r.activity, subset)) out.push_back(r);
  }
  return out;
}

MapeSummary mape(const std::vector<EvalRecord>& records, Subset subset, FailurePolicy policy,
                 Estimator estimator) {
  MapeSummary s;
  double acc = 0;
  std::size_t used = 0;
  for (const auto& r : records) {
    if (!in_subset(r.activity, subset)) continue;
    if (!r.hr_real) {
      ++s.n_real_failures;
      continue;
    }
    ++s.n_windows;
    const auto& est = estimator == Estimator::Synthetic ? r.hr_synth : r.hr_ppg;
    if (!est) {
      ++s.n_failures;
      if (policy == FailurePolicy::CountAsFullError) {
        acc += 1.0;
        ++used;
      }
      continue;
    }
    acc += std::abs(*r.hr_real - *est) / *r.hr_real;
    ++used;
  }
  if (used == 0) throw InputError("no usable windows in subset " + to_string(subset));
  s.mape_percent = 100.0 * acc / static_cast<double>(used);
  return s;
}

std::size_t failure_count(const std::vector<EvalRecord>& records) {
  std::size_t n = 0;
  for (const auto& r : records) n += (r.hr_real && !r.hr_synth) ? 1 : 0;
  return n;
}

Description describe(std::span<const double> values) {
  Description d;
  d.n = values.size();
  if (values.empty()) return d;
  for (double v : values) d.mean += v;
  d.mean /= static_cast<double>(d.n);
  if (d.n >= 2) {
    double ss = 0;
    for (double v : values) ss += (v - d.mean) * (v - d.mean);
    d.std = std::sqrt(ss / static_cast<double>(d.n - 1));
  }
  return d;
}

SeedDistribution compare_distributions(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw InputError("t-test needs at least two values per distribution");
  }
  SeedDistribution out;
  out.a = describe(a);
  out.b = describe(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  out.df = na + nb - 2;
  const double pooled =
      ((na - 1) * out.a.std * out.a.std + (nb - 1) * out.b.std * out.b.std) / out.df;
  const double diff = out.a.mean - out.b.mean;
  const double se = std::sqrt(pooled * (1 / na + 1 / nb));
  if (se == 0) {
    if (diff == 0) {
      out.t = 0;
      out.p = 1;
    } else {
      out.t = diff > 0 ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
      out.p = 0;
      out.degenerate = true;
    }
    return out;
  }
  out.t = diff / se;
  const boost::math::students_t dist(out.df);
  out.p = 2 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t)));
  return out;
}

nlohmann::json summary_json(const std::vector<EvalRecord>& records, bool with_baseline) {
  nlohmann::json subsets = nlohmann::json::object();
  for (Subset s : {Subset::All, Subset::NotActive, Subset::Active}) {
    nlohmann::json entry;
    try {
      const auto ex = mape(records, s, FailurePolicy::Exclude);
      const auto full = mape(records, s, FailurePolicy::CountAsFullError);
      entry = {{"mape_percent", ex.mape_percent},
               {"mape_percent_failures_as_100", full.mape_percent},
               {"n_windows", ex.n_windows},
               {"n_failures", ex.n_failures},
               {"n_real_failures", ex.n_real_failures}};
      if (with_baseline) {
        const auto ppg = mape(records, s, FailurePolicy::Exclude, Estimator::PpgBaseline);
        entry["ppg_baseline_mape_percent"] = ppg.mape_percent;
        entry["ppg_baseline_failures"] = ppg.n_failures;
      }
    } catch (const InputError&) {
      entry = {{"mape_percent", nullptr}, {"n_windows", 0}};
    }
    subsets[to_string(s)] = entry;
  }
  return {{"subsets", subsets},
          {"failure_count", failure_count(records)},
          {"n_records", records.size()},
          {"failure_policy", "windows with a failed synthetic rate are excluded from "
                             "mape_percent; mape_percent_failures_as_100 counts them as 100%"}};
}

void write_report(const std::filesystem::path& dir, const std::vector<EvalRecord>& records,
                  bool with_baseline, const nlohmann::json& extra) {
  std::filesystem::create_directories(dir);
  auto report = summary_json(records, with_baseline);
  for (const auto& [k, v] : extra.items()) report[k] = v;
  std::ofstream(dir / "report.json") << report.dump(2) << '\n';

  std::ofstream csv(dir / "report.csv");
  csv << "subject,activity,origin,hr_real,hr_synth,hr_ppg_baseline,real_failed,synth_failed,"
         "ppg_failed\n";
  for (const auto& r : records) {
    csv << r.subject << ',' << r.activity << ',' << r.origin << ',' << csv_rate(r.hr_real) << ','
        << csv_rate(r.hr_synth) << ',' << (with_baseline ? csv_rate(r.hr_ppg) : "") << ','
        << !r.hr_real << ',' << !r.hr_synth << ',' << (with_baseline ? !r.hr_ppg : 0) << '\n';
  }
}

}  // namespace ppg2ecg::eval
