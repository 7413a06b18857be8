#include "ppg2ecg/training/sweep.hpp"

#include <fstream>
#include <set>

#include "ppg2ecg/error.hpp"
#include "ppg2ecg/training/trainer.hpp"

namespace ppg2ecg::training {
namespace fs = std::filesystem;
namespace {

eval::Description describe_runs(const std::vector<SweepEntry>& runs) {
  std::vector<double> values;
  for (const auto& r : runs) {
    if (r.validation_mape) values.push_back(*r.validation_mape);
  }
  return eval::describe(values);
}

}  // namespace

SweepResult seed_sweep(const TrainConfig& base, const std::vector<std::uint64_t>& seeds,
                       const dataset::PairSet& train, const dataset::PairSet* validation,
                       const fs::path& out_dir) {
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw InputError("sweep seeds must be distinct");
  }
  SweepResult result;
  for (std::uint64_t seed : seeds) {
    SweepEntry entry;
    entry.seed = seed;
    entry.run_dir = out_dir / ("seed_" + std::to_string(seed));
    try {
      TrainConfig cfg = base;
      cfg.seed = seed;
      Trainer trainer(cfg);
      const auto r = trainer.fit(train, validation, entry.run_dir);
      entry.ok = true;
      entry.validation_mape = r.best_validation_mape;
      entry.validation_failures = r.best_validation_failures;
      if (r.best_epoch) {
        entry.best_checkpoint =
            entry.run_dir / "checkpoints" / ("epoch_" + std::to_string(*r.best_epoch) + ".ckpt");
      }
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    result.runs.push_back(std::move(entry));
  }
  result.mape = describe_runs(result.runs);
  return result;
}

SweepResult collect_sweep(const std::vector<fs::path>& run_dirs) {
  SweepResult result;
  for (const auto& dir : run_dirs) {
    SweepEntry entry;
    entry.run_dir = dir;
    const fs::path file = dir / "summary.json";
    try {
      std::ifstream in(file);
      if (!in) throw InputError("missing " + file.string());
      const auto j = nlohmann::json::parse(in);
      entry.seed = j.at("seed").get<std::uint64_t>();
      entry.ok = true;
      if (!j.at("validation_mape").is_null()) entry.validation_mape = j["validation_mape"].get<double>();
      if (j.contains("validation_failures") && !j["validation_failures"].is_null()) {
        entry.validation_failures = j["validation_failures"].get<std::size_t>();
      }
      if (!j.at("best_checkpoint").is_null()) {
        entry.best_checkpoint = dir / j["best_checkpoint"].get<std::string>();
      }
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    result.runs.push_back(std::move(entry));
  }
  result.mape = describe_runs(result.runs);
  return result;
}

}  // namespace ppg2ecg::training
