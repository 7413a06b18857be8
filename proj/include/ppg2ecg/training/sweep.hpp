#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ppg2ecg/dataset/pairs.hpp"
#include "ppg2ecg/eval/metrics.hpp"
#include "ppg2ecg/training/config.hpp"

namespace ppg2ecg::training {

struct SweepEntry {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::filesystem::path run_dir;
  std::optional<std::filesystem::path> best_checkpoint;
  std::optional<double> validation_mape;
  std::optional<std::size_t> validation_failures;
};

struct SweepResult {
  std::vector<SweepEntry> runs;
  eval::Description mape;  // over the runs that produced a validation MAPE
};

/// Independent runs in `out_dir`/seed_<s>, one per seed. A failing run is
/// recorded and the sweep continues. Seeds must be distinct.
SweepResult seed_sweep(const TrainConfig& base, const std::vector<std::uint64_t>& seeds,
                       const dataset::PairSet& train, const dataset::PairSet* validation,
                       const std::filesystem::path& out_dir);

/// Summarises run directories that hold summary.json (used when runs were
/// executed as separate processes).
SweepResult collect_sweep(const std::vector<std::filesystem::path>& run_dirs);

}  // namespace ppg2ecg::training
