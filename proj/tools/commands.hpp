#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace ppg2ecg::cli {

inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitFingerprint = 4;

struct Globals {
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::filesystem::path out;
  std::optional<std::filesystem::path> config;
};

/// One line of <out>/manifest.jsonl, filled in by the command as it runs.
struct Manifest {
  std::string command;
  std::string config_fingerprint;
  nlohmann::json inputs = nlohmann::json::object();
  std::vector<std::uint64_t> seeds;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
};

/// Appends with a single write so concurrent sweep workers do not interleave.
void append_manifest(const std::filesystem::path& out, const Manifest& m, int exit_code,
                     const std::vector<std::string>& argv);

/// "7", "0..30" or "1,4,9".
std::vector<std::uint64_t> parse_seeds(const std::string& text);

struct ImportOptions {
  std::vector<std::filesystem::path> archives;
  std::string converter = "dalia-import convert";
};

struct PreprocessOptions {
  std::filesystem::path input;
  double window_s = 4;
  double hop_s = 2;
  double eval_window_s = 10;
  double eval_hop_s = 2;
};

struct TrainOptions {
  std::filesystem::path pairs;
  std::vector<std::string> objectives;
  std::string seeds;  // overrides the global seed when set
  std::optional<int> epochs;
  std::optional<int> lr_constant_epochs;
  std::optional<int> batch_size;
  std::optional<double> lr_g;
  std::optional<double> lr_d;
  std::optional<double> lambda_freq;
  std::optional<std::string> generator_loss;
  bool no_validation = false;
};

struct ModelSource {
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> run;  // uses summary.json's best checkpoint
};

struct SynthesizeOptions {
  ModelSource model;
  std::filesystem::path pairs;
};

struct EvaluateOptions {
  ModelSource model;
  std::filesystem::path pairs;
  bool baseline = false;
  bool self_test = false;  // score the real ECG against itself
};

struct ReportOptions {
  std::vector<std::filesystem::path> inputs;
  int bins = 12;
};

int cmd_import(const Globals& g, const ImportOptions& o, Manifest& m);
int cmd_preprocess(const Globals& g, const PreprocessOptions& o, Manifest& m);
int cmd_train(const Globals& g, const TrainOptions& o, Manifest& m);
int cmd_synthesize(const Globals& g, const SynthesizeOptions& o, Manifest& m);
int cmd_evaluate(const Globals& g, const EvaluateOptions& o, Manifest& m);
int cmd_sweep(const Globals& g, const TrainOptions& o, Manifest& m, const std::filesystem::path& self);
int cmd_report(const Globals& g, const ReportOptions& o, Manifest& m);

}  // namespace ppg2ecg::cli
