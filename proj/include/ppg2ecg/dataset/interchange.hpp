#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ppg2ecg/signal/waveform.hpp"

namespace ppg2ecg::dataset {

inline constexpr std::array<std::string_view, 9> kActivityLabels = {
    "sitting", "stairs", "table_soccer", "cycling", "driving",
    "lunch",   "walking", "working",     "transient"};

bool is_known_activity(std::string_view label);

/// Activity annotation in seconds from the start of the recording.
struct ActivitySpan {
  double start_s = 0;
  double end_s = 0;
  std::string label;
};

struct SubjectRecord {
  std::string subject;
  signal::Waveform ppg;
  signal::Waveform ecg;
  std::vector<ActivitySpan> activities;
  nlohmann::json provenance;  // passed through from meta.json when present
};

struct LoadOptions {
  std::optional<double> ppg_rate;  // expected rates; unchecked when unset
  std::optional<double> ecg_rate;
};

/// Reads one interchange v1 directory (meta.json, ppg.f32le, ecg.f32le).
/// Throws InputError with distinct messages for "missing metadata",
/// "malformed metadata: ...", "truncated channel: expected N samples" and
/// "rate mismatch: ...".
SubjectRecord load_subject(const std::filesystem::path& dir, const LoadOptions& options = {});

/// Subject directories (those holding meta.json) directly under `root`,
/// sorted by name.
std::vector<std::filesystem::path> find_subjects(const std::filesystem::path& root);

/// Writes a record in interchange v1 form. Samples are narrowed to float32.
void write_subject(const std::filesystem::path& dir, const SubjectRecord& record);

/// Maps second-based spans onto half-open sample intervals at `rate`.
std::vector<signal::ActivityInterval> to_intervals(const std::vector<ActivitySpan>& spans,
                                                   double rate, std::size_t count);

}  // namespace ppg2ecg::dataset
