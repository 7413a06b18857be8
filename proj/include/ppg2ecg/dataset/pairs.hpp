#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ppg2ecg/dataset/interchange.hpp"
#include "ppg2ecg/signal/waveform.hpp"

namespace ppg2ecg::dataset {

inline constexpr double kModelRate = 128.0;

struct SegmentPair {
  signal::Segment ppg;
  signal::Segment ecg;
};

struct PreprocessReport {
  std::string subject;
  std::size_t windows = 0;             // windows cut from the recording
  std::size_t excluded_flat_ecg = 0;   // dropped for zero ECG range
};

/// resample to 128 Hz -> segment -> bandpass -> min-max scale, per channel
/// with the channel's band-pass. Windows where the ECG has zero range before
/// scaling are dropped and counted in `report`.
std::vector<SegmentPair> build_pairs(const SubjectRecord& record, double window_s, double hop_s,
                                     PreprocessReport* report = nullptr);

struct PairInfo {
  std::string subject;
  std::string activity;
  std::size_t origin = 0;  // window start at 128 Hz
};

/// Flat float32 storage of equally long pairs, item i at [i * length, (i + 1) * length).
struct PairSet {
  int length = 0;
  double rate = kModelRate;
  std::vector<float> ppg;
  std::vector<float> ecg;
  std::vector<PairInfo> info;

  std::size_t size() const { return info.size(); }
  std::span<const float> ppg_item(std::size_t i) const;
  std::span<const float> ecg_item(std::size_t i) const;
  /// Throws InputError if the pair length differs from `length`.
  void append(const SegmentPair& pair);
  void append(const PairSet& other);
};

PairSet to_pair_set(const std::vector<SegmentPair>& pairs, int length);

/// Binary store: magic "PPG2ECGP", u32 version, u64 header length, JSON
/// header (length, rate, count, per-pair info), PPG then ECG float32 data.
void save_pairs(const std::filesystem::path& path, const PairSet& set);
PairSet load_pairs(const std::filesystem::path& path);

}  // namespace ppg2ecg::dataset
