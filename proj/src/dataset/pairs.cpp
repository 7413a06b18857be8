#include "ppg2ecg/dataset/pairs.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "ppg2ecg/error.hpp"
#include "ppg2ecg/signal/filter.hpp"
#include "ppg2ecg/signal/resample.hpp"
#include "ppg2ecg/signal/scale.hpp"
#include "ppg2ecg/signal/segment.hpp"

namespace ppg2ecg::dataset {
namespace {

static_assert(std::endian::native == std::endian::little, "pair store IO assumes little-endian");

constexpr char kMagic[8] = {'P', 'P', 'G', '2', 'E', 'C', 'G', 'P'};
constexpr std::uint32_t kVersion = 1;

bool flat(const std::vector<double>& x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *lo == *hi;
}

}  // namespace

std::vector<SegmentPair> build_pairs(const SubjectRecord& record, double window_s, double hop_s,
                                     PreprocessReport* report) {
  auto ppg = signal::resample(record.ppg, kModelRate);
  auto ecg = signal::resample(record.ecg, kModelRate);
  // The record's spans are authoritative over intervals carried by the waveforms.
  if (!record.activities.empty()) {
    ppg.activities = to_intervals(record.activities, kModelRate, ppg.size());
    ecg.activities = to_intervals(record.activities, kModelRate, ecg.size());
  }
  auto ppg_segs = signal::segment(ppg, window_s, hop_s);
  auto ecg_segs = signal::segment(ecg, window_s, hop_s);
  const std::size_t n = std::min(ppg_segs.size(), ecg_segs.size());

  const signal::BandpassFilter ppg_filter(signal::ppg_bandpass_spec(), kModelRate);
  const signal::BandpassFilter ecg_filter(signal::ecg_bandpass_spec(), kModelRate);
  std::vector<SegmentPair> slots(n);
  std::vector<char> keep(n, 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    auto& ps = ppg_segs[static_cast<std::size_t>(i)];
    auto& es = ecg_segs[static_cast<std::size_t>(i)];
    if (flat(es.samples)) continue;
    es.samples = ecg_filter.apply(es.samples);
    if (flat(es.samples)) continue;
    ps.samples = signal::minmax_scale(ppg_filter.apply(ps.samples));
    es.samples = signal::minmax_scale(es.samples);
    es.activity_label = ps.activity_label;
    slots[static_cast<std::size_t>(i)] = {std::move(ps), std::move(es)};
    keep[static_cast<std::size_t>(i)] = 1;
  }
  std::vector<SegmentPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(std::move(slots[i]));
  }
  if (report) {
    report->subject = record.subject;
    report->windows = n;
    report->excluded_flat_ecg = n - out.size();
  }
  return out;
}

std::span<const float> PairSet::ppg_item(std::size_t i) const {
  return std::span<const float>(ppg).subspan(i * static_cast<std::size_t>(length),
                                             static_cast<std::size_t>(length));
}

std::span<const float> PairSet::ecg_item(std::size_t i) const {
  return std::span<const float>(ecg).subspan(i * static_cast<std::size_t>(length),
                                             static_cast<std::size_t>(length));
}

void PairSet::append(const SegmentPair& pair) {
  if (pair.ppg.size() != static_cast<std::size_t>(length) ||
      pair.ecg.size() != static_cast<std::size_t>(length)) {
    throw InputError("pair length differs from store length " + std::to_string(length));
  }
  ppg.insert(ppg.end(), pair.ppg.samples.begin(), pair.ppg.samples.end());
  ecg.insert(ecg.end(), pair.ecg.samples.begin(), pair.ecg.samples.end());
  info.push_back({pair.ppg.subject, pair.ppg.activity_label, pair.ppg.origin_index});
}

void PairSet::append(const PairSet& other) {
  if (other.length != length) throw InputError("cannot merge pair stores of different lengths");
  ppg.insert(ppg.end(), other.ppg.begin(), other.ppg.end());
  ecg.insert(ecg.end(), other.ecg.begin(), other.ecg.end());
  info.insert(info.end(), other.info.begin(), other.info.end());
}

PairSet to_pair_set(const std::vector<SegmentPair>& pairs, int length) {
  PairSet set;
  set.length = length;
  for (const auto& p : pairs) set.append(p);
  return set;
}

void save_pairs(const std::filesystem::path& path, const PairSet& set) {
  nlohmann::json info = nlohmann::json::array();
  for (const auto& p : set.info) info.push_back({p.subject, p.activity, p.origin});
  const nlohmann::json header = {
      {"length", set.length}, {"rate", set.rate}, {"count", set.size()}, {"info", info}};
  const std::string text = header.dump();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  const std::uint64_t len = text.size();
  out.write(kMagic, sizeof kMagic);
  out.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(len));
  out.write(reinterpret_cast<const char*>(set.ppg.data()),
            static_cast<std::streamsize>(set.ppg.size() * sizeof(float)));
  out.write(reinterpret_cast<const char*>(set.ecg.data()),
            static_cast<std::streamsize>(set.ecg.size() * sizeof(float)));
  if (!out) throw InputError("failed writing " + path.string());
}

PairSet load_pairs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open pair store " + path.string());
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0 || version != kVersion) {
    throw InputError("not a pair store: " + path.string());
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  PairSet set;
  try {
    const auto header = nlohmann::json::parse(text);
    set.length = header.at("length").get<int>();
    set.rate = header.at("rate").get<double>();
    for (const auto& p : header.at("info")) {
      set.info.push_back({p.at(0).get<std::string>(), p.at(1).get<std::string>(),
                          p.at(2).get<std::size_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed pair store header in " + path.string() + ": " + e.what());
  }
  const std::size_t n = set.size() * static_cast<std::size_t>(set.length);
  set.ppg.resize(n);
  set.ecg.resize(n);
  in.read(reinterpret_cast<char*>(set.ppg.data()), static_cast<std::streamsize>(n * sizeof(float)));
  in.read(reinterpret_cast<char*>(set.ecg.data()), static_cast<std::streamsize>(n * sizeof(float)));
  if (!in) throw InputError("truncated pair store " + path.string());
  return set;
}

}  // namespace ppg2ecg::dataset
