#include "ppg2ecg/dataset/interchange.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

#include "ppg2ecg/error.hpp"

namespace ppg2ecg::dataset {
namespace fs = std::filesystem;
namespace {

static_assert(std::endian::native == std::endian::little, "interchange IO assumes little-endian");

struct ChannelMeta {
  double rate = 0;
  std::size_t count = 0;
};

ChannelMeta channel_meta(const nlohmann::json& meta, const char* name) {
  const auto& ch = meta.at("channels").at(name);
  ChannelMeta out;
  out.rate = ch.at("rate_hz").get<double>();
  const auto count = ch.at("count").get<std::int64_t>();
  if (!(out.rate > 0) || count < 0) {
    throw InputError(std::string("malformed metadata: invalid rate or count for ") + name);
  }
  out.count = static_cast<std::size_t>(count);
  return out;
}

std::vector<double> read_channel(const fs::path& file, std::size_t count) {
  std::error_code ec;
  const auto bytes = fs::file_size(file, ec);
  if (ec) throw InputError("missing channel file " + file.string());
  const std::size_t expected = count * sizeof(float);
  if (bytes < expected) {
    throw InputError("truncated channel: expected " + std::to_string(count) + " samples in " +
                     file.filename().string() + ", found " + std::to_string(bytes) + " bytes");
  }
  if (bytes > expected) {
    throw InputError("oversized channel: expected " + std::to_string(count) + " samples in " +
                     file.filename().string() + ", found " + std::to_string(bytes) + " bytes");
  }
  std::vector<float> raw(count);
  std::ifstream in(file, std::ios::binary);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(expected));
  if (!in) throw InputError("cannot read channel file " + file.string());
  return {raw.begin(), raw.end()};
}

void write_channel(const fs::path& file, const std::vector<double>& samples) {
  std::vector<float> raw(samples.begin(), samples.end());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(float)));
  if (!out) throw InputError("cannot write " + file.string());
}

void check_rate(const char* name, double actual, const std::optional<double>& expected) {
  if (expected && std::abs(actual - *expected) > 1e-9 * *expected) {
    throw InputError(std::string("rate mismatch: ") + name + " is " + std::to_string(actual) +
                     " Hz, expected " + std::to_string(*expected) + " Hz");
  }
}

}  // namespace

bool is_known_activity(std::string_view label) {
  return std::find(kActivityLabels.begin(), kActivityLabels.end(), label) != kActivityLabels.end();
}

std::vector<signal::ActivityInterval> to_intervals(const std::vector<ActivitySpan>& spans,
                                                   double rate, std::size_t count) {
  std::vector<signal::ActivityInterval> out;
  for (const auto& s : spans) {
    const auto clampi = [&](double t) {
      const double v = std::round(t * rate);
      return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(count)));
    };
    const std::size_t a = clampi(s.start_s), b = clampi(s.end_s);
    if (b > a) out.push_back({a, b, s.label});
  }
  return out;
}

SubjectRecord load_subject(const fs::path& dir, const LoadOptions& options) {
  const fs::path meta_path = dir / "meta.json";
  if (!fs::is_regular_file(meta_path)) throw InputError("missing metadata: " + meta_path.string());

  SubjectRecord rec;
  ChannelMeta pm, em;
  try {
    std::ifstream in(meta_path);
    const auto meta = nlohmann::json::parse(in);
    rec.subject = meta.at("subject").get<std::string>();
    pm = channel_meta(meta, "ppg");
    em = channel_meta(meta, "ecg");
    for (const auto& a : meta.value("activities", nlohmann::json::array())) {
      ActivitySpan s{a.at("start_s").get<double>(), a.at("end_s").get<double>(),
                     a.at("label").get<std::string>()};
      if (!is_known_activity(s.label)) {
        throw InputError("malformed metadata: unknown activity label '" + s.label + "'");
      }
      if (!(s.end_s >= s.start_s)) throw InputError("malformed metadata: activity ends before it starts");
      rec.activities.push_back(std::move(s));
    }
    rec.provenance = meta.value("provenance", nlohmann::json());
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed metadata: " + meta_path.string() + ": " + e.what());
  }
  std::sort(rec.activities.begin(), rec.activities.end(),
            [](const ActivitySpan& a, const ActivitySpan& b) { return a.start_s < b.start_s; });
  for (std::size_t i = 1; i < rec.activities.size(); ++i) {
    if (rec.activities[i].start_s < rec.activities[i - 1].end_s) {
      throw InputError("malformed metadata: overlapping activities in " + meta_path.string());
    }
  }

  check_rate("ppg", pm.rate, options.ppg_rate);
  check_rate("ecg", em.rate, options.ecg_rate);
  const double span_p = static_cast<double>(pm.count) / pm.rate;
  const double span_e = static_cast<double>(em.count) / em.rate;
  if (std::abs(span_p - span_e) > 1.0 / pm.rate + 1e-9) {
    throw InputError("rate mismatch: ppg spans " + std::to_string(span_p) + " s but ecg spans " +
                     std::to_string(span_e) + " s");
  }

  rec.ppg = {read_channel(dir / "ppg.f32le", pm.count), pm.rate, signal::Channel::PPG, rec.subject,
             to_intervals(rec.activities, pm.rate, pm.count)};
  rec.ecg = {read_channel(dir / "ecg.f32le", em.count), em.rate, signal::Channel::ECG, rec.subject,
             to_intervals(rec.activities, em.rate, em.count)};
  return rec;
}

std::vector<fs::path> find_subjects(const fs::path& root) {
  if (!fs::is_directory(root)) throw InputError("not a directory: " + root.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "meta.json")) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_subject(const fs::path& dir, const SubjectRecord& record) {
  fs::create_directories(dir);
  nlohmann::json acts = nlohmann::json::array();
  for (const auto& a : record.activities) {
    acts.push_back({{"start_s", a.start_s}, {"end_s", a.end_s}, {"label", a.label}});
  }
  nlohmann::json meta = {
      {"subject", record.subject},
      {"channels",
       {{"ppg", {{"rate_hz", record.ppg.rate}, {"count", record.ppg.size()}}},
        {"ecg", {{"rate_hz", record.ecg.rate}, {"count", record.ecg.size()}}}}},
      {"activities", acts}};
  if (!record.provenance.is_null()) meta["provenance"] = record.provenance;
  std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';
  write_channel(dir / "ppg.f32le", record.ppg.samples);
  write_channel(dir / "ecg.f32le", record.ecg.samples);
}

}  // namespace ppg2ecg::dataset
