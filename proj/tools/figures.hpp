#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ppg2ecg::cli {

struct Series {
  std::string label;
  std::vector<double> values;
};

struct HistogramBin {
  double lo = 0;
  double hi = 0;
  std::vector<std::size_t> counts;  // one per series
};

/// Shared bins over all series. Identical values collapse to a single bin.
std::vector<HistogramBin> histogram(const std::vector<Series>& series, int bins);

/// Overlaid histogram as SVG plus a CSV sidecar (same stem, .csv).
void write_histogram(const std::filesystem::path& svg, const std::vector<Series>& series,
                     const std::string& title, const std::string& x_label,
                     const std::string& annotation, int bins = 12);

}  // namespace ppg2ecg::cli
