#include "figures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ppg2ecg/error.hpp"

namespace ppg2ecg::cli {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v, int precision = 3) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

}  // namespace

std::vector<HistogramBin> histogram(const std::vector<Series>& series, int bins) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : series) {
    for (double v : s.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) return {};
  if (hi == lo) bins = 1;
  const double width = bins == 1 ? 0.0 : (hi - lo) / bins;
  std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    out[b].lo = lo + b * width;
    out[b].hi = b == bins - 1 ? hi : lo + (b + 1) * width;
    out[b].counts.assign(series.size(), 0);
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    for (double v : series[s].values) {
      int b = width > 0 ? static_cast<int>((v - lo) / width) : 0;
      out[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))].counts[s]++;
    }
  }
  return out;
}

void write_histogram(const std::filesystem::path& svg, const std::vector<Series>& series,
                     const std::string& title, const std::string& x_label,
                     const std::string& annotation, int bins) {
  const auto h = histogram(series, bins);
  if (h.empty()) throw InputError("nothing to plot for " + svg.string());

  std::ofstream csv(std::filesystem::path(svg).replace_extension(".csv"));
  csv << "bin_lo,bin_hi";
  for (const auto& s : series) csv << ',' << s.label;
  csv << '\n';
  for (const auto& b : h) {
    csv << b.lo << ',' << b.hi;
    for (auto c : b.counts) csv << ',' << c;
    csv << '\n';
  }

  const double W = 640, H = 400, left = 60, right = 20, top = 50, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  std::size_t peak = 1;
  for (const auto& b : h) {
    for (auto c : b.counts) peak = std::max(peak, c);
  }
  const double x0 = h.front().lo, x1 = h.back().hi;
  // A single-value histogram still gets a visible bar of unit width.
  const double span = x1 > x0 ? x1 - x0 : 1.0;
  const double base = x1 > x0 ? x0 : x0 - 0.5;
  auto sx = [&](double v) { return left + (v - base) / span * pw; };
  auto sy = [&](double c) { return top + ph - c / static_cast<double>(peak) * ph; };

  std::ofstream out(svg);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
      << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* colour = kPalette[s % std::size(kPalette)];
    for (const auto& b : h) {
      if (b.counts[s] == 0) continue;
      const double xa = x1 > x0 ? sx(b.lo) : sx(base), xb = x1 > x0 ? sx(b.hi) : sx(base + 1.0);
      out << "<rect x=\"" << xa << "\" y=\"" << sy(static_cast<double>(b.counts[s])) << "\" width=\""
          << std::max(1.0, xb - xa) << "\" height=\"" << top + ph - sy(static_cast<double>(b.counts[s]))
          << "\" fill=\"" << colour << "\" fill-opacity=\"0.45\" stroke=\"" << colour << "\"/>\n";
    }
    out << "<rect x=\"" << W - right - 150 << "\" y=\"" << top + 4 + 18 * s
        << "\" width=\"12\" height=\"12\" fill=\"" << colour << "\" fill-opacity=\"0.6\"/>\n";
    out << "<text x=\"" << W - right - 132 << "\" y=\"" << top + 14 + 18 * s << "\">"
        << escape(series[s].label) << " (n=" << series[s].values.size() << ")</text>\n";
  }
  out << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = base + span * i / 4;
    out << "<text x=\"" << sx(v) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">" << num(v)
        << "</text>\n";
  }
  for (std::size_t c = 0; c <= peak; c += std::max<std::size_t>(1, peak / 5)) {
    out << "<text x=\"" << left - 6 << "\" y=\"" << sy(static_cast<double>(c)) + 4
        << "\" text-anchor=\"end\">" << c << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">"
      << escape(x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << top + ph / 2 << ")\">count</text>\n";
  if (!annotation.empty()) {
    out << "<text x=\"" << left + 8 << "\" y=\"" << top + 14 << "\">" << escape(annotation) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace ppg2ecg::cli
