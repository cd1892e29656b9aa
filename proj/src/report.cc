// Copyright 2026 The qdiana Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ==============================================================================

#include "qdiana/report.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "qdiana/error.h"

namespace qdiana {

namespace {

std::string Real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ParseReal(const std::string& token, std::size_t line) {
  if (token == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (token == "inf") return std::numeric_limits<double>::infinity();
  if (token == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(line, "bad number '" + token + "'");
  }
  return v;
}

std::uint64_t ParseCount(const std::string& token, std::size_t line) {
  std::uint64_t v = 0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end || token.empty()) {
    throw ParseError(line, "bad integer '" + token + "'");
  }
  return v;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                         "#9467bd", "#8c564b", "#e377c2", "#17becf"};

struct Panel {
  const char* title;
  bool x_bits;      // x-axis: cumulative uplink bits instead of k
  bool y_distance;  // y-axis: dist_sq instead of f_gap
};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::string Escape(const std::string& s) {
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

}  // namespace

void WriteCsv(const std::vector<TraceRecord>& records, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const TraceRecord& r : records) {
    out << r.k << ',' << Real(r.f_gap) << ',' << Real(r.dist_sq) << ','
        << Real(r.lyapunov) << ',' << Real(r.H) << ',' << Real(r.D) << ','
        << Real(r.grad_norm_sq) << ',' << r.bits_up_cum << ',' << r.bits_down_cum
        << ',' << Real(r.wall_ms) << '\n';
  }
}

std::string ToCsv(const std::vector<TraceRecord>& records) {
  std::ostringstream out;
  WriteCsv(records, out);
  return out.str();
}

std::vector<TraceRecord> ReadCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ParseError(1, "expected header '" + std::string(kCsvHeader) + "'");
  }
  std::vector<TraceRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10) {
      throw ParseError(line_no, "expected 10 columns, got " + std::to_string(cells.size()));
    }
    TraceRecord r;
    r.k = ParseCount(cells[0], line_no);
    r.f_gap = ParseReal(cells[1], line_no);
    r.dist_sq = ParseReal(cells[2], line_no);
    r.lyapunov = ParseReal(cells[3], line_no);
    r.H = ParseReal(cells[4], line_no);
    r.D = ParseReal(cells[5], line_no);
    r.grad_norm_sq = ParseReal(cells[6], line_no);
    r.bits_up_cum = ParseCount(cells[7], line_no);
    r.bits_down_cum = ParseCount(cells[8], line_no);
    r.wall_ms = ParseReal(cells[9], line_no);
    records.push_back(r);
  }
  return records;
}

std::string RenderSvg(const std::vector<PlotSeries>& series) {
  constexpr double kPanelW = 420, kPanelH = 300, kMargin = 60, kGap = 30;
  const Panel panels[4] = {{"f(x) - f* vs iterations", false, false},
                           {"||x - x*||^2 vs iterations", false, true},
                           {"f(x) - f* vs uplink bits", true, false},
                           {"||x - x*||^2 vs uplink bits", true, true}};
  const double width = 2 * (kPanelW + kMargin) + kGap;
  const double height = 2 * (kPanelH + kMargin) + kGap + 20.0 * series.size() + 20;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Num(width)
      << "\" height=\"" << Num(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (int p = 0; p < 4; ++p) {
    const Panel& panel = panels[p];
    const double ox = kMargin + (p % 2) * (kPanelW + kMargin + kGap);
    const double oy = 20 + (p / 2) * (kPanelH + kMargin + kGap);

    auto x_of = [&](const TraceRecord& r) {
      return panel.x_bits ? static_cast<double>(r.bits_up_cum) : static_cast<double>(r.k);
    };
    auto y_of = [&](const TraceRecord& r) { return panel.y_distance ? r.dist_sq : r.f_gap; };

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const PlotSeries& s : series) {
      for (const TraceRecord& r : s.records) {
        const double y = y_of(r);
        if (!(y > 0) || !std::isfinite(y)) continue;
        xmin = std::min(xmin, x_of(r));
        xmax = std::max(xmax, x_of(r));
        ymin = std::min(ymin, std::log10(y));
        ymax = std::max(ymax, std::log10(y));
      }
    }
    if (!std::isfinite(xmin)) {
      xmin = 0;
      xmax = 1;
      ymin = 0;
      ymax = 1;
    }
    if (xmax <= xmin) xmax = xmin + 1;
    ymin = std::floor(ymin);
    ymax = std::ceil(ymax);
    if (ymax <= ymin) ymax = ymin + 1;

    auto sx = [&](double x) { return ox + (x - xmin) / (xmax - xmin) * kPanelW; };
    auto sy = [&](double ly) { return oy + kPanelH - (ly - ymin) / (ymax - ymin) * kPanelH; };

    svg << "<g>\n<rect x=\"" << Num(ox) << "\" y=\"" << Num(oy) << "\" width=\"" << Num(kPanelW)
        << "\" height=\"" << Num(kPanelH) << "\" fill=\"none\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << Num(ox + kPanelW / 2) << "\" y=\"" << Num(oy - 6)
        << "\" text-anchor=\"middle\">" << Escape(panel.title) << "</text>\n";
    const int decades = static_cast<int>(ymax - ymin);
    const int step = std::max(1, decades / 8);
    for (int e = static_cast<int>(ymin); e <= static_cast<int>(ymax); e += step) {
      const double y = sy(e);
      svg << "<line x1=\"" << Num(ox) << "\" y1=\"" << Num(y) << "\" x2=\"" << Num(ox + kPanelW)
          << "\" y2=\"" << Num(y) << "\" stroke=\"#dddddd\"/>\n";
      svg << "<text x=\"" << Num(ox - 4) << "\" y=\"" << Num(y + 4)
          << "\" text-anchor=\"end\">1e" << e << "</text>\n";
    }
    for (int t = 0; t <= 4; ++t) {
      const double xv = xmin + (xmax - xmin) * t / 4.0;
      char label[32];
      std::snprintf(label, sizeof(label), "%.3g", xv);
      svg << "<text x=\"" << Num(sx(xv)) << "\" y=\"" << Num(oy + kPanelH + 14)
          << "\" text-anchor=\"middle\">" << label << "</text>\n";
    }
    svg << "<text x=\"" << Num(ox + kPanelW / 2) << "\" y=\"" << Num(oy + kPanelH + 30)
        << "\" text-anchor=\"middle\">" << (panel.x_bits ? "uplink bits" : "iteration")
        << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
      svg << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\""
          << kColors[si % std::size(kColors)] << "\" points=\"";
      for (const TraceRecord& r : series[si].records) {
        const double y = y_of(r);
        if (!(y > 0) || !std::isfinite(y)) continue;
        svg << Num(sx(x_of(r))) << ',' << Num(sy(std::log10(y))) << ' ';
      }
      svg << "\"/>\n";
    }
    svg << "</g>\n";
  }

  double ly = 2 * (kPanelH + kMargin) + kGap + 20;
  for (std::size_t si = 0; si < series.size(); ++si) {
    svg << "<line x1=\"" << Num(kMargin) << "\" y1=\"" << Num(ly - 4) << "\" x2=\""
        << Num(kMargin + 24) << "\" y2=\"" << Num(ly - 4) << "\" stroke=\""
        << kColors[si % std::size(kColors)] << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << Num(kMargin + 30) << "\" y=\"" << Num(ly) << "\">"
        << Escape(series[si].label) << "</text>\n";
    ly += 20;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace qdiana
