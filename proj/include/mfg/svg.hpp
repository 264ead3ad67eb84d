// Copyright 2026 The mfglab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// Minimal SVG line plots: pure text emission, no rendering dependency.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace mfg::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 640;
  int height = 400;
};

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline void line_plot(std::ostream& os, const std::vector<Series>& series,
                      const PlotOptions& options) {
  constexpr double kLeft = 60, kRight = 130, kTop = 30, kBottom = 45;
  static const char* kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  auto ty = [&](double y) { return options.log_y ? std::log10(y) : y; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      const double y = ty(s.y[i]);
      if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
  if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  const double w = options.width - kLeft - kRight, h = options.height - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * w; };
  auto py = [&](double y) { return kTop + (1.0 - (ty(y) - y0) / (y1 - y0)) * h; };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\""
     << options.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << options.width / 2 << "\" y=\"18\" text-anchor=\"middle\">"
     << escape(options.title) << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << w << "\" height=\"" << h
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    std::ostringstream lx, ly;
    lx.precision(3);
    ly.precision(3);
    lx << fx;
    ly << (options.log_y ? std::pow(10.0, fy) : fy);
    os << "<text x=\"" << kLeft + w * i / 4.0 << "\" y=\"" << kTop + h + 15
       << "\" text-anchor=\"middle\">" << lx.str() << "</text>\n";
    os << "<text x=\"" << kLeft - 5 << "\" y=\"" << kTop + h * (1.0 - i / 4.0) + 4
       << "\" text-anchor=\"end\">" << ly.str() << "</text>\n";
  }
  os << "<text x=\"" << kLeft + w / 2 << "\" y=\"" << options.height - 8
     << "\" text-anchor=\"middle\">" << escape(options.x_label) << "</text>\n";
  os << "<text x=\"14\" y=\"" << kTop + h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
     << kTop + h / 2 << ")\">" << escape(options.y_label) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* colour = kColours[s % 8];
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i) {
      if (!std::isfinite(ty(series[s].y[i]))) continue;
      os << px(series[s].x[i]) << ',' << py(series[s].y[i]) << ' ';
    }
    os << "\"/>\n";
    if (s < 12) {
      const double ly = kTop + 12 + 16.0 * static_cast<double>(s);
      os << "<line x1=\"" << kLeft + w + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + w + 28
         << "\" y2=\"" << ly - 4 << "\" stroke=\"" << colour << "\"/>\n";
      os << "<text x=\"" << kLeft + w + 32 << "\" y=\"" << ly << "\">" << escape(series[s].name)
         << "</text>\n";
    }
  }
  os << "</svg>\n";
}

}  // namespace mfg::svg
