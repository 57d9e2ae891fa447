// Copyright 2026 The desync-sim Authors
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

#include "desync/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "desync/analysis.hpp"
#include "desync/errors.hpp"

namespace desync {

namespace {

constexpr double kMarginLeft = 48.0;
constexpr double kMarginTop = 24.0;
constexpr double kMarginBottom = 28.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

const char* fill_for(IntervalKind kind) {
  switch (kind) {
    case IntervalKind::kCompute:
      return "#cfe6f7";
    case IntervalKind::kWait:
      return "#d62728";
    case IntervalKind::kIdleInjected:
      return "#0b2a6f";
  }
  return "#000000";
}

std::string escape(const std::string& s) {
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

}  // namespace

std::string render_timeline(const Trace& trace, const TimelineOptions& options) {
  const int p = trace.process_count();
  const double span = std::max(trace.makespan(), 1e-300);
  const double lanes = options.lane_height * p;
  const double total_w = kMarginLeft + options.width + 16.0;
  const double total_h = kMarginTop + lanes + kMarginBottom;
  auto x = [&](double t) { return kMarginLeft + options.width * t / span; };
  auto y = [&](int rank) { return kMarginTop + options.lane_height * rank; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(total_w) << "\" height=\""
      << num(total_h) << "\" viewBox=\"0 0 " << num(total_w) << ' ' << num(total_h) << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << num(total_w) << "\" height=\"" << num(total_h)
      << "\" fill=\"#ffffff\"/>\n";
  if (!options.title.empty()) {
    svg << "<text x=\"" << num(kMarginLeft) << "\" y=\"16\" font-family=\"sans-serif\" "
        << "font-size=\"12\">" << escape(options.title) << "</text>\n";
  }
  svg << "<g shape-rendering=\"crispEdges\">\n";
  for (int r = 0; r < p; ++r) {
    for (const auto& iv : trace.ranks[static_cast<std::size_t>(r)]) {
      const double w = x(iv.end) - x(iv.start);
      if (w <= 0.0) continue;
      svg << "<rect class=\"" << to_string(iv.kind) << "\" x=\"" << num(x(iv.start)) << "\" y=\""
          << num(y(r)) << "\" width=\"" << num(w) << "\" height=\"" << num(options.lane_height)
          << "\" fill=\"" << fill_for(iv.kind) << "\"/>\n";
    }
  }
  svg << "</g>\n";

  for (int r = 1; r < p; ++r) {
    const auto ru = static_cast<std::size_t>(r);
    if (trace.rank_domain[ru] == trace.rank_domain[ru - 1]) continue;
    svg << "<line class=\"domain\" x1=\"" << num(kMarginLeft) << "\" y1=\"" << num(y(r))
        << "\" x2=\"" << num(kMarginLeft + options.width) << "\" y2=\"" << num(y(r))
        << "\" stroke=\"#000000\" stroke-width=\"1\" stroke-dasharray=\"2,3\"/>\n";
  }

  if (options.wavefront_step) {
    const WavefrontProfile wf = wavefront(trace, *options.wavefront_step);
    svg << "<polyline class=\"wavefront\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1.5\" "
           "points=\"";
    for (int r = 0; r < p; ++r) {
      if (r > 0) svg << ' ';
      svg << num(x(wf.times[static_cast<std::size_t>(r)])) << ','
          << num(y(r) + 0.5 * options.lane_height);
    }
    svg << "\"/>\n";
  }

  const double axis_y = kMarginTop + lanes + 14.0;
  svg << "<g font-family=\"sans-serif\" font-size=\"10\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double t = span * i / 4.0;
    char label[32];
    std::snprintf(label, sizeof label, "%.4g s", t);
    svg << "<text x=\"" << num(x(t)) << "\" y=\"" << num(axis_y)
        << "\" text-anchor=\"middle\">" << label << "</text>\n";
  }
  svg << "<text x=\"4\" y=\"" << num(kMarginTop + 8.0) << "\">rank 0</text>\n";
  svg << "</g>\n</svg>\n";
  return svg.str();
}

void write_timeline(const Trace& trace, const std::filesystem::path& path,
                    const TimelineOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TraceError("cannot write SVG file " + path.string());
  out << render_timeline(trace, options);
}

}  // namespace desync
