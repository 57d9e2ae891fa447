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

#include "desync/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "desync/errors.hpp"

namespace desync {

namespace {

using nlohmann::ordered_json;

std::string fmt9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

struct Record {
  int rank;
  int domain;
  const Interval* iv;
};

std::vector<Record> sorted_records(const Trace& trace) {
  std::vector<Record> records;
  for (int r = 0; r < trace.process_count(); ++r) {
    const int domain = trace.rank_domain.empty() ? 0 : trace.rank_domain[static_cast<std::size_t>(r)];
    for (const auto& iv : trace.ranks[static_cast<std::size_t>(r)]) records.push_back({r, domain, &iv});
  }
  std::stable_sort(records.begin(), records.end(), [](const Record& a, const Record& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.iv->start < b.iv->start;
  });
  return records;
}

std::string echo_json(const Trace& trace) {
  if (trace.config_echo.empty()) return "null";
  try {
    return ordered_json::parse(trace.config_echo).dump();
  } catch (const ordered_json::parse_error& e) {
    throw TraceError(std::string("config echo is not valid JSON: ") + e.what());
  }
}

std::string echo_from(const ordered_json& j) { return j.is_null() ? std::string() : j.dump(); }

void add_record(Trace& trace, int rank, int domain, Interval iv, std::size_t line) {
  if (rank < 0) throw TraceError("line " + std::to_string(line) + ": negative rank");
  const auto r = static_cast<std::size_t>(rank);
  if (trace.ranks.size() <= r) {
    trace.ranks.resize(r + 1);
    trace.rank_domain.resize(r + 1, -1);
  }
  int& known = trace.rank_domain[r];
  if (known >= 0 && known != domain) {
    throw TraceError("line " + std::to_string(line) + ": rank " + std::to_string(rank) +
                     " appears in two domains");
  }
  known = domain;
  trace.ranks[r].push_back(iv);
}

void finish_import(Trace& trace) {
  for (std::size_t r = 0; r < trace.ranks.size(); ++r) {
    if (trace.rank_domain[r] < 0) {
      throw TraceError("rank " + std::to_string(r) + " has no intervals");
    }
  }
}

double parse_number(const std::string& field, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw TraceError("line " + std::to_string(line) + ": bad number '" + field + "'");
  }
}

int parse_int(const std::string& field, std::size_t line) {
  const double v = parse_number(field, line);
  if (v != std::floor(v)) {
    throw TraceError("line " + std::to_string(line) + ": expected integer, got '" + field + "'");
  }
  return static_cast<int>(v);
}

Trace import_jsonl(std::istream& in, const std::string& first) {
  Trace trace;
  std::size_t line_no = 1;
  try {
    const auto header = ordered_json::parse(first);
    if (!header.contains("desync_trace")) throw TraceError("line 1: missing trace header");
    trace.config_echo = echo_from(header.value("config", ordered_json()));
  } catch (const ordered_json::exception& e) {
    throw TraceError(std::string("line 1: ") + e.what());
  }
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = ordered_json::parse(line);
      Interval iv;
      iv.kind = interval_kind_from_string(j.at("kind").get<std::string>());
      iv.step = j.at("step").get<int>();
      iv.start = j.at("start_s").get<double>();
      iv.end = j.at("end_s").get<double>();
      add_record(trace, j.at("rank").get<int>(), j.at("domain").get<int>(), iv, line_no);
    } catch (const ordered_json::exception& e) {
      throw TraceError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  finish_import(trace);
  return trace;
}

Trace import_csv(std::istream& in, const std::string& first) {
  Trace trace;
  const std::string prefix = "# config: ";
  std::size_t line_no = 1;
  std::string header = first;
  if (first.rfind(prefix, 0) == 0) {
    try {
      trace.config_echo = echo_from(ordered_json::parse(first.substr(prefix.size())));
    } catch (const ordered_json::exception& e) {
      throw TraceError(std::string("line 1: ") + e.what());
    }
    if (!std::getline(in, header)) throw TraceError("missing CSV column header");
    ++line_no;
  }
  if (header != "rank,domain,kind,step,start_s,end_s") {
    throw TraceError("line " + std::to_string(line_no) + ": unexpected CSV header");
  }
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 6) {
      throw TraceError("line " + std::to_string(line_no) + ": expected 6 fields");
    }
    Interval iv;
    iv.kind = interval_kind_from_string(fields[2]);
    iv.step = parse_int(fields[3], line_no);
    iv.start = parse_number(fields[4], line_no);
    iv.end = parse_number(fields[5], line_no);
    add_record(trace, parse_int(fields[0], line_no), parse_int(fields[1], line_no), iv, line_no);
  }
  finish_import(trace);
  return trace;
}

ordered_json fit_json(const SlopeFit& f) {
  return {{"first_rank", f.first_rank}, {"last_rank", f.last_rank}, {"points", f.points},
          {"slope_ranks_per_s", std::isfinite(f.slope) ? ordered_json(f.slope) : ordered_json()},
          {"r", f.r}};
}

ordered_json breakdown_json(const IterationBreakdown& b) {
  return {{"compute_s", b.compute}, {"wait_s", b.wait}, {"total_s", b.total}};
}

ordered_json branch_json(const EdgeBranch& b) {
  ordered_json j{{"direction", b.direction}, {"ranks", b.ranks}, {"offsets", b.offsets}};
  j["leading"] = b.leading_fit ? fit_json(*b.leading_fit) : ordered_json();
  j["trailing"] = b.trailing_fit ? fit_json(*b.trailing_fit) : ordered_json();
  return j;
}

}  // namespace

void export_trace(const Trace& trace, TraceFormat format, std::ostream& out) {
  const auto records = sorted_records(trace);
  const std::string echo = echo_json(trace);
  if (format == TraceFormat::kJsonl) {
    out << "{\"desync_trace\":1,\"config\":" << echo << "}\n";
    for (const auto& rec : records) {
      out << "{\"rank\":" << rec.rank << ",\"domain\":" << rec.domain << ",\"kind\":\""
          << to_string(rec.iv->kind) << "\",\"step\":" << rec.iv->step
          << ",\"start_s\":" << fmt9(rec.iv->start) << ",\"end_s\":" << fmt9(rec.iv->end)
          << "}\n";
    }
    return;
  }
  out << "# config: " << echo << "\n";
  out << "rank,domain,kind,step,start_s,end_s\n";
  for (const auto& rec : records) {
    out << rec.rank << ',' << rec.domain << ',' << to_string(rec.iv->kind) << ','
        << rec.iv->step << ',' << fmt9(rec.iv->start) << ',' << fmt9(rec.iv->end) << '\n';
  }
}

void write_trace(const Trace& trace, TraceFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TraceError("cannot write trace file " + path.string());
  export_trace(trace, format, out);
  if (!out) throw TraceError("I/O error while writing " + path.string());
}

Trace import_trace(std::istream& in) {
  std::string first;
  if (!std::getline(in, first)) throw TraceError("empty trace input");
  if (!first.empty() && first.front() == '{') return import_jsonl(in, first);
  return import_csv(in, first);
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceError("cannot open trace file " + path.string());
  return import_trace(in);
}

std::string report_to_json(const AnalysisReport& report) {
  ordered_json j;
  j["processes"] = report.processes;
  j["steps"] = report.steps;
  j["makespan_s"] = report.makespan;
  j["developed_steps"] = {report.developed.first, report.developed.last};
  j["final_wavefront"] = {{"step", report.final_wavefront.step},
                          {"amplitude_s", report.final_wavefront.amplitude},
                          {"times_s", report.final_wavefront.times}};
  ordered_json slopes = ordered_json::array();
  for (const auto& f : report.final_slopes) slopes.push_back(fit_json(f));
  j["final_slopes"] = slopes;
  j["amplitude_by_step_s"] = report.amplitude_by_step;
  ordered_json activity = ordered_json::array();
  for (const auto& a : report.activity) {
    activity.push_back({{"domain", a.domain},
                        {"mean", a.stats.mean},
                        {"min", a.stats.min},
                        {"max", a.stats.max}});
  }
  j["activity"] = activity;
  j["initial_breakdown"] = breakdown_json(report.initial_breakdown);
  j["developed_breakdown"] = breakdown_json(report.developed_breakdown);
  if (report.edges) {
    const auto& e = *report.edges;
    j["edges"] = {{"threshold_s", e.threshold},
                  {"up", branch_json(e.up)},
                  {"down", branch_json(e.down)},
                  {"meeting_offset", e.meeting_offset ? ordered_json(*e.meeting_offset)
                                                      : ordered_json()},
                  {"diagnostic", e.diagnostic}};
  } else {
    j["edges"] = nullptr;
  }
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

}  // namespace desync
