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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "desync/analysis.hpp"
#include "desync/config.hpp"
#include "desync/trace.hpp"

namespace desync {

/// Writes one record per interval, sorted by (rank, start), with all
/// floating-point fields printed to 9 significant digits.
///
/// JSON Lines: a header object {"desync_trace":1,"config":{...}} followed by
/// {"rank","domain","kind","step","start_s","end_s"} records.
/// CSV: a "# config: {...}" comment line, the column header, then rows.
void export_trace(const Trace& trace, TraceFormat format, std::ostream& out);
void write_trace(const Trace& trace, TraceFormat format, const std::filesystem::path& path);

/// Reads either format (detected from the first line). Throws TraceError
/// with the line number on malformed input.
[[nodiscard]] Trace import_trace(std::istream& in);
[[nodiscard]] Trace read_trace(const std::filesystem::path& path);

/// Structured, pretty-printed JSON document of the report.
[[nodiscard]] std::string report_to_json(const AnalysisReport& report);

}  // namespace desync
