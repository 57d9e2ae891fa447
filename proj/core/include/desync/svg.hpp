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
#include <optional>
#include <string>

#include "desync/trace.hpp"

namespace desync {

struct TimelineOptions {
  double width = 1200.0;       // drawing area, px
  double lane_height = 6.0;    // px per rank
  std::optional<int> wavefront_step;  // overlay the completion profile of this step
  std::string title;
};

/// Gantt-style timeline, one lane per rank with rank 0 on top. Compute is
/// light blue, waits red, injected idle dark blue; dotted lines separate
/// contention domains. Output is a pure function of its inputs.
[[nodiscard]] std::string render_timeline(const Trace& trace, const TimelineOptions& options = {});

void write_timeline(const Trace& trace, const std::filesystem::path& path,
                    const TimelineOptions& options = {});

}  // namespace desync
