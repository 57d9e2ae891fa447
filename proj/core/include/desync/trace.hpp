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

#include <string>
#include <string_view>
#include <vector>

namespace desync {

enum class IntervalKind { kCompute, kWait, kIdleInjected };

[[nodiscard]] std::string_view to_string(IntervalKind kind);
/// Throws TraceError for anything outside the closed set.
[[nodiscard]] IntervalKind interval_kind_from_string(std::string_view name);

struct Interval {
  IntervalKind kind = IntervalKind::kCompute;
  double start = 0.0;
  double end = 0.0;
  int step = 0;

  [[nodiscard]] double duration() const { return end - start; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Per-rank timelines of one run. Intervals of a rank are ordered by start
/// time and partition [0, finish]. The config echo is a JSON document that
/// reproduces the run.
struct Trace {
  std::vector<std::vector<Interval>> ranks;
  std::vector<int> rank_domain;
  std::string config_echo;

  [[nodiscard]] int process_count() const { return static_cast<int>(ranks.size()); }
  [[nodiscard]] int domain_count() const;
  [[nodiscard]] double finish_time(int rank) const;
  [[nodiscard]] double makespan() const;
  /// Highest step tag + 1 that every rank has completed a compute phase for.
  [[nodiscard]] int completed_steps() const;

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Throws TraceError describing the first violated invariant: intervals
/// contiguous from t = 0, non-negative lengths, non-decreasing step tags.
void check_trace_invariants(const Trace& trace, double tolerance = 1e-12);

}  // namespace desync
