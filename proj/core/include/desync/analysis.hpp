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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "desync/perturbation.hpp"
#include "desync/trace.hpp"

namespace desync {

/// Wall-clock completion time of one step's compute phase on every rank.
struct WavefrontProfile {
  int step = 0;
  std::vector<double> times;
  double amplitude = 0.0;  // max(times) - min(times)
};

/// Least-squares line through (time, rank) points.
struct SlopeFit {
  int first_rank = 0;  // segment bounds, in the rank coordinate that was fitted
  int last_rank = 0;
  int points = 0;
  double slope = 0.0;  // ranks per second, signed
  double r = 0.0;      // correlation coefficient
};

/// Fits rank = a + slope * time. Needs at least two points; a degenerate
/// time spread yields an infinite slope and r = 0.
[[nodiscard]] SlopeFit fit_line(std::span<const double> times, std::span<const double> ranks);

/// Throws TraceError naming the first rank that has not finished `step`.
[[nodiscard]] WavefrontProfile wavefront(const Trace& trace, int step);

/// Alias of the wavefront amplitude, used as the desynchronization measure.
[[nodiscard]] double desync_metric(const Trace& trace, int step);

/// Splits the profile where the sign of times[r+1] - times[r] changes (a
/// reversal lasting a single rank is ignored) and fits each segment. Runs of
/// three or more ranks with identical times are synchronized plateaus; they
/// bound segments and are not fitted.
/// Segments shorter than three ranks are dropped; a note is appended to
/// `warnings` when given.
[[nodiscard]] std::vector<SlopeFit> fit_slopes(const WavefrontProfile& profile,
                                               std::vector<std::string>* warnings = nullptr);

struct EdgeOptions {
  /// A wait is attributable to the injection when it exceeds this multiple
  /// of the median wait of the whole trace.
  double threshold_factor = 3.0;
  /// Absolute floor for the attribution threshold, seconds.
  double threshold_floor = 1e-9;
  bool periodic = true;
  /// Non-attributable ranks tolerated between two attributable ones along a
  /// branch; patterns with distance d only couple every d-th rank.
  int max_gap = 0;
};

/// Idle wave edges travelling away from the injection in one direction.
struct EdgeBranch {
  int direction = +1;              // +1 towards higher ranks
  std::vector<int> offsets;        // |rank - injected rank| along the branch
  std::vector<int> ranks;          // actual rank ids
  std::vector<double> leading;     // start of first attributable wait
  std::vector<double> trailing;    // end of the last wait in that episode
  std::optional<SlopeFit> leading_fit;
  std::optional<SlopeFit> trailing_fit;
};

struct EdgeVelocity {
  EdgeBranch up;
  EdgeBranch down;
  double threshold = 0.0;
  /// Offset (towards higher ranks) where the two branches of a periodic
  /// ring meet, when they do.
  std::optional<double> meeting_offset;
  std::string diagnostic;  // non-empty when a branch could not be fitted
};

[[nodiscard]] EdgeVelocity edge_velocity(const Trace& trace, const Injection& injection,
                                         const EdgeOptions& options = {});

struct TimeWindow {
  double begin = 0.0;
  double end = 0.0;
};

struct ActivityStats {
  double mean = 0.0;
  int min = 0;
  int max = 0;
};

/// Time-weighted number of processes of `domain` inside a compute interval
/// during `window`. Throws std::invalid_argument for an empty window.
[[nodiscard]] ActivityStats activity_stats(const Trace& trace, int domain, TimeWindow window);

struct StepWindow {
  int first = 0;
  int last = 0;  // exclusive
};

struct IterationBreakdown {
  double compute = 0.0;  // mean seconds per rank and step (incl. injected idle)
  double wait = 0.0;
  double total = 0.0;
};

/// Averages over all ranks and the steps of `window` (at least 10 steps).
[[nodiscard]] IterationBreakdown iteration_breakdown(const Trace& trace, StepWindow window);

/// Steps in the last `fraction` of the run.
[[nodiscard]] StepWindow developed_steps(const Trace& trace, double fraction = 0.2);

/// Time span in which every rank is inside `steps`: from the latest start of
/// the first step to the earliest end of the last one. With `domain` >= 0
/// only that domain's ranks are considered.
[[nodiscard]] TimeWindow common_time_window(const Trace& trace, StepWindow steps,
                                            int domain = -1);

struct DomainActivity {
  int domain = 0;
  ActivityStats stats;
};

struct AnalysisOptions {
  std::optional<Injection> injection;
  EdgeOptions edges;
  double developed_fraction = 0.2;
};

/// Everything the toolchain reports for one trace.
struct AnalysisReport {
  int processes = 0;
  int steps = 0;
  double makespan = 0.0;
  StepWindow developed;
  WavefrontProfile final_wavefront;
  std::vector<SlopeFit> final_slopes;
  std::vector<double> amplitude_by_step;
  std::vector<DomainActivity> activity;
  IterationBreakdown initial_breakdown;
  IterationBreakdown developed_breakdown;
  std::optional<EdgeVelocity> edges;
  std::vector<std::string> warnings;
};

[[nodiscard]] AnalysisReport analyze(const Trace& trace, const AnalysisOptions& options = {});

}  // namespace desync
