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

#include "desync/trace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "desync/errors.hpp"

namespace desync {

std::string_view to_string(IntervalKind kind) {
  switch (kind) {
    case IntervalKind::kCompute:
      return "compute";
    case IntervalKind::kWait:
      return "wait";
    case IntervalKind::kIdleInjected:
      return "idle_injected";
  }
  return "compute";
}

IntervalKind interval_kind_from_string(std::string_view name) {
  if (name == "compute") return IntervalKind::kCompute;
  if (name == "wait") return IntervalKind::kWait;
  if (name == "idle_injected") return IntervalKind::kIdleInjected;
  throw TraceError("unknown interval kind '" + std::string(name) + "'");
}

int Trace::domain_count() const {
  if (rank_domain.empty()) return 0;
  return *std::max_element(rank_domain.begin(), rank_domain.end()) + 1;
}

double Trace::finish_time(int rank) const {
  const auto& lane = ranks.at(static_cast<std::size_t>(rank));
  return lane.empty() ? 0.0 : lane.back().end;
}

double Trace::makespan() const {
  double t = 0.0;
  for (int r = 0; r < process_count(); ++r) t = std::max(t, finish_time(r));
  return t;
}

int Trace::completed_steps() const {
  int steps = -1;
  for (const auto& lane : ranks) {
    int last = -1;
    for (const auto& iv : lane) {
      if (iv.kind == IntervalKind::kCompute) last = std::max(last, iv.step);
    }
    steps = steps < 0 ? last + 1 : std::min(steps, last + 1);
  }
  return std::max(steps, 0);
}

void check_trace_invariants(const Trace& trace, double tolerance) {
  if (trace.rank_domain.size() != trace.ranks.size()) {
    throw TraceError("rank->domain map has " + std::to_string(trace.rank_domain.size()) +
                     " entries for " + std::to_string(trace.ranks.size()) + " ranks");
  }
  for (std::size_t r = 0; r < trace.ranks.size(); ++r) {
    double cursor = 0.0;
    int step = 0;
    for (const auto& iv : trace.ranks[r]) {
      const std::string where = "rank " + std::to_string(r) + " step " + std::to_string(iv.step);
      if (std::abs(iv.start - cursor) > tolerance * std::max(1.0, std::abs(cursor))) {
        throw TraceError(where + ": interval starts at " + std::to_string(iv.start) +
                         " but previous ended at " + std::to_string(cursor));
      }
      if (iv.end < iv.start) throw TraceError(where + ": negative interval length");
      if (iv.step < step) throw TraceError(where + ": step tags decrease");
      step = iv.step;
      cursor = iv.end;
    }
  }
}

}  // namespace desync
