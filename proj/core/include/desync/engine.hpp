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

#include <cstdint>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

#include "desync/config.hpp"
#include "desync/model.hpp"
#include "desync/mpi.hpp"
#include "desync/trace.hpp"

namespace desync {

/// Event kinds in tie-break priority order: at equal timestamps anything that
/// releases a rank or bandwidth is handled before anything that blocks.
enum class EventKind : std::uint8_t {
  kInjectionEnd = 0,
  kChargeEnd = 1,
  kMessageReady = 2,
  kRequestComplete = 3,
  kComputeDone = 4,
  kInjectionStart = 5,
  kSimEnd = 6,
};

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::kSimEnd;
  int rank = 0;
  std::uint64_t sequence = 0;
  std::uint64_t generation = 0;  // projections are stale when this lags
  std::uint64_t payload = 0;
};

/// Strict total order (time, kind, rank, sequence).
[[nodiscard]] bool event_before(const Event& a, const Event& b);

class EventQueue {
 public:
  void push(Event ev);
  [[nodiscard]] Event pop();
  [[nodiscard]] bool empty() const { return heap_.empty(); }
  [[nodiscard]] std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const { return event_before(b, a); }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_sequence_ = 0;
};

/// A process that is currently draining bytes from its domain.
struct DrainMember {
  int rank = 0;
  int threads = 1;
  double remaining = 0.0;  // bytes
  double drained = 0.0;    // bytes drained so far in this phase
};

/// Processor-sharing state of one contention domain. A computing process
/// with t threads drains at B * t / A, where A is the number of active cores
/// and B = b(A) reduced by any bandwidth drawn for message traffic.
struct DomainDrainState {
  int id = 0;
  const BandwidthCurve* curve = nullptr;
  double last_update = 0.0;
  std::vector<DrainMember> computing;  // sorted by rank
  double comm_demand = 0.0;            // bytes/s drawn by in-flight messages
  std::uint64_t generation = 0;

  [[nodiscard]] int active_cores() const;
  /// Bandwidth left for application code.
  [[nodiscard]] double app_bandwidth() const;
  [[nodiscard]] double rate(const DrainMember& member) const;
  [[nodiscard]] DrainMember* find(int rank);
};

/// Drains every computing member for the interval [last_update, now] at the
/// rates in force during that interval. Throws SimulationError if a member
/// would go negative beyond `tolerance` bytes.
void advance_domain(DomainDrainState& state, double now, double tolerance = 1e-9);

/// Earliest projected compute completion assuming constant activity; ties go
/// to the lower rank. Empty when nothing is computing.
[[nodiscard]] std::optional<std::pair<int, double>> next_completion(
    const DomainDrainState& state);

struct RunOptions {
  bool record_messages = false;  // keep the full matched-message log
  bool record_drain = false;     // keep drained bytes per (rank, step)
};

struct RunStats {
  std::uint64_t events = 0;
  std::uint64_t stale_events = 0;
  /// max |drained - target| / target over all memory-bound phases.
  double max_conservation_error = 0.0;
  /// Message bytes charged to each domain's memory traffic.
  std::vector<double> domain_comm_bytes;
};

struct RunResult {
  Trace trace;
  RunStats stats;
  std::vector<MessageRequest> messages;
  /// drained[rank][step] and target[rank][step] when record_drain is set.
  std::vector<std::vector<double>> drained;
  std::vector<std::vector<double>> target;
};

/// Simulates `config` from a global barrier at t = 0 until every rank has
/// completed all steps. Identical configs give identical results.
/// Throws DeadlockError if ranks remain blocked with no pending event.
[[nodiscard]] RunResult simulate(const SimConfig& config, const RunOptions& options = {});

[[nodiscard]] Trace run(const SimConfig& config);

/// Unperturbed compute phase length of `rank` when all processes of its
/// domain compute in lockstep.
[[nodiscard]] double lockstep_phase_seconds(const SimConfig& config, int rank);

}  // namespace desync
