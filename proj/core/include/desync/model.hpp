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
#include <string>
#include <utility>
#include <vector>

namespace desync {

/// Memory bandwidth of one contention domain as a function of the number of
/// cores that are executing memory-bound code at the same time.
///
/// Two representations are supported: a measured table b(1..C), and the
/// analytic saturating form b(n) = min(n * b1, b_sat). Only integral core
/// counts are meaningful; there is no interpolation.
class BandwidthCurve {
 public:
  BandwidthCurve() = default;

  /// Table form. `points` must cover n = 1..C exactly once (any order).
  static BandwidthCurve from_table(std::vector<std::pair<int, double>> points);

  static BandwidthCurve analytic(double b1, double b_sat, int cores);

  [[nodiscard]] int cores() const { return static_cast<int>(values_.size()); }
  [[nodiscard]] bool is_analytic() const { return analytic_.has_value(); }
  [[nodiscard]] double b1() const { return values_.front(); }
  [[nodiscard]] double b_max() const { return values_.back(); }
  [[nodiscard]] std::optional<std::pair<double, double>> analytic_params() const {
    return analytic_;
  }

  /// b(n) for 1 <= n <= cores(). Throws std::domain_error otherwise.
  [[nodiscard]] double at(int n) const;

  /// (n, b(n)) for n = 1..C, in order.
  [[nodiscard]] std::vector<std::pair<int, double>> table() const;

  friend bool operator==(const BandwidthCurve&, const BandwidthCurve&) = default;

 private:
  std::vector<double> values_;
  std::optional<std::pair<double, double>> analytic_;
};

struct ContentionDomain {
  int id = 0;
  int cores = 1;
  int node_id = 0;
  BandwidthCurve curve;
};

struct ProcessSpec {
  int rank = 0;
  int domain = 0;
  int threads = 1;
};

enum class WorkloadKind { kMemoryBound, kCoreBound };

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::kMemoryBound;
  double volume_per_step = 0.0;    // bytes per process and step
  double duration_per_step = 0.0;  // seconds per process and step
  int steps = 1;

  static WorkloadSpec memory_bound(double bytes, int steps) {
    return {WorkloadKind::kMemoryBound, bytes, 0.0, steps};
  }
  static WorkloadSpec core_bound(double seconds, int steps) {
    return {WorkloadKind::kCoreBound, 0.0, seconds, steps};
  }

  /// Throws std::invalid_argument if the fields do not match `kind`.
  void validate() const;

  friend bool operator==(const WorkloadSpec&, const WorkloadSpec&) = default;
};

enum class Boundary { kOpen, kPeriodic };

struct CommPattern {
  std::vector<int> distances_up{1};
  std::vector<int> distances_down{1};
  Boundary boundary = Boundary::kPeriodic;
  double message_bytes = 0.0;
  double eager_threshold = 256.0 * 1024.0;
  int sigma = 1;

  void validate(int process_count) const;

  friend bool operator==(const CommPattern&, const CommPattern&) = default;
};

/// Hockney-style cost per message, plus the fraction of intra-node message
/// bytes that shows up as memory traffic on the endpoint domains.
struct CommCostModel {
  double latency = 0.0;              // alpha, seconds per message
  double bandwidth = 1e10;           // beta, bytes per second
  double membw_charge = 0.0;         // gamma in [0, 1]

  [[nodiscard]] double transfer_time(double bytes) const {
    return latency + bytes / bandwidth;
  }

  void validate() const;

  friend bool operator==(const CommCostModel&, const CommCostModel&) = default;
};

struct MachinePreset {
  std::string name;
  int cores_per_domain = 1;
  int domains_per_node = 2;
  BandwidthCurve curve;

  friend bool operator==(const MachinePreset&, const MachinePreset&) = default;
};

inline constexpr double kDefaultSaturationFraction = 0.95;

[[nodiscard]] double bandwidth_at(const BandwidthCurve& curve, int n);

/// Smallest n with b(n) >= fraction * b(C).
[[nodiscard]] int saturation_point(const BandwidthCurve& curve,
                                   double fraction = kDefaultSaturationFraction);

/// Time for one of n concurrently active processes to transfer `bytes`:
/// n * V / b(n).
[[nodiscard]] double exec_time(double bytes, int n, const BandwidthCurve& curve);

/// Local silent-system idle wave velocity in ranks per second,
/// sigma * d / (T_exec + T_comm).
[[nodiscard]] double predicted_velocity(double t_exec, double t_comm, int distance,
                                        int sigma);

[[nodiscard]] double predicted_velocity(int n, double bytes, const BandwidthCurve& curve,
                                        double t_comm, int distance, int sigma);

/// Optimistic code balance of the blocked polynomial filter kernel in
/// bytes per flop, for block size n_b.
[[nodiscard]] double chebfd_code_balance(double block_size);

}  // namespace desync
