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
#include <string>
#include <vector>

#include "desync/model.hpp"
#include "desync/perturbation.hpp"

namespace desync {

/// How a rank completes the requests of one exchange.
///   kWaitAll: all sends/receives posted together, one wait for all.
///   kSplit:   one blocking exchange per neighbour offset, in pattern order
///             (up offsets first, then down offsets).
enum class WaitMode { kWaitAll, kSplit };

enum class TraceFormat { kJsonl, kCsv };

struct MachineConfig {
  std::string preset;  // empty when given inline
  MachinePreset spec;
  std::optional<int> nodes;

  friend bool operator==(const MachineConfig&, const MachineConfig&) = default;
};

struct ProcessLayout {
  int count = 1;
  int threads = 1;
  int per_domain = 1;

  friend bool operator==(const ProcessLayout&, const ProcessLayout&) = default;
};

struct CommConfig {
  CommPattern pattern;
  CommCostModel cost;
  WaitMode wait_mode = WaitMode::kWaitAll;

  friend bool operator==(const CommConfig&, const CommConfig&) = default;
};

struct OutputOptions {
  std::string dir = "out";
  TraceFormat trace_format = TraceFormat::kJsonl;
  bool svg = true;

  friend bool operator==(const OutputOptions&, const OutputOptions&) = default;
};

/// Complete description of one experiment.
struct SimConfig {
  MachineConfig machine;
  ProcessLayout processes;
  WorkloadSpec workload;
  CommConfig comm;
  std::vector<Injection> inject;
  NoiseModel noise;
  OutputOptions output;

  [[nodiscard]] int domain_count() const {
    return (processes.count + processes.per_domain - 1) / processes.per_domain;
  }
  [[nodiscard]] int domain_of(int rank) const { return rank / processes.per_domain; }
  [[nodiscard]] int node_of_domain(int domain) const {
    return domain / machine.spec.domains_per_node;
  }
  [[nodiscard]] int node_of(int rank) const { return node_of_domain(domain_of(rank)); }

  /// Throws ConfigError naming the offending field.
  void validate() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

}  // namespace desync
