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
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace desync {

/// One-off idle period injected at the start of a compute phase.
/// Exactly one of `duration_seconds` / `duration_phases` is set; phases are
/// multiples of the unperturbed compute phase of the targeted rank.
struct Injection {
  int rank = 0;
  int step = 0;
  std::optional<double> duration_seconds;
  std::optional<double> duration_phases;

  friend bool operator==(const Injection&, const Injection&) = default;
};

enum class NoiseKind { kOff, kLognormalMultiplicative, kExponentialAdditive };

struct NoiseModel {
  NoiseKind kind = NoiseKind::kOff;
  double magnitude = 0.0;  // sigma of log(factor), or mean delay in seconds
  std::uint64_t seed = 0;

  [[nodiscard]] bool silent() const { return kind == NoiseKind::kOff || magnitude == 0.0; }

  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

/// Injections indexed by (rank, step). Construction rejects overlapping
/// entries and out-of-range targets.
class InjectionSchedule {
 public:
  InjectionSchedule() = default;
  InjectionSchedule(const std::vector<Injection>& injections, int process_count, int steps);

  /// Injected idle seconds for (rank, step); 0 when nothing is scheduled.
  /// `phase_seconds` converts a phase-relative duration.
  [[nodiscard]] double apply_injection(int rank, int step, double phase_seconds) const;

  [[nodiscard]] bool has(int rank, int step) const {
    return entries_.count({rank, step}) != 0;
  }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::pair<int, int>, Injection> entries_;
};

/// Standard-normal draw that depends only on (seed, rank, step).
[[nodiscard]] double noise_normal(std::uint64_t seed, int rank, int step);

/// Exponential draw with the given mean, keyed the same way.
[[nodiscard]] double noise_exponential(std::uint64_t seed, int rank, int step, double mean);

/// Perturbed length of a phase whose silent length is `base`.
///   off         -> base
///   lognormal   -> base * exp(magnitude * z)
///   exponential -> base + Exp(mean = magnitude)
[[nodiscard]] double perturb_duration(double base, const NoiseModel& model, int rank,
                                      int step);

}  // namespace desync
