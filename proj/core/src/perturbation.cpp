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

#include "desync/perturbation.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace desync {

namespace {

// splitmix64 finalizer; decorrelates neighbouring (rank, step) keys before
// they seed the engine.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 keyed_engine(std::uint64_t seed, int rank, int step) {
  std::uint64_t key = mix(seed);
  key = mix(key ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(rank)));
  key = mix(key ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(step)) << 32));
  return std::mt19937_64(key);
}

}  // namespace

InjectionSchedule::InjectionSchedule(const std::vector<Injection>& injections,
                                     int process_count, int steps) {
  for (const auto& inj : injections) {
    const std::string where =
        "injection (rank " + std::to_string(inj.rank) + ", step " + std::to_string(inj.step) + ")";
    if (inj.rank < 0 || inj.rank >= process_count) {
      throw std::invalid_argument(where + ": rank out of range");
    }
    if (inj.step < 0 || inj.step >= steps) {
      throw std::invalid_argument(where + ": step out of range");
    }
    if (inj.duration_seconds.has_value() == inj.duration_phases.has_value()) {
      throw std::invalid_argument(where +
                                  ": set exactly one of duration_seconds / duration_phases");
    }
    const double d = inj.duration_seconds ? *inj.duration_seconds : *inj.duration_phases;
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw std::invalid_argument(where + ": duration must be > 0");
    }
    if (!entries_.emplace(std::make_pair(inj.rank, inj.step), inj).second) {
      throw std::invalid_argument(where + ": overlaps another injection");
    }
  }
}

double InjectionSchedule::apply_injection(int rank, int step, double phase_seconds) const {
  const auto it = entries_.find({rank, step});
  if (it == entries_.end()) return 0.0;
  const Injection& inj = it->second;
  return inj.duration_seconds ? *inj.duration_seconds : *inj.duration_phases * phase_seconds;
}

double noise_normal(std::uint64_t seed, int rank, int step) {
  auto engine = keyed_engine(seed, rank, step);
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine);
}

double noise_exponential(std::uint64_t seed, int rank, int step, double mean) {
  if (mean <= 0.0) return 0.0;
  auto engine = keyed_engine(seed, rank, step);
  std::exponential_distribution<double> dist(1.0 / mean);
  return dist(engine);
}

double perturb_duration(double base, const NoiseModel& model, int rank, int step) {
  switch (model.kind) {
    case NoiseKind::kOff:
      return base;
    case NoiseKind::kLognormalMultiplicative:
      if (model.magnitude == 0.0) return base;
      return base * std::exp(model.magnitude * noise_normal(model.seed, rank, step));
    case NoiseKind::kExponentialAdditive:
      return base + noise_exponential(model.seed, rank, step, model.magnitude);
  }
  return base;
}

}  // namespace desync
