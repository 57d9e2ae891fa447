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

#include "desync/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace desync {

BandwidthCurve BandwidthCurve::from_table(std::vector<std::pair<int, double>> points) {
  if (points.empty()) throw std::invalid_argument("bandwidth table is empty");
  std::sort(points.begin(), points.end());
  BandwidthCurve curve;
  curve.values_.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [n, b] = points[i];
    if (n != static_cast<int>(i) + 1) {
      throw std::invalid_argument("bandwidth table must list n = 1.." +
                                  std::to_string(points.size()) + " exactly once (saw n=" +
                                  std::to_string(n) + ")");
    }
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw std::invalid_argument("bandwidth b(" + std::to_string(n) + ") must be positive");
    }
    if (!curve.values_.empty() && b < curve.values_.back()) {
      throw std::invalid_argument("bandwidth table must be non-decreasing (b(" +
                                  std::to_string(n) + ") < b(" + std::to_string(n - 1) + "))");
    }
    curve.values_.push_back(b);
  }
  return curve;
}

BandwidthCurve BandwidthCurve::analytic(double b1, double b_sat, int cores) {
  if (!(b1 > 0.0) || !(b_sat > 0.0)) {
    throw std::invalid_argument("analytic bandwidth curve needs b1 > 0 and b_sat > 0");
  }
  if (cores < 1) throw std::invalid_argument("analytic bandwidth curve needs cores >= 1");
  BandwidthCurve curve;
  curve.values_.reserve(static_cast<std::size_t>(cores));
  for (int n = 1; n <= cores; ++n) curve.values_.push_back(std::min(n * b1, b_sat));
  curve.analytic_ = std::make_pair(b1, b_sat);
  return curve;
}

double BandwidthCurve::at(int n) const {
  if (n < 1 || n > cores()) {
    throw std::domain_error("active core count " + std::to_string(n) + " outside 1.." +
                            std::to_string(cores()));
  }
  return values_[static_cast<std::size_t>(n - 1)];
}

std::vector<std::pair<int, double>> BandwidthCurve::table() const {
  std::vector<std::pair<int, double>> out;
  out.reserve(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    out.emplace_back(static_cast<int>(i) + 1, values_[i]);
  }
  return out;
}

void WorkloadSpec::validate() const {
  if (steps < 1) throw std::invalid_argument("workload.steps must be >= 1");
  if (kind == WorkloadKind::kMemoryBound) {
    if (!(volume_per_step > 0.0)) {
      throw std::invalid_argument("memory-bound workload needs volume_per_step > 0");
    }
    if (duration_per_step != 0.0) {
      throw std::invalid_argument("memory-bound workload must not set duration_per_step");
    }
  } else {
    if (!(duration_per_step > 0.0)) {
      throw std::invalid_argument("core-bound workload needs duration_per_step > 0");
    }
    if (volume_per_step != 0.0) {
      throw std::invalid_argument("core-bound workload must not set volume_per_step");
    }
  }
}

void CommPattern::validate(int process_count) const {
  auto check = [&](const std::vector<int>& offsets, const char* which) {
    for (int d : offsets) {
      if (d < 1 || d >= process_count) {
        throw std::invalid_argument(std::string("comm.pattern.") + which + " offset " +
                                    std::to_string(d) + " must satisfy 1 <= d < P=" +
                                    std::to_string(process_count));
      }
    }
  };
  check(distances_up, "up");
  check(distances_down, "down");
  if (message_bytes < 0.0) throw std::invalid_argument("comm.message_bytes must be >= 0");
  if (eager_threshold < 0.0) {
    throw std::invalid_argument("comm.eager_threshold_bytes must be >= 0");
  }
  if (sigma != 1 && sigma != 2) throw std::invalid_argument("comm.sigma must be 1 or 2");
}

void CommCostModel::validate() const {
  if (latency < 0.0) throw std::invalid_argument("comm.cost.latency must be >= 0");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("comm.cost.bandwidth must be > 0");
  if (membw_charge < 0.0 || membw_charge > 1.0) {
    throw std::invalid_argument("comm.membw_charge must lie in [0, 1]");
  }
}

double bandwidth_at(const BandwidthCurve& curve, int n) { return curve.at(n); }

int saturation_point(const BandwidthCurve& curve, double fraction) {
  const double target = fraction * curve.b_max();
  for (int n = 1; n <= curve.cores(); ++n) {
    if (curve.at(n) >= target) return n;
  }
  return curve.cores();
}

double exec_time(double bytes, int n, const BandwidthCurve& curve) {
  return n * bytes / curve.at(n);
}

double predicted_velocity(double t_exec, double t_comm, int distance, int sigma) {
  const double denom = t_exec + t_comm;
  if (!(denom > 0.0)) {
    throw std::domain_error("predicted_velocity: T_exec + T_comm must be positive");
  }
  return static_cast<double>(sigma) * distance / denom;
}

double predicted_velocity(int n, double bytes, const BandwidthCurve& curve, double t_comm,
                          int distance, int sigma) {
  return predicted_velocity(exec_time(bytes, n, curve), t_comm, distance, sigma);
}

double chebfd_code_balance(double block_size) {
  if (!(block_size >= 1.0)) throw std::domain_error("block size must be >= 1");
  if (std::isinf(block_size)) return 80.0 / 146.0;
  return (260.0 / block_size + 80.0) / 146.0;
}

}  // namespace desync
