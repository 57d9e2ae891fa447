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

#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "desync/analysis.hpp"
#include "desync/engine.hpp"
#include "desync/errors.hpp"

using namespace desync;

namespace {

// One compute interval per step, rank r offset by offsets[r].
Trace staggered(const std::vector<double>& offsets, int steps, double phase, int per_domain) {
  Trace t;
  for (std::size_t r = 0; r < offsets.size(); ++r) {
    std::vector<Interval> lane;
    double now = 0.0;
    if (offsets[r] > 0.0) {
      lane.push_back({IntervalKind::kWait, 0.0, offsets[r], 0});
      now = offsets[r];
    }
    for (int s = 0; s < steps; ++s) {
      lane.push_back({IntervalKind::kCompute, now, now + phase, s});
      now += phase;
    }
    t.ranks.push_back(lane);
    t.rank_domain.push_back(static_cast<int>(r) / per_domain);
  }
  return t;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("wavefront amplitude") {
  CHECK(desync_metric(staggered(std::vector<double>(8, 0.0), 3, 0.1, 8), 2) == 0.0);
  std::vector<double> ramp;
  for (int r = 0; r < 8; ++r) ramp.push_back(0.01 * r);
  CHECK(desync_metric(staggered(ramp, 3, 0.1, 8), 1) == doctest::Approx(0.07));
  CHECK_THROWS_AS((void)wavefront(staggered(ramp, 3, 0.1, 8), 3), TraceError);
}

TEST_CASE("line fit") {
  const std::vector<double> times{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> ranks{1.0, 3.0, 5.0, 7.0};
  const SlopeFit fit = fit_line(times, ranks);
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.r == doctest::Approx(1.0));
  const std::vector<double> flat{1.0, 1.0};
  const std::vector<double> two{0.0, 1.0};
  CHECK(fit_line(flat, two).r == 0.0);
}

TEST_CASE("linear ramp yields one segment with slope 1/k") {
  std::vector<double> ramp;
  for (int r = 0; r < 10; ++r) ramp.push_back(0.5 * r);
  const auto fits = fit_slopes(wavefront(staggered(ramp, 1, 1.0, 10), 0));
  REQUIRE(fits.size() == 1);
  CHECK(fits[0].slope == doctest::Approx(2.0));
  CHECK(fits[0].r == doctest::Approx(1.0));
}

TEST_CASE("triangle yields two segments of opposite sign") {
  std::vector<double> tri;
  for (int r = 0; r < 11; ++r) tri.push_back(0.1 * (r <= 5 ? r : 10 - r));
  const auto fits = fit_slopes(wavefront(staggered(tri, 1, 1.0, 11), 0));
  REQUIRE(fits.size() == 2);
  CHECK(fits[0].slope > 0.0);
  CHECK(fits[1].slope < 0.0);
  CHECK(fits[0].slope == doctest::Approx(-fits[1].slope));
}

TEST_CASE("synchronized plateaus are not fitted") {
  std::vector<double> shape(5, 0.0);
  for (int r = 1; r <= 6; ++r) shape.push_back(0.1 * r);
  std::vector<std::string> warnings;
  const auto fits = fit_slopes(wavefront(staggered(shape, 1, 1.0, 11), 0), &warnings);
  REQUIRE(fits.size() == 1);
  CHECK(fits[0].first_rank >= 4);
  CHECK(fits[0].r == doctest::Approx(1.0));
}

TEST_CASE("activity of a lockstep run equals the processes per domain") {
  const Trace t = staggered(std::vector<double>(6, 0.0), 20, 0.1, 3);
  const auto stats = activity_stats(t, 1, {0.5, 1.5});
  CHECK(stats.mean == doctest::Approx(3.0));
  CHECK(stats.min == 3);
  CHECK(stats.max == 3);
  CHECK_THROWS_AS((void)activity_stats(t, 0, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("iteration breakdown") {
  const Trace t = staggered(std::vector<double>(4, 0.0), 20, 0.1, 4);
  const auto b = iteration_breakdown(t, {0, 10});
  CHECK(b.compute == doctest::Approx(0.1));
  CHECK(b.wait == 0.0);
  CHECK(b.total == doctest::Approx(0.1));
  CHECK_THROWS_AS((void)iteration_breakdown(t, {0, 9}), std::invalid_argument);
  const StepWindow dev = developed_steps(t);
  CHECK(dev.first == 16);
  CHECK(dev.last == 20);
}

TEST_CASE("edge velocity of a core-bound idle wave") {
  SimConfig c;
  c.machine.spec = MachinePreset{"test", 4, 1, BandwidthCurve::analytic(10e9, 40e9, 4)};
  c.processes.count = 20;
  c.workload = WorkloadSpec::core_bound(10e-3, 40);
  c.comm.pattern.boundary = Boundary::kOpen;
  c.comm.pattern.message_bytes = 8.0;
  Injection inj;
  inj.rank = 5;
  inj.step = 0;
  inj.duration_phases = 10.0;
  c.inject = {inj};
  EdgeOptions opts;
  opts.periodic = false;
  const auto ev = edge_velocity(run(c), inj, opts);
  REQUIRE(ev.up.leading_fit.has_value());
  REQUIRE(ev.down.leading_fit.has_value());
  // One rank per compute phase in each direction.
  CHECK(ev.up.leading_fit->slope == doctest::Approx(100.0).epsilon(1e-6));
  CHECK(ev.down.leading_fit->slope == doctest::Approx(-100.0).epsilon(1e-6));
}

}  // TEST_SUITE
