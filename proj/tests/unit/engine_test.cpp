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

#include <cmath>

#include "doctest.h"

#include "desync/engine.hpp"
#include "desync/errors.hpp"

using namespace desync;

namespace {

SimConfig small_config(int ranks, int per_domain, BandwidthCurve curve, WorkloadSpec workload) {
  SimConfig c;
  c.machine.spec = MachinePreset{"test", curve.cores(), 1, std::move(curve)};
  c.processes.count = ranks;
  c.processes.per_domain = per_domain;
  c.workload = workload;
  c.comm.pattern.message_bytes = 8.0;
  c.comm.pattern.boundary = Boundary::kOpen;
  return c;
}

double step_span(const Trace& trace, int rank, int step) {
  double span = 0.0;
  for (const auto& iv : trace.ranks[static_cast<std::size_t>(rank)]) {
    if (iv.step == step) span += iv.duration();
  }
  return span;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("events order by time, kind, rank, sequence") {
  Event a{1.0, EventKind::kComputeDone, 3, 0};
  Event b{1.0, EventKind::kRequestComplete, 5, 1};
  CHECK(event_before(b, a));
  Event c{0.5, EventKind::kSimEnd, 9, 2};
  CHECK(event_before(c, b));
  EventQueue q;
  q.push(a);
  q.push(b);
  q.push(c);
  CHECK(q.pop().rank == 9);
  CHECK(q.pop().rank == 5);
  CHECK(q.pop().rank == 3);
  CHECK(q.empty());
}

TEST_CASE("processor sharing drains b(A)/A per single-threaded process") {
  const auto curve = BandwidthCurve::analytic(10e9, 40e9, 10);
  DomainDrainState dom;
  dom.curve = &curve;
  for (int r = 0; r < 4; ++r) dom.computing.push_back({r, 1, 1e9, 0.0});
  CHECK(dom.active_cores() == 4);
  advance_domain(dom, 0.01);
  for (const auto& m : dom.computing) CHECK(m.drained == doctest::Approx(1e8));
}

TEST_CASE("threads weight the share") {
  const auto curve = BandwidthCurve::analytic(5e9, 60e9, 20);
  DomainDrainState dom;
  dom.curve = &curve;
  dom.computing.push_back({0, 10, 1e12, 0.0});
  dom.computing.push_back({1, 10, 1e12, 0.0});
  CHECK(dom.active_cores() == 20);
  CHECK(dom.rate(dom.computing[0]) == doctest::Approx(30e9));
  advance_domain(dom, 0.5);
  CHECK(dom.computing[1].drained == doctest::Approx(15e9));
}

TEST_CASE("message traffic reduces the application share") {
  const auto curve = BandwidthCurve::analytic(10e9, 40e9, 10);
  DomainDrainState dom;
  dom.curve = &curve;
  for (int r = 0; r < 4; ++r) dom.computing.push_back({r, 1, 1e9, 0.0});
  dom.comm_demand = 10e9;
  CHECK(dom.app_bandwidth() == doctest::Approx(30e9));
  dom.comm_demand = 100e9;
  CHECK(dom.app_bandwidth() == doctest::Approx(4e9));
}

TEST_CASE("next completion") {
  const auto curve = BandwidthCurve::from_table({{1, 10e9}, {2, 10e9}});
  DomainDrainState dom;
  dom.curve = &curve;
  dom.last_update = 1.0;
  CHECK_FALSE(next_completion(dom).has_value());
  dom.computing.push_back({0, 1, 0.5e9, 0.0});
  auto next = next_completion(dom);
  REQUIRE(next.has_value());
  CHECK(next->first == 0);
  CHECK(next->second == doctest::Approx(1.05));
  dom.computing = {{2, 1, 1e9, 0.0}, {4, 1, 1e9, 0.0}};
  next = next_completion(dom);
  CHECK(next->first == 2);
  CHECK(next->second == doctest::Approx(1.2));
}

TEST_CASE("core-bound lockstep") {
  auto c = small_config(4, 1, BandwidthCurve::analytic(10e9, 40e9, 4),
                        WorkloadSpec::core_bound(10e-3, 5));
  const Trace t = run(c);
  CHECK(t.makespan() == doctest::Approx(0.05));
  CHECK(t.completed_steps() == 5);
  CHECK_NOTHROW(check_trace_invariants(t));
}

TEST_CASE("memory-bound lockstep follows b(n)") {
  auto c = small_config(4, 4, BandwidthCurve::analytic(10e9, 40e9, 4),
                        WorkloadSpec::memory_bound(1e9, 1));
  CHECK(run(c).makespan() == doctest::Approx(0.1));
  CHECK(lockstep_phase_seconds(c, 0) == doctest::Approx(0.1));
  c.machine.spec.curve = BandwidthCurve::analytic(10e9, 20e9, 4);
  CHECK(lockstep_phase_seconds(c, 0) == doctest::Approx(0.2));
  c.processes.per_domain = 2;
  CHECK(lockstep_phase_seconds(c, 0) == doctest::Approx(0.1));
}

TEST_CASE("a late process shares the domain once it starts") {
  // Rank 0 drains 0.5 GB alone at 10 GB/s, the rest at 15/2 GB/s.
  auto c = small_config(2, 2, BandwidthCurve::from_table({{1, 10e9}, {2, 15e9}}),
                        WorkloadSpec::memory_bound(1e9, 1));
  c.comm.pattern.distances_up.clear();
  c.comm.pattern.distances_down.clear();
  Injection inj;
  inj.rank = 1;
  inj.step = 0;
  inj.duration_seconds = 0.05;
  c.inject = {inj};
  const Trace t = run(c);
  CHECK(t.finish_time(0) == doctest::Approx(0.05 + 0.5 / 7.5).epsilon(1e-12));
  CHECK(t.finish_time(0) == doctest::Approx(0.11667).epsilon(1e-4));
  CHECK(t.finish_time(1) == doctest::Approx(0.05 + 0.5 / 7.5 + 0.05).epsilon(1e-12));
}

TEST_CASE("drained bytes match targets") {
  auto c = small_config(8, 4, BandwidthCurve::analytic(10e9, 30e9, 8),
                        WorkloadSpec::memory_bound(1e8, 20));
  c.noise = NoiseModel{NoiseKind::kLognormalMultiplicative, 0.2, 3};
  RunOptions opts;
  opts.record_drain = true;
  const auto result = simulate(c, opts);
  CHECK(result.stats.max_conservation_error < 1e-9);
  REQUIRE(result.drained.size() == 8);
  for (std::size_t r = 0; r < 8; ++r) {
    for (std::size_t s = 0; s < 20; ++s) {
      CHECK(std::abs(result.drained[r][s] - result.target[r][s]) <= 1e-9 * result.target[r][s]);
    }
  }
}

TEST_CASE("message charge") {
  auto c = small_config(2, 2, BandwidthCurve::analytic(10e9, 40e9, 4),
                        WorkloadSpec::memory_bound(1e8, 1));
  c.comm.pattern.distances_down.clear();
  c.comm.pattern.message_bytes = 5e6;
  c.comm.cost = CommCostModel{1e-6, 5e8, 0.0};
  const auto silent = simulate(c);
  CHECK(silent.stats.domain_comm_bytes[0] == 0.0);

  c.comm.cost.membw_charge = 1.0;
  const auto charged = simulate(c);
  // Both endpoints live in domain 0.
  CHECK(charged.stats.domain_comm_bytes[0] == doctest::Approx(10e6));

  c.processes.per_domain = 1;
  c.machine.nodes = 2;
  const auto remote = simulate(c);
  CHECK(remote.stats.domain_comm_bytes[0] == 0.0);
  CHECK(remote.stats.domain_comm_bytes[1] == 0.0);
}

TEST_CASE("charge is neutral for core-bound work") {
  auto c = small_config(4, 4, BandwidthCurve::analytic(10e9, 40e9, 4),
                        WorkloadSpec::core_bound(1e-3, 10));
  c.comm.pattern.message_bytes = 1e6;
  c.comm.cost = CommCostModel{1e-6, 1e9, 0.0};
  const Trace plain = run(c);
  c.comm.cost.membw_charge = 1.0;
  const Trace charged = run(c);
  CHECK(plain.ranks == charged.ranks);
}

TEST_CASE("injection in phases") {
  auto c = small_config(1, 1, BandwidthCurve::analytic(10e9, 40e9, 4),
                        WorkloadSpec::memory_bound(1e8, 2));
  c.comm.pattern.distances_up.clear();
  c.comm.pattern.distances_down.clear();
  Injection inj;
  inj.rank = 0;
  inj.step = 0;
  inj.duration_phases = 25.0;
  c.inject = {inj};
  const Trace t = run(c);
  CHECK(step_span(t, 0, 0) == doctest::Approx(26 * 0.01));
  CHECK(step_span(t, 0, 1) == doctest::Approx(0.01));
}

TEST_CASE("single rank, single step") {
  auto c = small_config(1, 1, BandwidthCurve::analytic(10e9, 40e9, 4),
                        WorkloadSpec::core_bound(1e-3, 1));
  c.comm.pattern.distances_up.clear();
  c.comm.pattern.distances_down.clear();
  const Trace t = run(c);
  REQUIRE(t.ranks.size() == 1);
  REQUIRE(t.ranks[0].size() == 1);
  CHECK(t.ranks[0][0].kind == IntervalKind::kCompute);
  CHECK(t.ranks[0][0].end == doctest::Approx(1e-3));
}

TEST_CASE("runs are deterministic") {
  auto c = small_config(12, 4, BandwidthCurve::analytic(10e9, 30e9, 8),
                        WorkloadSpec::memory_bound(1e8, 30));
  c.noise = NoiseModel{NoiseKind::kExponentialAdditive, 1e-3, 17};
  c.comm.pattern.message_bytes = 1e6;
  c.comm.cost = CommCostModel{1e-6, 1e9, 0.5};
  CHECK(run(c) == run(c));
}

TEST_CASE("invalid configurations are rejected") {
  auto c = small_config(4, 4, BandwidthCurve::analytic(10e9, 40e9, 2),
                        WorkloadSpec::core_bound(1e-3, 1));
  CHECK_THROWS_AS((void)run(c), ConfigError);
}

}  // TEST_SUITE
