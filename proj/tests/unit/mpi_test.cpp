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

#include "desync/mpi.hpp"

using namespace desync;

namespace {

CommPattern ring(std::vector<int> up, std::vector<int> down, Boundary boundary) {
  CommPattern p;
  p.distances_up = std::move(up);
  p.distances_down = std::move(down);
  p.boundary = boundary;
  p.message_bytes = 8.0;
  return p;
}

double completion_of(const MessageMatcher::PostResult& r, std::uint64_t id) {
  for (const auto& c : r.completions) {
    if (c.request == id) return c.time;
  }
  return -1.0;
}

}  // namespace

TEST_SUITE("mpi") {

TEST_CASE("partners with open and periodic boundaries") {
  const auto open = ring({1}, {1}, Boundary::kOpen);
  CHECK(exchange_partners(0, 40, open) == std::vector<int>{1});
  CHECK(exchange_partners(39, 40, open) == std::vector<int>{38});
  CHECK(exchange_partners(7, 40, open) == std::vector<int>{6, 8});
  const auto periodic = ring({1}, {1}, Boundary::kPeriodic);
  CHECK(exchange_partners(0, 40, periodic) == std::vector<int>{1, 39});
}

TEST_CASE("up offsets send forward and receive from behind") {
  const auto phases = exchange_phases(5, 40, ring({1}, {1, 2}, Boundary::kOpen),
                                      WaitMode::kSplit);
  REQUIRE(phases.size() == 3);
  CHECK(phases[0].send_to == std::vector<int>{6});
  CHECK(phases[0].recv_from == std::vector<int>{4});
  CHECK(phases[1].send_to == std::vector<int>{4});
  CHECK(phases[1].recv_from == std::vector<int>{6});
  CHECK(phases[2].send_to == std::vector<int>{3});
  CHECK(phases[2].recv_from == std::vector<int>{7});
  const auto all = exchange_phases(5, 40, ring({1}, {1, 2}, Boundary::kOpen));
  REQUIRE(all.size() == 1);
  CHECK(all[0].send_to == std::vector<int>{6, 4, 3});
}

TEST_CASE("protocol threshold") {
  CHECK(select_protocol(262143.0, 262144.0) == Protocol::kEager);
  CHECK(select_protocol(262144.0, 262144.0) == Protocol::kRendezvous);
  auto p = ring({1}, {}, Boundary::kOpen);
  p.message_bytes = 1e6;
  const auto reqs = post_exchange(3, 0, 10, p, 2.0);
  REQUIRE(reqs.size() == 2);
  CHECK(reqs[0].protocol == Protocol::kRendezvous);
  CHECK(reqs[0].posted_at == 2.0);
}

TEST_CASE("eager receive completes after the Hockney transfer time") {
  MessageMatcher m(CommCostModel{1e-6, 10e9, 0.0}, 2e6);
  const auto s = m.post_send(0, 1, 0, 1e6, 0.0);
  CHECK(completion_of(s, s.id) == doctest::Approx(101e-6));
  REQUIRE(s.transfer.has_value());
  const auto r = m.post_recv(0, 1, 0, 1e6, 0.0);
  CHECK(completion_of(r, r.id) == doctest::Approx(101e-6));
  // A late receive completes at its own post time.
  const auto s2 = m.post_send(0, 1, 1, 1e6, 1.0);
  (void)s2;
  const auto r2 = m.post_recv(0, 1, 1, 1e6, 2.0);
  CHECK(completion_of(r2, r2.id) == 2.0);
}

TEST_CASE("rendezvous sender waits for a late receiver") {
  MessageMatcher m(CommCostModel{1e-6, 10e9, 0.0}, 256.0 * 1024.0);
  const auto s = m.post_send(0, 1, 0, 1e6, 0.0);
  CHECK(s.completions.empty());
  const auto r = m.post_recv(0, 1, 0, 1e6, 5e-3);
  CHECK(completion_of(r, s.id) == doctest::Approx(5e-3 + 101e-6));
  CHECK(completion_of(r, r.id) == doctest::Approx(5e-3 + 101e-6));
  REQUIRE(r.transfer.has_value());
  CHECK(r.transfer->start == 5e-3);
}

TEST_CASE("matching is FIFO per pair") {
  MessageMatcher m(CommCostModel{0.0, 1e10, 0.0}, 256.0 * 1024.0);
  m.set_retain_history(true);
  const auto a = m.post_send(2, 3, 0, 8, 0.0);
  const auto b = m.post_send(2, 3, 1, 8, 0.5);
  const auto r1 = m.post_recv(2, 3, 0, 8, 1.0);
  const auto r2 = m.post_recv(2, 3, 1, 8, 1.0);
  CHECK(m.request(r1.id).peer == a.id);
  CHECK(m.request(r2.id).peer == b.id);
  CHECK(completion_of(r1, r1.id) == 1.0);
}

TEST_CASE("zero bytes and zero latency complete at the later post") {
  MessageMatcher m(CommCostModel{0.0, 1e10, 0.0}, 256.0 * 1024.0);
  const auto s = m.post_send(0, 1, 0, 0.0, 3.0);
  CHECK_FALSE(s.transfer.has_value());
  const auto r = m.post_recv(0, 1, 0, 0.0, 1.0);
  CHECK(completion_of(r, r.id) == 3.0);
}

TEST_CASE("incomplete lists unmatched requests") {
  MessageMatcher m(CommCostModel{}, 256.0 * 1024.0);
  const auto r = m.post_recv(4, 5, 0, 8, 0.0);
  const auto open = m.incomplete();
  REQUIRE(open.size() == 1);
  CHECK(open[0].id == r.id);
  CHECK(open[0].owner() == 5);
  CHECK_THROWS_AS((void)m.request(999), std::out_of_range);
}

}  // TEST_SUITE
