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
#include <limits>
#include <random>
#include <stdexcept>

#include "doctest.h"

#include "desync/config_io.hpp"
#include "desync/model.hpp"

using namespace desync;

TEST_SUITE("model") {

TEST_CASE("analytic curve is linear below saturation and capped above") {
  const auto curve = BandwidthCurve::analytic(10e9, 40e9, 10);
  CHECK(bandwidth_at(curve, 2) == doctest::Approx(20e9));
  CHECK(bandwidth_at(curve, 8) == doctest::Approx(40e9));
  CHECK(curve.is_analytic());
  CHECK_THROWS_AS((void)bandwidth_at(curve, 0), std::domain_error);
  CHECK_THROWS_AS((void)bandwidth_at(curve, 11), std::domain_error);
}

TEST_CASE("table curve reads back integral points") {
  const auto emmy = load_preset("emmy_stream");
  CHECK(bandwidth_at(emmy.curve, 1) == doctest::Approx(13e9));
  CHECK(emmy.cores_per_domain == 10);
  CHECK(emmy.curve.cores() == 10);
}

TEST_CASE("table curve rejects gaps, duplicates and decreasing values") {
  CHECK_THROWS_AS(BandwidthCurve::from_table({{1, 1.0}, {3, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(BandwidthCurve::from_table({{1, 1.0}, {1, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(BandwidthCurve::from_table({{1, 2.0}, {2, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(BandwidthCurve::from_table({{1, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(BandwidthCurve::from_table({}), std::invalid_argument);
  const auto shuffled = BandwidthCurve::from_table({{2, 3.0}, {1, 2.0}});
  CHECK(shuffled.at(1) == 2.0);
  CHECK(shuffled.at(2) == 3.0);
}

TEST_CASE("saturation point") {
  CHECK(saturation_point(BandwidthCurve::analytic(10e9, 40e9, 10)) == 4);
  CHECK(saturation_point(load_preset("emmy_stream_nt").curve) == 7);
  CHECK(saturation_point(load_preset("supermucng_stream").curve) == 13);
  CHECK(saturation_point(load_preset("supermucng_slow_triad").curve) == 20);
}

TEST_CASE("saturation point matches the closed form on analytic curves") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> b1(1e9, 20e9);
  std::uniform_real_distribution<double> ratio(1.0, 30.0);
  for (int i = 0; i < 200; ++i) {
    const double a = b1(rng);
    const double sat = a * ratio(rng);
    const int cores = 32;
    const auto curve = BandwidthCurve::analytic(a, sat, cores);
    const int expect = std::min(cores, static_cast<int>(std::ceil(0.95 * curve.b_max() / a)));
    CHECK(saturation_point(curve) == std::max(1, expect));
  }
}

TEST_CASE("exec time") {
  const auto one = BandwidthCurve::from_table({{1, 10e9}});
  CHECK(exec_time(1e9, 1, one) == doctest::Approx(0.1));
  const auto skx = load_preset("supermucng_stream");
  CHECK(exec_time(50e6, 24, skx.curve) == doctest::Approx(11.5e-3).epsilon(1e-3));
  CHECK(exec_time(1e9, 4, BandwidthCurve::analytic(10e9, 40e9, 4)) == doctest::Approx(0.1));
}

TEST_CASE("predicted velocity") {
  CHECK(predicted_velocity(10e-3, 0.0, 1, 1) == doctest::Approx(100.0));
  CHECK(predicted_velocity(10e-3, 10e-3, 1, 2) == doctest::Approx(100.0));
  CHECK(predicted_velocity(5e-3, 5e-3, 3, 1) / predicted_velocity(5e-3, 5e-3, 1, 1) ==
        doctest::Approx(3.0));
  CHECK_THROWS_AS((void)predicted_velocity(0.0, 0.0, 1, 1), std::domain_error);
  const auto curve = BandwidthCurve::analytic(10e9, 40e9, 8);
  CHECK(predicted_velocity(4, 1e9, curve, 0.0, 1, 1) == doctest::Approx(10.0));
}

TEST_CASE("predicted velocity is linear in d and sigma and falls with T_comm") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> t(1e-4, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double te = t(rng);
    const double tc = t(rng);
    const double base = predicted_velocity(te, tc, 1, 1);
    for (int d = 1; d <= 4; ++d) {
      CHECK(predicted_velocity(te, tc, d, 1) == doctest::Approx(d * base));
      CHECK(predicted_velocity(te, tc, d, 2) == doctest::Approx(2.0 * d * base));
    }
    CHECK(predicted_velocity(te, tc * 1.5, 1, 1) < base);
  }
}

TEST_CASE("code balance") {
  CHECK(chebfd_code_balance(1) == doctest::Approx(340.0 / 146.0));
  CHECK(chebfd_code_balance(1) == doctest::Approx(2.3288).epsilon(1e-4));
  CHECK(chebfd_code_balance(32) == doctest::Approx(88.125 / 146.0));
  CHECK(chebfd_code_balance(std::numeric_limits<double>::infinity()) ==
        doctest::Approx(80.0 / 146.0));
  CHECK(chebfd_code_balance(1e12) == doctest::Approx(80.0 / 146.0));
  CHECK_THROWS_AS((void)chebfd_code_balance(0.5), std::domain_error);
}

TEST_CASE("workload and pattern validation") {
  CHECK_NOTHROW(WorkloadSpec::memory_bound(1.0, 1).validate());
  CHECK_THROWS_AS(WorkloadSpec::memory_bound(0.0, 1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(WorkloadSpec::core_bound(1.0, 0).validate(), std::invalid_argument);
  WorkloadSpec mixed = WorkloadSpec::core_bound(1.0, 1);
  mixed.volume_per_step = 5.0;
  CHECK_THROWS_AS(mixed.validate(), std::invalid_argument);

  CommPattern p;
  CHECK_NOTHROW(p.validate(4));
  p.distances_up = {4};
  CHECK_THROWS_AS(p.validate(4), std::invalid_argument);
  p.distances_up = {1};
  p.sigma = 3;
  CHECK_THROWS_AS(p.validate(4), std::invalid_argument);

  CommCostModel cost;
  cost.membw_charge = 1.5;
  CHECK_THROWS_AS(cost.validate(), std::invalid_argument);
  CHECK(CommCostModel{1e-6, 10e9, 0.0}.transfer_time(1e6) == doctest::Approx(101e-6));
}

}  // TEST_SUITE
