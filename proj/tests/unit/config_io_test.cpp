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

#include <string>

#include "doctest.h"

#include "desync/config_io.hpp"
#include "desync/errors.hpp"

using namespace desync;

namespace {

const std::string kMinimal = R"(machine:
  cores_per_domain: 4
  domains_per_node: 1
  bandwidth_analytic: {b1: 1.0e10, b_sat: 4.0e10}
processes:
  count: 4
  per_domain: 4
workload:
  kind: memory_bound
  volume_per_step: 1.0e9
  steps: 3
)";

std::string error_of(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("config_io") {

TEST_CASE("minimal config fills defaults") {
  const SimConfig c = parse_config(kMinimal);
  CHECK(c.machine.spec.cores_per_domain == 4);
  CHECK(c.processes.threads == 1);
  CHECK(c.workload.steps == 3);
  CHECK(c.comm.wait_mode == WaitMode::kWaitAll);
  CHECK(c.comm.pattern.eager_threshold == 256.0 * 1024.0);
  CHECK(c.noise.silent());
  CHECK(c.inject.empty());
}

TEST_CASE("oversubscription is reported") {
  std::string text = kMinimal;
  text.replace(text.find("  per_domain: 4"), 15, "  per_domain: 4\n  threads: 2");
  CHECK(error_of(text).find("oversubscription") != std::string::npos);
}

TEST_CASE("unknown keys are reported with their line") {
  const std::string msg = error_of(kMinimal + "workload_typo: 3\n");
  CHECK(msg.find("workload_typo") != std::string::npos);
  CHECK(msg.find("line 12") != std::string::npos);
  CHECK(error_of("machine: [").find("line") != std::string::npos);
  CHECK(error_of("processes: {count: 2}\n").find("machine") != std::string::npos);
}

TEST_CASE("shipped configs load") {
  const SimConfig c = load_config(std::string(DESYNC_CONFIG_DIR) + "/idle_wave_memory_bound.yaml");
  CHECK(c.processes.count == 96);
  CHECK(c.machine.spec.cores_per_domain == 24);
  CHECK(c.domain_count() == 4);
  REQUIRE(c.inject.size() == 1);
  CHECK(*c.inject[0].duration_phases == 25.0);
}

TEST_CASE("json echo parses back to an equal config") {
  for (const char* name : {"idle_wave_memory_bound", "ring_asymmetric", "spontaneous_desync", "hybrid_noise"}) {
    SimConfig c = load_config(std::string(DESYNC_CONFIG_DIR) + "/" + name + ".yaml");
    const SimConfig back = parse_config(config_to_json(c));
    // The echo writes the machine inline.
    CHECK(back.machine.preset.empty());
    c.machine.preset.clear();
    CHECK(back == c);
  }
  const SimConfig m = parse_config(kMinimal);
  CHECK(parse_config(config_to_json(m)) == m);
}

TEST_CASE("overrides") {
  const SimConfig c = parse_config(kMinimal, "<test>",
                                   {{"workload.steps", "7"}, {"comm.pattern.down", "[1, 2]"}});
  CHECK(c.workload.steps == 7);
  CHECK(c.comm.pattern.distances_down == std::vector<int>{1, 2});
  CHECK_THROWS_AS((void)parse_config(kMinimal, "<test>", {{"workload.nope", "1"}}), ConfigError);
}

TEST_CASE("presets") {
  const auto names = list_presets();
  CHECK(names.size() >= 7);
  CHECK(std::is_sorted(names.begin(), names.end()));
  CHECK_THROWS_AS((void)load_preset("no_such_machine"), ConfigError);
}

}  // TEST_SUITE
