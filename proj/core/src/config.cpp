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

#include "desync/config.hpp"

#include <stdexcept>
#include <string>

#include "desync/errors.hpp"

namespace desync {

void SimConfig::validate() const {
  const auto& m = machine.spec;
  const auto& p = processes;
  if (m.cores_per_domain < 1) throw ConfigError("machine.cores_per_domain must be >= 1");
  if (m.domains_per_node < 1) throw ConfigError("machine.domains_per_node must be >= 1");
  if (m.curve.cores() != m.cores_per_domain) {
    throw ConfigError("machine bandwidth curve covers " + std::to_string(m.curve.cores()) +
                      " cores but cores_per_domain is " + std::to_string(m.cores_per_domain));
  }
  if (p.count < 1) throw ConfigError("processes.count must be >= 1");
  if (p.threads < 1) throw ConfigError("processes.threads must be >= 1");
  if (p.per_domain < 1) throw ConfigError("processes.per_domain must be >= 1");
  if (p.per_domain * p.threads > m.cores_per_domain) {
    throw ConfigError("oversubscription: processes.per_domain (" + std::to_string(p.per_domain) +
                      ") x processes.threads (" + std::to_string(p.threads) + ") exceeds " +
                      std::to_string(m.cores_per_domain) + " cores per domain");
  }
  if (machine.nodes) {
    if (*machine.nodes < 1) throw ConfigError("machine.nodes must be >= 1");
    const long long total =
        static_cast<long long>(*machine.nodes) * m.domains_per_node * m.cores_per_domain;
    const int domains_needed = domain_count();
    if (static_cast<long long>(p.count) * p.threads > total ||
        domains_needed > *machine.nodes * m.domains_per_node) {
      throw ConfigError("oversubscription: processes.count x processes.threads = " +
                        std::to_string(static_cast<long long>(p.count) * p.threads) +
                        " does not fit " + std::to_string(total) + " cores on " +
                        std::to_string(*machine.nodes) + " node(s)");
    }
  }
  try {
    workload.validate();
    comm.pattern.validate(p.count);
    comm.cost.validate();
    InjectionSchedule check(inject, p.count, workload.steps);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (noise.magnitude < 0.0) throw ConfigError("noise.magnitude must be >= 0");
}

}  // namespace desync
