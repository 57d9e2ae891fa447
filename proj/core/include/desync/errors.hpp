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

#include <stdexcept>
#include <string>

namespace desync {

/// Invalid or unparsable experiment description.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure while simulating a valid configuration.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No runnable event left while some ranks are still blocked.
class DeadlockError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

/// Malformed trace input, or a query the trace cannot answer.
class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace desync
