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

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "desync/config.hpp"
#include "desync/model.hpp"

namespace desync {

/// Dotted-key override such as {"processes.per_domain", "4"}; the value is
/// parsed as a YAML scalar or flow sequence.
using ConfigOverride = std::pair<std::string, std::string>;

/// Parses a YAML experiment description, fills defaults and validates it.
/// Syntax errors and unknown keys throw ConfigError with the line number;
/// semantic errors name the offending field.
[[nodiscard]] SimConfig parse_config(const std::string& text,
                                     const std::string& source = "<config>",
                                     const std::vector<ConfigOverride>& overrides = {});

[[nodiscard]] SimConfig load_config(const std::filesystem::path& path,
                                    const std::vector<ConfigOverride>& overrides = {});

/// Compact JSON document that parse_config() turns back into an equal
/// config. The machine is always written inline.
[[nodiscard]] std::string config_to_json(const SimConfig& config);

/// Directories searched for `<name>.yaml` presets, in order:
/// $DESYNC_SIM_PRESET_DIR, the source tree, the install prefix.
[[nodiscard]] std::vector<std::filesystem::path> preset_search_path();

/// Throws ConfigError if no preset of that name exists or it is malformed.
[[nodiscard]] MachinePreset load_preset(const std::string& name);

/// Names of all presets found on the search path, sorted.
[[nodiscard]] std::vector<std::string> list_presets();

}  // namespace desync
