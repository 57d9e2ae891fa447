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

#include "desync/config_io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "json.hpp"

#include "desync/errors.hpp"

namespace desync {

namespace {

using nlohmann::ordered_json;

std::string where(const YAML::Node& node, const std::string& key) {
  const auto mark = node.Mark();
  if (mark.is_null()) return key;
  return key + " (line " + std::to_string(mark.line + 1) + ")";
}

void require_map(const YAML::Node& node, const std::string& key) {
  if (!node.IsMap()) throw ConfigError(where(node, key) + ": expected a mapping");
}

void reject_unknown(const YAML::Node& node, const std::string& section,
                    std::initializer_list<std::string_view> allowed) {
  require_map(node, section);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      const std::string full = section.empty() ? key : section + "." + key;
      throw ConfigError(where(kv.first, full) + ": unknown key");
    }
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw ConfigError(where(node, key) + ": expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where(node, key) + ": cannot convert '" + node.Scalar() + "'");
  }
}

template <typename T>
T get(const YAML::Node& parent, const char* name, const std::string& section, T fallback) {
  const YAML::Node node = parent[name];
  if (!node) return fallback;
  return scalar<T>(node, section + "." + name);
}

int get_int(const YAML::Node& parent, const char* name, const std::string& section,
            int fallback) {
  const YAML::Node node = parent[name];
  if (!node) return fallback;
  const double v = scalar<double>(node, section + "." + name);
  if (v != static_cast<double>(static_cast<long long>(v))) {
    throw ConfigError(where(node, section + "." + name) + ": expected an integer");
  }
  return static_cast<int>(v);
}

std::vector<int> int_list(const YAML::Node& node, const std::string& key) {
  std::vector<int> out;
  if (node.IsScalar()) {
    out.push_back(scalar<int>(node, key));
    return out;
  }
  if (!node.IsSequence()) throw ConfigError(where(node, key) + ": expected a list of integers");
  for (const auto& item : node) out.push_back(scalar<int>(item, key));
  return out;
}

MachinePreset parse_machine_spec(const YAML::Node& node, const std::string& section) {
  MachinePreset spec;
  spec.name = get<std::string>(node, "name", section, "inline");
  spec.cores_per_domain = get_int(node, "cores_per_domain", section, 0);
  spec.domains_per_node = get_int(node, "domains_per_node", section, 2);
  const YAML::Node table = node["bandwidth_table"];
  const YAML::Node analytic = node["bandwidth_analytic"];
  if (static_cast<bool>(table) == static_cast<bool>(analytic)) {
    throw ConfigError(where(node, section) +
                      ": set exactly one of bandwidth_table / bandwidth_analytic");
  }
  try {
    if (table) {
      if (!table.IsSequence()) {
        throw ConfigError(where(table, section + ".bandwidth_table") + ": expected a list");
      }
      std::vector<std::pair<int, double>> points;
      for (const auto& row : table) {
        if (!row.IsSequence() || row.size() != 2) {
          throw ConfigError(where(row, section + ".bandwidth_table") +
                            ": entries must be [n, bytes_per_second]");
        }
        points.emplace_back(scalar<int>(row[0], section + ".bandwidth_table"),
                            scalar<double>(row[1], section + ".bandwidth_table"));
      }
      spec.curve = BandwidthCurve::from_table(std::move(points));
      if (spec.cores_per_domain == 0) spec.cores_per_domain = spec.curve.cores();
    } else {
      reject_unknown(analytic, section + ".bandwidth_analytic", {"b1", "b_sat"});
      if (spec.cores_per_domain < 1) {
        throw ConfigError(where(node, section) +
                          ": bandwidth_analytic needs cores_per_domain >= 1");
      }
      spec.curve = BandwidthCurve::analytic(
          get<double>(analytic, "b1", section + ".bandwidth_analytic", 0.0),
          get<double>(analytic, "b_sat", section + ".bandwidth_analytic", 0.0),
          spec.cores_per_domain);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where(node, section) + ": " + e.what());
  }
  return spec;
}

YAML::Node load_yaml(const std::string& text, const std::string& source) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ": parse error at line " + std::to_string(e.mark.line + 1) +
                      ", column " + std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
}

void apply_override(YAML::Node& root, const ConfigOverride& ov, const std::string& source) {
  const auto& [key, value] = ov;
  if (key.empty()) throw ConfigError("empty override key");
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
  YAML::Node value_node = load_yaml(value, source + " override " + key);
  // yaml-cpp nodes are handles; walk with reset() instead of assignment.
  YAML::Node cursor;
  cursor.reset(root);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = cursor[parts[i]];
    if (!next || next.IsNull()) {
      cursor[parts[i]] = YAML::Node(YAML::NodeType::Map);
      next = cursor[parts[i]];
    }
    if (!next.IsMap()) throw ConfigError("override " + key + ": '" + parts[i] + "' is not a section");
    cursor.reset(next);
  }
  cursor[parts.back()] = value_node;
}

SimConfig from_yaml(const YAML::Node& root, const std::string& source) {
  if (!root || root.IsNull()) throw ConfigError(source + ": empty configuration");
  reject_unknown(root, "", {"machine", "processes", "workload", "comm", "inject", "noise", "output"});
  SimConfig cfg;

  const YAML::Node machine = root["machine"];
  if (!machine) throw ConfigError(source + ": missing section 'machine'");
  reject_unknown(machine, "machine",
                 {"preset", "name", "cores_per_domain", "domains_per_node", "bandwidth_table",
                  "bandwidth_analytic", "nodes"});
  if (machine["preset"]) {
    for (const char* inline_key :
         {"name", "cores_per_domain", "domains_per_node", "bandwidth_table", "bandwidth_analytic"}) {
      if (machine[inline_key]) {
        throw ConfigError(where(machine[inline_key], std::string("machine.") + inline_key) +
                          ": not allowed together with machine.preset");
      }
    }
    cfg.machine.preset = scalar<std::string>(machine["preset"], "machine.preset");
    cfg.machine.spec = load_preset(cfg.machine.preset);
  } else {
    cfg.machine.spec = parse_machine_spec(machine, "machine");
  }
  if (machine["nodes"]) cfg.machine.nodes = scalar<int>(machine["nodes"], "machine.nodes");

  const YAML::Node procs = root["processes"];
  if (!procs) throw ConfigError(source + ": missing section 'processes'");
  reject_unknown(procs, "processes", {"count", "threads", "per_domain"});
  cfg.processes.threads = get_int(procs, "threads", "processes", 1);
  if (cfg.processes.threads < 1) throw ConfigError("processes.threads must be >= 1");
  cfg.processes.per_domain = get_int(procs, "per_domain", "processes",
                                     std::max(1, cfg.machine.spec.cores_per_domain /
                                                     cfg.processes.threads));
  if (procs["count"]) {
    cfg.processes.count = get_int(procs, "count", "processes", 1);
  } else if (cfg.machine.nodes) {
    cfg.processes.count =
        *cfg.machine.nodes * cfg.machine.spec.domains_per_node * cfg.processes.per_domain;
  } else {
    throw ConfigError(where(procs, "processes") + ": set processes.count or machine.nodes");
  }

  const YAML::Node work = root["workload"];
  if (!work) throw ConfigError(source + ": missing section 'workload'");
  reject_unknown(work, "workload", {"kind", "volume_per_step", "duration_per_step", "steps"});
  const auto kind = get<std::string>(work, "kind", "workload", "memory_bound");
  if (kind == "memory_bound") {
    cfg.workload.kind = WorkloadKind::kMemoryBound;
  } else if (kind == "core_bound") {
    cfg.workload.kind = WorkloadKind::kCoreBound;
  } else {
    throw ConfigError(where(work["kind"], "workload.kind") +
                      ": expected memory_bound or core_bound, got '" + kind + "'");
  }
  cfg.workload.volume_per_step = get<double>(work, "volume_per_step", "workload", 0.0);
  cfg.workload.duration_per_step = get<double>(work, "duration_per_step", "workload", 0.0);
  cfg.workload.steps = get_int(work, "steps", "workload", 1);

  if (const YAML::Node comm = root["comm"]) {
    reject_unknown(comm, "comm",
                   {"pattern", "message_bytes", "eager_threshold_bytes", "sigma", "wait_mode",
                    "cost", "membw_charge"});
    auto& pat = cfg.comm.pattern;
    if (const YAML::Node pattern = comm["pattern"]) {
      reject_unknown(pattern, "comm.pattern", {"up", "down", "boundary"});
      if (pattern["up"]) pat.distances_up = int_list(pattern["up"], "comm.pattern.up");
      if (pattern["down"]) pat.distances_down = int_list(pattern["down"], "comm.pattern.down");
      const auto boundary = get<std::string>(pattern, "boundary", "comm.pattern", "periodic");
      if (boundary == "periodic") {
        pat.boundary = Boundary::kPeriodic;
      } else if (boundary == "open") {
        pat.boundary = Boundary::kOpen;
      } else {
        throw ConfigError(where(pattern["boundary"], "comm.pattern.boundary") +
                          ": expected open or periodic");
      }
    }
    pat.message_bytes = get<double>(comm, "message_bytes", "comm", pat.message_bytes);
    pat.eager_threshold =
        get<double>(comm, "eager_threshold_bytes", "comm", pat.eager_threshold);
    pat.sigma = get_int(comm, "sigma", "comm", pat.sigma);
    const auto mode = get<std::string>(comm, "wait_mode", "comm", "waitall");
    if (mode == "waitall") {
      cfg.comm.wait_mode = WaitMode::kWaitAll;
    } else if (mode == "split") {
      cfg.comm.wait_mode = WaitMode::kSplit;
    } else {
      throw ConfigError(where(comm["wait_mode"], "comm.wait_mode") +
                        ": expected waitall or split");
    }
    if (const YAML::Node cost = comm["cost"]) {
      reject_unknown(cost, "comm.cost", {"latency", "bandwidth"});
      cfg.comm.cost.latency = get<double>(cost, "latency", "comm.cost", cfg.comm.cost.latency);
      cfg.comm.cost.bandwidth =
          get<double>(cost, "bandwidth", "comm.cost", cfg.comm.cost.bandwidth);
    }
    cfg.comm.cost.membw_charge =
        get<double>(comm, "membw_charge", "comm", cfg.comm.cost.membw_charge);
  }

  if (const YAML::Node inject = root["inject"]) {
    if (!inject.IsSequence()) throw ConfigError(where(inject, "inject") + ": expected a list");
    for (const auto& item : inject) {
      reject_unknown(item, "inject[]", {"rank", "step", "duration_seconds", "duration_phases"});
      Injection inj;
      inj.rank = get_int(item, "rank", "inject[]", -1);
      inj.step = get_int(item, "step", "inject[]", 0);
      if (item["duration_seconds"]) {
        inj.duration_seconds = scalar<double>(item["duration_seconds"], "inject[].duration_seconds");
      }
      if (item["duration_phases"]) {
        inj.duration_phases = scalar<double>(item["duration_phases"], "inject[].duration_phases");
      }
      cfg.inject.push_back(inj);
    }
  }

  if (const YAML::Node noise = root["noise"]) {
    reject_unknown(noise, "noise", {"kind", "magnitude", "seed"});
    const auto kind_name = get<std::string>(noise, "kind", "noise", "lognormal");
    if (kind_name == "off") {
      cfg.noise.kind = NoiseKind::kOff;
    } else if (kind_name == "lognormal" || kind_name == "lognormal_multiplicative") {
      cfg.noise.kind = NoiseKind::kLognormalMultiplicative;
    } else if (kind_name == "exponential" || kind_name == "exponential_additive") {
      cfg.noise.kind = NoiseKind::kExponentialAdditive;
    } else {
      throw ConfigError(where(noise["kind"], "noise.kind") +
                        ": expected off, lognormal or exponential");
    }
    cfg.noise.magnitude = get<double>(noise, "magnitude", "noise", 0.0);
    cfg.noise.seed = get<std::uint64_t>(noise, "seed", "noise", 0);
  }

  if (const YAML::Node out = root["output"]) {
    reject_unknown(out, "output", {"dir", "trace_format", "svg"});
    cfg.output.dir = get<std::string>(out, "dir", "output", cfg.output.dir);
    const auto fmt = get<std::string>(out, "trace_format", "output", "jsonl");
    if (fmt == "jsonl") {
      cfg.output.trace_format = TraceFormat::kJsonl;
    } else if (fmt == "csv") {
      cfg.output.trace_format = TraceFormat::kCsv;
    } else {
      throw ConfigError(where(out["trace_format"], "output.trace_format") +
                        ": expected jsonl or csv");
    }
    cfg.output.svg = get<bool>(out, "svg", "output", cfg.output.svg);
  }

  cfg.validate();
  return cfg;
}

}  // namespace

SimConfig parse_config(const std::string& text, const std::string& source,
                       const std::vector<ConfigOverride>& overrides) {
  YAML::Node root = load_yaml(text, source);
  for (const auto& ov : overrides) apply_override(root, ov, source);
  try {
    return from_yaml(root, source);
  } catch (const YAML::Exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

SimConfig load_config(const std::filesystem::path& path,
                      const std::vector<ConfigOverride>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string(), overrides);
}

std::string config_to_json(const SimConfig& cfg) {
  ordered_json j;
  ordered_json machine;
  machine["name"] = cfg.machine.spec.name;
  machine["cores_per_domain"] = cfg.machine.spec.cores_per_domain;
  machine["domains_per_node"] = cfg.machine.spec.domains_per_node;
  if (auto params = cfg.machine.spec.curve.analytic_params()) {
    machine["bandwidth_analytic"] = {{"b1", params->first}, {"b_sat", params->second}};
  } else {
    ordered_json table = ordered_json::array();
    for (const auto& [n, b] : cfg.machine.spec.curve.table()) table.push_back({n, b});
    machine["bandwidth_table"] = table;
  }
  if (cfg.machine.nodes) machine["nodes"] = *cfg.machine.nodes;
  j["machine"] = machine;
  j["processes"] = {{"count", cfg.processes.count},
                    {"threads", cfg.processes.threads},
                    {"per_domain", cfg.processes.per_domain}};
  ordered_json work;
  const bool mem = cfg.workload.kind == WorkloadKind::kMemoryBound;
  work["kind"] = mem ? "memory_bound" : "core_bound";
  if (mem) {
    work["volume_per_step"] = cfg.workload.volume_per_step;
  } else {
    work["duration_per_step"] = cfg.workload.duration_per_step;
  }
  work["steps"] = cfg.workload.steps;
  j["workload"] = work;
  const auto& pat = cfg.comm.pattern;
  j["comm"] = {
      {"pattern",
       {{"up", pat.distances_up},
        {"down", pat.distances_down},
        {"boundary", pat.boundary == Boundary::kPeriodic ? "periodic" : "open"}}},
      {"message_bytes", pat.message_bytes},
      {"eager_threshold_bytes", pat.eager_threshold},
      {"sigma", pat.sigma},
      {"wait_mode", cfg.comm.wait_mode == WaitMode::kSplit ? "split" : "waitall"},
      {"cost", {{"latency", cfg.comm.cost.latency}, {"bandwidth", cfg.comm.cost.bandwidth}}},
      {"membw_charge", cfg.comm.cost.membw_charge}};
  ordered_json inject = ordered_json::array();
  for (const auto& inj : cfg.inject) {
    ordered_json e{{"rank", inj.rank}, {"step", inj.step}};
    if (inj.duration_seconds) e["duration_seconds"] = *inj.duration_seconds;
    if (inj.duration_phases) e["duration_phases"] = *inj.duration_phases;
    inject.push_back(e);
  }
  j["inject"] = inject;
  const char* noise_kind = "off";
  if (cfg.noise.kind == NoiseKind::kLognormalMultiplicative) noise_kind = "lognormal";
  if (cfg.noise.kind == NoiseKind::kExponentialAdditive) noise_kind = "exponential";
  j["noise"] = {{"kind", noise_kind}, {"magnitude", cfg.noise.magnitude}, {"seed", cfg.noise.seed}};
  j["output"] = {{"dir", cfg.output.dir},
                 {"trace_format", cfg.output.trace_format == TraceFormat::kCsv ? "csv" : "jsonl"},
                 {"svg", cfg.output.svg}};
  return j.dump();
}

std::vector<std::filesystem::path> preset_search_path() {
  std::vector<std::filesystem::path> dirs;
  if (const char* env = std::getenv("DESYNC_SIM_PRESET_DIR"); env != nullptr && *env != '\0') {
    dirs.emplace_back(env);
  }
#ifdef DESYNC_PRESET_SOURCE_DIR
  dirs.emplace_back(DESYNC_PRESET_SOURCE_DIR);
#endif
#ifdef DESYNC_PRESET_INSTALL_DIR
  dirs.emplace_back(DESYNC_PRESET_INSTALL_DIR);
#endif
  return dirs;
}

MachinePreset load_preset(const std::string& name) {
  if (name.empty() || name.find('/') != std::string::npos || name.find('\\') != std::string::npos) {
    throw ConfigError("invalid preset name '" + name + "'");
  }
  for (const auto& dir : preset_search_path()) {
    const auto file = dir / (name + ".yaml");
    if (!std::filesystem::exists(file)) continue;
    std::ifstream in(file);
    std::stringstream buf;
    buf << in.rdbuf();
    const YAML::Node root = load_yaml(buf.str(), file.string());
    reject_unknown(root, "preset " + name,
                   {"name", "cores_per_domain", "domains_per_node", "bandwidth_table",
                    "bandwidth_analytic"});
    MachinePreset preset = parse_machine_spec(root, "preset " + name);
    if (preset.curve.cores() != preset.cores_per_domain) {
      throw ConfigError(file.string() + ": bandwidth_table must cover cores_per_domain entries");
    }
    return preset;
  }
  throw ConfigError("unknown machine preset '" + name + "'");
}

std::vector<std::string> list_presets() {
  std::set<std::string> names;
  for (const auto& dir : preset_search_path()) {
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
      if (entry.path().extension() == ".yaml") names.insert(entry.path().stem().string());
    }
  }
  return {names.begin(), names.end()};
}

}  // namespace desync
