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

#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "CLI11.hpp"
#include "desync/config_io.hpp"
#include "desync/engine.hpp"
#include "desync/errors.hpp"
#include "desync/model.hpp"
#include "desync/svg.hpp"
#include "desync/trace_io.hpp"
#include "json.hpp"

namespace desync::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ConfigOverride split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("expected key=value, got '" + text + "'");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

struct WrittenFiles {
  fs::path trace;
  fs::path report;
  std::optional<fs::path> svg;
};

WrittenFiles write_outputs(const SimConfig& config, const Trace& trace, const fs::path& dir) {
  fs::create_directories(dir);
  WrittenFiles files;
  const bool csv = config.output.trace_format == TraceFormat::kCsv;
  files.trace = dir / (csv ? "trace.csv" : "trace.jsonl");
  write_trace(trace, config.output.trace_format, files.trace);
  const AnalysisReport report = analyze(trace, analysis_options_for(config));
  files.report = dir / "report.json";
  std::ofstream(files.report, std::ios::binary) << report_to_json(report);
  if (config.output.svg) {
    TimelineOptions opts;
    if (report.steps > 0) opts.wavefront_step = report.steps - 1;
    files.svg = dir / "timeline.svg";
    write_timeline(trace, *files.svg, opts);
  }
  return files;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::vector<std::string>& sets, std::ostream& out) {
  std::vector<ConfigOverride> overrides;
  for (const auto& s : sets) overrides.push_back(split_assignment(s));
  const SimConfig config = load_config(config_path, overrides);
  const Trace trace = run(config);
  const fs::path dir = out_dir.empty() ? fs::path(config.output.dir) : fs::path(out_dir);
  const WrittenFiles files = write_outputs(config, trace, dir);
  out << "makespan " << fmt(trace.makespan()) << " s\n";
  out << "trace    " << files.trace.string() << "\n";
  out << "report   " << files.report.string() << "\n";
  if (files.svg) out << "timeline " << files.svg->string() << "\n";
  return kExitOk;
}

AnalysisOptions options_from_echo(const Trace& trace) {
  if (trace.config_echo.empty()) return {};
  return analysis_options_for(parse_config(trace.config_echo, "config echo"));
}

int cmd_analyze(const std::string& trace_path, const std::string& out_path, std::ostream& out) {
  const Trace trace = read_trace(trace_path);
  const std::string json = report_to_json(analyze(trace, options_from_echo(trace)));
  if (out_path.empty()) {
    out << json;
  } else {
    std::ofstream(out_path, std::ios::binary) << json;
    out << "report   " << out_path << "\n";
  }
  return kExitOk;
}

int cmd_render(const std::string& trace_path, const std::string& out_path,
               std::optional<int> step, const std::string& title, std::ostream& out) {
  const Trace trace = read_trace(trace_path);
  TimelineOptions opts;
  opts.wavefront_step = step;
  opts.title = title;
  const fs::path target =
      out_path.empty() ? fs::path(trace_path).replace_extension(".svg") : fs::path(out_path);
  write_timeline(trace, target, opts);
  out << "timeline " << target.string() << "\n";
  return kExitOk;
}

struct PredictArgs {
  bool exec_time = false;
  bool velocity = false;
  bool nsc = false;
  bool code_balance = false;
  std::optional<double> volume;
  std::optional<int> n;
  std::optional<double> b1;
  std::optional<double> bsat;
  std::optional<int> cores;
  std::string preset;
  std::optional<double> t_exec;
  double t_comm = 0.0;
  int distance = 1;
  int sigma = 1;
  double fraction = kDefaultSaturationFraction;
  std::string nb = "1";
};

BandwidthCurve predict_curve(const PredictArgs& a) {
  if (!a.preset.empty()) return load_preset(a.preset).curve;
  if (!a.b1 || !a.bsat) throw ConfigError("predict: give --preset or both --b1 and --bsat");
  int cores = a.cores.value_or(static_cast<int>(std::ceil(*a.bsat / *a.b1)));
  if (a.n) cores = std::max(cores, *a.n);
  try {
    return BandwidthCurve::analytic(*a.b1, *a.bsat, std::max(cores, 1));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("predict: ") + e.what());
  }
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  if (!a.exec_time && !a.velocity && !a.nsc && !a.code_balance) {
    throw ConfigError("predict: choose --exec-time, --velocity, --nsc or --code-balance");
  }
  try {
    if (a.exec_time || (a.velocity && !a.t_exec)) {
      if (!a.volume || !a.n) throw ConfigError("predict: --V and --n are required");
    }
    std::optional<double> t_exec = a.t_exec;
    if (a.exec_time || (a.velocity && !t_exec)) {
      t_exec = exec_time(*a.volume, *a.n, predict_curve(a));
    }
    if (a.exec_time) out << fmt(*t_exec) << " s\n";
    if (a.velocity) {
      out << fmt(predicted_velocity(*t_exec, a.t_comm, a.distance, a.sigma)) << " ranks/s\n";
    }
    if (a.nsc) out << saturation_point(predict_curve(a), a.fraction) << " cores\n";
    if (a.code_balance) {
      const double nb = a.nb == "inf" ? INFINITY : std::stod(a.nb);
      out << fmt(chebfd_code_balance(nb)) << " byte/flop\n";
    }
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("predict: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("predict: ") + e.what());
  }
  return kExitOk;
}

struct SweepPoint {
  std::vector<ConfigOverride> overrides;
  std::string label;
  SimConfig config;
  std::string error;
  double makespan = 0.0;
  double final_amplitude = 0.0;
};

std::vector<std::string> split_values(const std::string& list) {
  std::vector<std::string> values;
  std::stringstream ss(list);
  for (std::string v; std::getline(ss, v, ',');) {
    if (!v.empty()) values.push_back(v);
  }
  return values;
}

unsigned sweep_threads(std::size_t jobs) {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DESYNC_SIM_THREADS"); env != nullptr && *env != '\0') {
    const int requested = std::atoi(env);
    if (requested >= 1) cap = static_cast<unsigned>(requested);
  }
  return static_cast<unsigned>(std::min<std::size_t>(cap, std::max<std::size_t>(jobs, 1)));
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& vary,
              const std::string& out_dir, std::ostream& out, std::ostream& err) {
  if (vary.empty()) throw ConfigError("sweep: at least one --vary key=v1,v2,... is required");
  std::vector<SweepPoint> points(1);
  for (const auto& spec : vary) {
    const auto [key, list] = split_assignment(spec);
    const auto values = split_values(list);
    if (values.empty()) throw ConfigError("sweep: no values for " + key);
    std::vector<SweepPoint> next;
    for (const auto& p : points) {
      for (const auto& v : values) {
        SweepPoint q = p;
        q.overrides.emplace_back(key, v);
        q.label += (q.label.empty() ? "" : "_") + key + "=" + v;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  for (auto& p : points) p.config = load_config(config_path, p.overrides);

  const fs::path root = out_dir.empty() ? fs::path(points.front().config.output.dir) : fs::path(out_dir);
  std::atomic<std::size_t> next_job{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next_job++; i < points.size(); i = next_job++) {
      SweepPoint& p = points[i];
      try {
        const Trace trace = run(p.config);
        write_outputs(p.config, trace, root / p.label);
        p.makespan = trace.makespan();
        p.final_amplitude = desync_metric(trace, trace.completed_steps() - 1);
      } catch (const std::exception& e) {
        p.error = e.what();
      }
      std::lock_guard lock(log_mutex);
      (p.error.empty() ? out : err) << (p.error.empty() ? "done   " : "failed ") << p.label
                                    << (p.error.empty() ? "" : ": " + p.error) << "\n";
    }
  };
  std::vector<std::thread> pool;
  const unsigned threads = sweep_threads(points.size());
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  bool failed = false;
  for (const auto& p : points) {
    nlohmann::ordered_json entry{{"dir", p.label}};
    for (const auto& [k, v] : p.overrides) entry["overrides"][k] = v;
    if (p.error.empty()) {
      entry["makespan_s"] = p.makespan;
      entry["final_amplitude_s"] = p.final_amplitude;
    } else {
      entry["error"] = p.error;
      failed = true;
    }
    summary.push_back(entry);
  }
  fs::create_directories(root);
  std::ofstream(root / "sweep.json", std::ios::binary) << summary.dump(2) << "\n";
  out << "summary  " << (root / "sweep.json").string() << "\n";
  return failed ? kExitSimulationError : kExitOk;
}

}  // namespace

AnalysisOptions analysis_options_for(const SimConfig& config) {
  AnalysisOptions opts;
  if (config.inject.size() == 1) opts.injection = config.inject.front();
  opts.edges.periodic = config.comm.pattern.boundary == Boundary::kPeriodic;
  int widest = 1;
  for (int d : config.comm.pattern.distances_up) widest = std::max(widest, d);
  for (int d : config.comm.pattern.distances_down) widest = std::max(widest, d);
  opts.edges.max_gap = widest - 1;
  return opts;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete-event simulator of bulk-synchronous programs with memory contention",
               "desync-sim"};
  app.require_subcommand(1);

  std::string config_path, trace_path, out_path;
  std::vector<std::string> sets, vary;
  std::optional<int> wavefront_step;
  std::string title;
  PredictArgs pa;

  auto* run_cmd = app.add_subcommand("run", "simulate a config, write trace, report and SVG");
  run_cmd->add_option("config", config_path, "experiment file (YAML)")->required();
  run_cmd->add_option("-o,--out", out_path, "output directory (default: output.dir)");
  run_cmd->add_option("--set", sets, "override a config key, e.g. --set workload.steps=100");

  auto* analyze_cmd = app.add_subcommand("analyze", "recompute the analysis report of a trace");
  analyze_cmd->add_option("trace", trace_path, "trace file (JSONL or CSV)")->required();
  analyze_cmd->add_option("-o,--out", out_path, "report file (default: stdout)");

  auto* render_cmd = app.add_subcommand("render", "render a trace as an SVG timeline");
  render_cmd->add_option("trace", trace_path, "trace file (JSONL or CSV)")->required();
  render_cmd->add_option("-o,--out", out_path, "SVG file (default: next to the trace)");
  render_cmd->add_option("--wavefront-step", wavefront_step, "overlay this step's wavefront");
  render_cmd->add_option("--title", title, "title text");

  auto* predict_cmd = app.add_subcommand("predict", "evaluate the analytic models");
  predict_cmd->add_flag("--exec-time", pa.exec_time, "n*V/b(n) in seconds");
  predict_cmd->add_flag("--velocity", pa.velocity, "idle wave velocity in ranks/s");
  predict_cmd->add_flag("--nsc", pa.nsc, "saturation point in cores");
  predict_cmd->add_flag("--code-balance", pa.code_balance, "filter kernel code balance");
  predict_cmd->add_option("--V", pa.volume, "bytes per process and step");
  predict_cmd->add_option("--n", pa.n, "active cores");
  predict_cmd->add_option("--b1", pa.b1, "single-core bandwidth, bytes/s");
  predict_cmd->add_option("--bsat", pa.bsat, "saturated bandwidth, bytes/s");
  predict_cmd->add_option("--cores", pa.cores, "cores per domain of the analytic curve");
  predict_cmd->add_option("--preset", pa.preset, "machine preset instead of --b1/--bsat");
  predict_cmd->add_option("--t-exec", pa.t_exec, "execution phase, seconds");
  predict_cmd->add_option("--t-comm", pa.t_comm, "communication phase, seconds");
  predict_cmd->add_option("--d", pa.distance, "communication distance");
  predict_cmd->add_option("--sigma", pa.sigma, "correction factor (1 or 2)");
  predict_cmd->add_option("--fraction", pa.fraction, "saturation fraction");
  predict_cmd->add_option("--nb", pa.nb, "block size (number or inf)");

  auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep, one directory per point");
  sweep_cmd->add_option("config", config_path, "experiment file (YAML)")->required();
  sweep_cmd->add_option("--vary", vary, "key=v1,v2,...; repeat for a cartesian product")
      ->required();
  sweep_cmd->add_option("-o,--out", out_path, "root output directory (default: output.dir)");

  // CLI11 consumes its argument vector from the back; args[0] is the program.
  std::vector<std::string> reversed;
  for (std::size_t i = args.size(); i-- > 1;) reversed.push_back(args[i]);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*run_cmd) return cmd_run(config_path, out_path, sets, out);
    if (*analyze_cmd) return cmd_analyze(trace_path, out_path, out);
    if (*render_cmd) return cmd_render(trace_path, out_path, wavefront_step, title, out);
    if (*predict_cmd) return cmd_predict(pa, out);
    if (*sweep_cmd) return cmd_sweep(config_path, vary, out_path, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const TraceError& e) {
    err << "trace error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const SimulationError& e) {
    err << "simulation error: " << e.what() << "\n";
    return kExitSimulationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSimulationError;
  }
  err << app.help();
  return kExitConfigError;
}

}  // namespace desync::cli
