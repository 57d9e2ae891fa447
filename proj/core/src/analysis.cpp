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

#include "desync/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "desync/errors.hpp"

namespace desync {

SlopeFit fit_line(std::span<const double> times, std::span<const double> ranks) {
  if (times.size() != ranks.size() || times.size() < 2) {
    throw std::invalid_argument("fit_line needs at least two (time, rank) pairs");
  }
  const double n = static_cast<double>(times.size());
  double mt = 0.0, mr = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    mt += times[i];
    mr += ranks[i];
  }
  mt /= n;
  mr /= n;
  double stt = 0.0, srr = 0.0, str = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double dt = times[i] - mt;
    const double dr = ranks[i] - mr;
    stt += dt * dt;
    srr += dr * dr;
    str += dt * dr;
  }
  SlopeFit fit;
  fit.points = static_cast<int>(times.size());
  fit.first_rank = static_cast<int>(std::lround(ranks.front()));
  fit.last_rank = static_cast<int>(std::lround(ranks.back()));
  if (stt == 0.0) {
    fit.slope = std::numeric_limits<double>::infinity();
    fit.r = 0.0;
    return fit;
  }
  fit.slope = str / stt;
  fit.r = srr == 0.0 ? 0.0 : std::clamp(str / std::sqrt(stt * srr), -1.0, 1.0);
  return fit;
}

WavefrontProfile wavefront(const Trace& trace, int step) {
  WavefrontProfile profile;
  profile.step = step;
  profile.times.resize(static_cast<std::size_t>(trace.process_count()));
  for (int r = 0; r < trace.process_count(); ++r) {
    const auto& lane = trace.ranks[static_cast<std::size_t>(r)];
    double end = -1.0;
    for (const auto& iv : lane) {
      if (iv.step == step && iv.kind == IntervalKind::kCompute) end = iv.end;
      if (iv.step > step) break;
    }
    if (end < 0.0) {
      throw TraceError("step " + std::to_string(step) + " not completed on rank " +
                       std::to_string(r));
    }
    profile.times[static_cast<std::size_t>(r)] = end;
  }
  if (!profile.times.empty()) {
    const auto [lo, hi] = std::minmax_element(profile.times.begin(), profile.times.end());
    profile.amplitude = *hi - *lo;
  }
  return profile;
}

double desync_metric(const Trace& trace, int step) { return wavefront(trace, step).amplitude; }

std::vector<SlopeFit> fit_slopes(const WavefrontProfile& profile,
                                 std::vector<std::string>* warnings) {
  const auto& t = profile.times;
  const int p = static_cast<int>(t.size());
  if (p < 3) throw std::invalid_argument("fit_slopes needs at least 3 ranks");

  double scale = 0.0;
  for (double x : t) scale = std::max(scale, std::abs(x));
  const double eps = 1e-10 * std::max(scale, 1.0);
  std::vector<int> sign(static_cast<std::size_t>(p - 1));
  for (int i = 0; i + 1 < p; ++i) {
    const double d = t[static_cast<std::size_t>(i + 1)] - t[static_cast<std::size_t>(i)];
    sign[static_cast<std::size_t>(i)] = d > eps ? 1 : (d < -eps ? -1 : 0);
  }

  // Three or more ranks finishing at the same instant form a synchronized
  // plateau; it splits ramps but is not fitted.
  std::vector<bool> plateau(sign.size(), false);
  for (std::size_t i = 0; i < sign.size();) {
    std::size_t j = i;
    while (j < sign.size() && sign[j] == 0) ++j;
    if (j - i >= 2) std::fill(plateau.begin() + static_cast<std::ptrdiff_t>(i),
                              plateau.begin() + static_cast<std::ptrdiff_t>(j), true);
    i = j == i ? i + 1 : j;
  }

  std::vector<std::pair<int, int>> segments;
  int start = -1;
  int current = 0;
  for (int i = 0; i + 1 < p; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (plateau[k]) {
      if (start >= 0) segments.emplace_back(start, i);
      start = -1;
      current = 0;
      continue;
    }
    if (start < 0) start = i;
    const int s = sign[k];
    if (s == 0 || s == current) continue;
    if (current == 0) {
      current = s;
      continue;
    }
    const bool blip = i + 2 < p && !plateau[k + 1] && sign[k + 1] == current;
    if (blip) continue;
    segments.emplace_back(start, i);
    start = i;
    current = s;
  }
  if (start >= 0) segments.emplace_back(start, p - 1);

  std::vector<SlopeFit> fits;
  for (const auto& [a, b] : segments) {
    const int len = b - a + 1;
    if (len < 3) {
      if (warnings) {
        warnings->push_back("dropped wavefront segment of " + std::to_string(len) +
                            " ranks at " + std::to_string(a) + ".." + std::to_string(b));
      }
      continue;
    }
    std::vector<double> times(t.begin() + a, t.begin() + b + 1);
    std::vector<double> ranks;
    ranks.reserve(static_cast<std::size_t>(len));
    for (int r = a; r <= b; ++r) ranks.push_back(r);
    fits.push_back(fit_line(times, ranks));
  }
  return fits;
}

namespace {

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  double m = *mid;
  if (values.size() % 2 == 0) m = 0.5 * (m + *std::max_element(values.begin(), mid));
  return m;
}

struct Episode {
  double leading = 0.0;
  double trailing = 0.0;
};

/// First run of consecutive-step attributable waits at or after `step`.
std::optional<Episode> first_episode(const std::vector<Interval>& lane, int step,
                                     double threshold) {
  std::optional<Episode> ep;
  int last_step = -1;
  for (const auto& iv : lane) {
    if (iv.kind != IntervalKind::kWait || iv.step < step) continue;
    const bool hit = iv.duration() > threshold;
    if (!ep) {
      if (hit) {
        ep = Episode{iv.start, iv.end};
        last_step = iv.step;
      }
      continue;
    }
    if (!hit || iv.step != last_step + 1) break;
    ep->trailing = iv.end;
    last_step = iv.step;
  }
  return ep;
}

void fit_branch(EdgeBranch& branch, int injected, std::string& diagnostic) {
  const char* name = branch.direction > 0 ? "upward" : "downward";
  if (branch.ranks.size() < 3) {
    if (!diagnostic.empty()) diagnostic += "; ";
    diagnostic += std::string(name) + " branch has " + std::to_string(branch.ranks.size()) +
                  " attributable ranks (wave decayed)";
    return;
  }
  std::vector<double> coord;
  coord.reserve(branch.offsets.size());
  for (int off : branch.offsets) coord.push_back(injected + branch.direction * off);
  branch.leading_fit = fit_line(branch.leading, coord);
  branch.trailing_fit = fit_line(branch.trailing, coord);
}

}  // namespace

EdgeVelocity edge_velocity(const Trace& trace, const Injection& injection,
                           const EdgeOptions& options) {
  const int p = trace.process_count();
  if (injection.rank < 0 || injection.rank >= p) {
    throw std::invalid_argument("injection rank outside the trace");
  }
  std::vector<double> waits;
  for (const auto& lane : trace.ranks) {
    for (const auto& iv : lane) {
      if (iv.kind == IntervalKind::kWait) waits.push_back(iv.duration());
    }
  }
  EdgeVelocity result;
  result.threshold =
      std::max(options.threshold_factor * median(std::move(waits)), options.threshold_floor);

  std::vector<std::optional<Episode>> episodes(static_cast<std::size_t>(p));
  for (int r = 0; r < p; ++r) {
    if (r == injection.rank) continue;
    episodes[static_cast<std::size_t>(r)] =
        first_episode(trace.ranks[static_cast<std::size_t>(r)], injection.step,
                      result.threshold);
  }

  auto walk = [&](EdgeBranch& branch, int direction) {
    branch.direction = direction;
    const double slack = 1e-9;
    int gap = 0;
    for (int off = 1; off < p; ++off) {
      int r = injection.rank + direction * off;
      if (options.periodic) {
        r = ((r % p) + p) % p;
      } else if (r < 0 || r >= p) {
        break;
      }
      const auto& ep = episodes[static_cast<std::size_t>(r)];
      if (!ep) {
        if (++gap > options.max_gap) break;
        continue;
      }
      gap = 0;
      if (!branch.leading.empty() && ep->leading < branch.leading.back() - slack) break;
      branch.offsets.push_back(off);
      branch.ranks.push_back(r);
      branch.leading.push_back(ep->leading);
      branch.trailing.push_back(ep->trailing);
    }
  };
  walk(result.up, +1);
  walk(result.down, -1);

  if (options.periodic && !result.up.offsets.empty() && !result.down.offsets.empty()) {
    const int up_reach = result.up.offsets.back();
    const int down_reach = p - result.down.offsets.back();  // as an upward offset
    if (down_reach <= up_reach + options.max_gap + 1) {
      // A rank reached by both walks belongs to the branch that got there
      // first, then to the nearer one; the rank exactly opposite is shared.
      std::map<int, int> owner;  // rank -> +1 up, -1 down, 0 shared
      for (std::size_t i = 0; i < result.up.ranks.size(); ++i) {
        const int r = result.up.ranks[i];
        const auto j = std::find(result.down.ranks.begin(), result.down.ranks.end(), r);
        if (j == result.down.ranks.end()) continue;
        const auto k = static_cast<std::size_t>(j - result.down.ranks.begin());
        const double lu = result.up.leading[i];
        const double ld = result.down.leading[k];
        const int ou = result.up.offsets[i];
        const int od = result.down.offsets[k];
        int who = 0;
        if (lu != ld) {
          who = lu < ld ? +1 : -1;
        } else if (ou != od) {
          who = ou < od ? +1 : -1;
        }
        owner[r] = who;
      }
      auto trim = [&](EdgeBranch& b) {
        while (!b.ranks.empty()) {
          const auto it = owner.find(b.ranks.back());
          if (it == owner.end() || it->second == 0 || it->second == b.direction) break;
          b.offsets.pop_back();
          b.ranks.pop_back();
          b.leading.pop_back();
          b.trailing.pop_back();
        }
      };
      trim(result.up);
      trim(result.down);
      const int a = result.up.offsets.empty() ? 0 : result.up.offsets.back();
      const int b = p - (result.down.offsets.empty() ? 0 : result.down.offsets.back());
      result.meeting_offset = 0.5 * (a + b);
    }
  }

  fit_branch(result.up, injection.rank, result.diagnostic);
  fit_branch(result.down, injection.rank, result.diagnostic);
  return result;
}

ActivityStats activity_stats(const Trace& trace, int domain, TimeWindow window) {
  if (!(window.end > window.begin)) {
    throw std::invalid_argument("activity_stats: empty time window");
  }
  // +1 at compute start, -1 at compute end, clipped to the window.
  std::map<double, int> delta;
  int initial = 0;
  for (int r = 0; r < trace.process_count(); ++r) {
    if (trace.rank_domain[static_cast<std::size_t>(r)] != domain) continue;
    for (const auto& iv : trace.ranks[static_cast<std::size_t>(r)]) {
      if (iv.kind != IntervalKind::kCompute) continue;
      if (iv.end <= window.begin || iv.start >= window.end) continue;
      if (iv.start <= window.begin) {
        ++initial;
      } else {
        ++delta[iv.start];
      }
      if (iv.end < window.end) --delta[iv.end];
    }
  }
  ActivityStats stats;
  int count = initial;
  stats.min = stats.max = count;
  double area = 0.0;
  double cursor = window.begin;
  for (const auto& [t, d] : delta) {
    area += count * (t - cursor);
    cursor = t;
    count += d;
    if (t < window.end) {
      stats.min = std::min(stats.min, count);
      stats.max = std::max(stats.max, count);
    }
  }
  area += count * (window.end - cursor);
  stats.mean = area / (window.end - window.begin);
  return stats;
}

IterationBreakdown iteration_breakdown(const Trace& trace, StepWindow window) {
  if (window.last - window.first < 10) {
    throw std::invalid_argument("iteration_breakdown needs a window of at least 10 steps");
  }
  double compute = 0.0, wait = 0.0;
  for (const auto& lane : trace.ranks) {
    for (const auto& iv : lane) {
      if (iv.step < window.first || iv.step >= window.last) continue;
      if (iv.kind == IntervalKind::kWait) {
        wait += iv.duration();
      } else {
        compute += iv.duration();
      }
    }
  }
  const double samples =
      static_cast<double>(trace.process_count()) * (window.last - window.first);
  IterationBreakdown out;
  out.compute = compute / samples;
  out.wait = wait / samples;
  out.total = out.compute + out.wait;
  return out;
}

StepWindow developed_steps(const Trace& trace, double fraction) {
  const int steps = trace.completed_steps();
  const int width = std::max(1, static_cast<int>(std::lround(fraction * steps)));
  return {std::max(0, steps - width), steps};
}

TimeWindow common_time_window(const Trace& trace, StepWindow steps, int domain) {
  TimeWindow w{0.0, std::numeric_limits<double>::infinity()};
  for (int r = 0; r < trace.process_count(); ++r) {
    if (domain >= 0 && trace.rank_domain[static_cast<std::size_t>(r)] != domain) continue;
    const auto& lane = trace.ranks[static_cast<std::size_t>(r)];
    double first_start = std::numeric_limits<double>::infinity();
    double last_end = 0.0;
    for (const auto& iv : lane) {
      if (iv.step == steps.first) first_start = std::min(first_start, iv.start);
      if (iv.step == steps.last - 1) last_end = std::max(last_end, iv.end);
    }
    w.begin = std::max(w.begin, first_start);
    w.end = std::min(w.end, last_end);
  }
  return w;
}

AnalysisReport analyze(const Trace& trace, const AnalysisOptions& options) {
  AnalysisReport report;
  report.processes = trace.process_count();
  report.steps = trace.completed_steps();
  report.makespan = trace.makespan();
  if (report.steps == 0) return report;
  report.developed = developed_steps(trace, options.developed_fraction);

  report.amplitude_by_step.reserve(static_cast<std::size_t>(report.steps));
  for (int k = 0; k < report.steps; ++k) report.amplitude_by_step.push_back(desync_metric(trace, k));
  report.final_wavefront = wavefront(trace, report.steps - 1);
  if (report.processes >= 3) {
    report.final_slopes = fit_slopes(report.final_wavefront, &report.warnings);
  }

  for (int d = 0; d < trace.domain_count(); ++d) {
    const TimeWindow window = common_time_window(trace, report.developed, d);
    if (window.end > window.begin) {
      report.activity.push_back({d, activity_stats(trace, d, window)});
    } else {
      report.warnings.push_back("domain " + std::to_string(d) +
                                ": developed window too short for activity statistics");
    }
  }

  const int initial = std::min(report.steps, std::max(10, report.steps / 10));
  if (initial >= 10) report.initial_breakdown = iteration_breakdown(trace, {0, initial});
  if (report.developed.last - report.developed.first >= 10) {
    report.developed_breakdown = iteration_breakdown(trace, report.developed);
  }
  if (options.injection) {
    report.edges = edge_velocity(trace, *options.injection, options.edges);
    if (!report.edges->diagnostic.empty()) report.warnings.push_back(report.edges->diagnostic);
  }
  return report;
}

}  // namespace desync
