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

#include "desync/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "desync/config_io.hpp"
#include "desync/errors.hpp"
#include "desync/perturbation.hpp"

namespace desync {

bool event_before(const Event& a, const Event& b) {
  if (a.time != b.time) return a.time < b.time;
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.rank != b.rank) return a.rank < b.rank;
  return a.sequence < b.sequence;
}

void EventQueue::push(Event ev) {
  if (!(ev.time >= 0.0) || !std::isfinite(ev.time)) {
    throw SimulationError("event scheduled at invalid time " + std::to_string(ev.time));
  }
  ev.sequence = next_sequence_++;
  heap_.push(ev);
}

Event EventQueue::pop() {
  Event ev = heap_.top();
  heap_.pop();
  return ev;
}

int DomainDrainState::active_cores() const {
  int cores = 0;
  for (const auto& m : computing) cores += m.threads;
  return cores;
}

double DomainDrainState::app_bandwidth() const {
  const int active = active_cores();
  if (active == 0) return 0.0;
  const double b = curve->at(active);
  if (comm_demand <= 0.0) return b;
  // Message traffic competes for the domain's saturated bandwidth; the
  // application always keeps a minimal share so phases terminate.
  const double left = std::min(b, curve->b_max() - comm_demand);
  return std::max(left, 0.1 * b);
}

double DomainDrainState::rate(const DrainMember& member) const {
  const int active = active_cores();
  if (active == 0) return 0.0;
  return app_bandwidth() * member.threads / active;
}

DrainMember* DomainDrainState::find(int rank) {
  for (auto& m : computing) {
    if (m.rank == rank) return &m;
  }
  return nullptr;
}

void advance_domain(DomainDrainState& state, double now, double tolerance) {
  if (now < state.last_update) {
    throw SimulationError("domain " + std::to_string(state.id) + " advanced backwards in time");
  }
  const double dt = now - state.last_update;
  if (dt > 0.0 && !state.computing.empty()) {
    const double total = state.app_bandwidth();
    const int active = state.active_cores();
    for (auto& m : state.computing) {
      const double amount = total * m.threads / active * dt;
      m.remaining -= amount;
      m.drained += amount;
      if (m.remaining < -tolerance) {
        std::ostringstream msg;
        msg << "rank " << m.rank << " on domain " << state.id << " drained past its volume by "
            << -m.remaining << " bytes";
        throw SimulationError(msg.str());
      }
    }
  }
  state.last_update = now;
}

std::optional<std::pair<int, double>> next_completion(const DomainDrainState& state) {
  std::optional<std::pair<int, double>> best;
  for (const auto& m : state.computing) {
    const double r = state.rate(m);
    const double t = state.last_update + std::max(m.remaining, 0.0) / r;
    if (!best || t < best->second || (t == best->second && m.rank < best->first)) {
      best = std::make_pair(m.rank, t);
    }
  }
  return best;
}

double lockstep_phase_seconds(const SimConfig& config, int rank) {
  const auto& workload = config.workload;
  if (workload.kind == WorkloadKind::kCoreBound) return workload.duration_per_step;
  const int domain = config.domain_of(rank);
  const int first = domain * config.processes.per_domain;
  const int last = std::min(config.processes.count, first + config.processes.per_domain);
  const int n = last - first;
  const int threads = config.processes.threads;
  const double b = config.machine.spec.curve.at(n * threads);
  return workload.volume_per_step / (b * threads / (n * threads));
}

namespace {

enum class Phase { kIdle, kIdleInjected, kComputing, kInCommWait, kFinished };

constexpr std::uint64_t kDomainProjection = 0;
constexpr std::uint64_t kRankTimer = 1;

struct RankState {
  Phase phase = Phase::kIdle;
  int step = 0;
  double interval_start = 0.0;
  double target = 0.0;      // bytes (memory-bound) or seconds (core-bound)
  double noise_tail = 0.0;  // additive noise seconds after draining
  std::uint64_t timer_generation = 0;
  std::size_t exchange_phase = 0;
  int pending = 0;
  std::vector<std::uint64_t> pending_ids;
};

class Simulation {
 public:
  Simulation(const SimConfig& config, const RunOptions& options)
      : config_(config),
        options_(options),
        schedule_(config.inject, config.processes.count, config.workload.steps),
        matcher_(config.comm.cost, config.comm.pattern.eager_threshold),
        memory_bound_(config.workload.kind == WorkloadKind::kMemoryBound) {
    const int p = config.processes.count;
    ranks_.resize(static_cast<std::size_t>(p));
    phases_.reserve(static_cast<std::size_t>(p));
    for (int r = 0; r < p; ++r) {
      phases_.push_back(exchange_phases(r, p, config.comm.pattern, config.comm.wait_mode));
    }
    domains_.resize(static_cast<std::size_t>(config.domain_count()));
    for (std::size_t d = 0; d < domains_.size(); ++d) {
      domains_[d].id = static_cast<int>(d);
      domains_[d].curve = &config.machine.spec.curve;
    }
    result_.stats.domain_comm_bytes.assign(domains_.size(), 0.0);
    result_.trace.ranks.resize(static_cast<std::size_t>(p));
    result_.trace.rank_domain.resize(static_cast<std::size_t>(p));
    for (int r = 0; r < p; ++r) result_.trace.rank_domain[static_cast<std::size_t>(r)] = config.domain_of(r);
    if (options.record_drain) {
      const auto steps = static_cast<std::size_t>(config.workload.steps);
      result_.drained.assign(static_cast<std::size_t>(p), std::vector<double>(steps, 0.0));
      result_.target.assign(static_cast<std::size_t>(p), std::vector<double>(steps, 0.0));
    }
    matcher_.set_retain_history(options.record_messages);
  }

  RunResult run() {
    for (int r = 0; r < config_.processes.count; ++r) start_step(r, 0, 0.0);
    while (!queue_.empty()) {
      const Event ev = queue_.pop();
      ++result_.stats.events;
      dispatch(ev);
    }
    check_finished();
    if (options_.record_messages) result_.messages = matcher_.history();
    return std::move(result_);
  }

 private:
  RankState& rank(int r) { return ranks_[static_cast<std::size_t>(r)]; }
  DomainDrainState& domain_of(int r) {
    return domains_[static_cast<std::size_t>(config_.domain_of(r))];
  }

  void record(int r, IntervalKind kind, double start, double end, int step) {
    result_.trace.ranks[static_cast<std::size_t>(r)].push_back({kind, start, end, step});
  }

  void push(double time, EventKind kind, int r, std::uint64_t generation = 0,
            std::uint64_t payload = 0) {
    Event ev;
    ev.time = time;
    ev.kind = kind;
    ev.rank = r;
    ev.generation = generation;
    ev.payload = payload;
    queue_.push(ev);
  }

  double tolerance_for(double target) const { return 1e-9 * std::max(target, 1.0); }

  void start_step(int r, int step, double now) {
    RankState& st = rank(r);
    st.step = step;
    st.interval_start = now;
    if (schedule_.has(r, step)) {
      st.phase = Phase::kIdle;
      push(now, EventKind::kInjectionStart, r);
      return;
    }
    begin_compute(r, now);
  }

  void on_injection_start(int r, double now) {
    RankState& st = rank(r);
    const double idle =
        schedule_.apply_injection(r, st.step, lockstep_phase_seconds(config_, r));
    st.phase = Phase::kIdleInjected;
    st.interval_start = now;
    push(now + idle, EventKind::kInjectionEnd, r);
  }

  void on_injection_end(int r, double now) {
    RankState& st = rank(r);
    record(r, IntervalKind::kIdleInjected, st.interval_start, now, st.step);
    begin_compute(r, now);
  }

  void begin_compute(int r, double now) {
    RankState& st = rank(r);
    st.phase = Phase::kComputing;
    st.interval_start = now;
    const auto& noise = config_.noise;
    if (!memory_bound_) {
      st.target = perturb_duration(config_.workload.duration_per_step, noise, r, st.step);
      push(now + st.target, EventKind::kComputeDone, r, ++st.timer_generation, kRankTimer);
      return;
    }
    const double volume = config_.workload.volume_per_step;
    st.noise_tail = 0.0;
    if (noise.kind == NoiseKind::kLognormalMultiplicative) {
      st.target = perturb_duration(volume, noise, r, st.step);
    } else {
      st.target = volume;
      if (noise.kind == NoiseKind::kExponentialAdditive) {
        st.noise_tail = perturb_duration(0.0, noise, r, st.step);
      }
    }
    DomainDrainState& dom = domain_of(r);
    advance_domain(dom, now, tolerance_for(volume));
    DrainMember member;
    member.rank = r;
    member.threads = config_.processes.threads;
    member.remaining = st.target;
    const auto pos = std::lower_bound(
        dom.computing.begin(), dom.computing.end(), r,
        [](const DrainMember& m, int rank) { return m.rank < rank; });
    dom.computing.insert(pos, member);
    reproject(dom);
  }

  void reproject(DomainDrainState& dom) {
    ++dom.generation;
    if (auto next = next_completion(dom)) {
      push(next->second, EventKind::kComputeDone, next->first, dom.generation,
           kDomainProjection);
    }
  }

  void on_compute_done(const Event& ev) {
    RankState& st = rank(ev.rank);
    if (ev.payload == kRankTimer) {
      if (ev.generation != st.timer_generation || st.phase != Phase::kComputing) {
        ++result_.stats.stale_events;
        return;
      }
      finish_compute(ev.rank, ev.time);
      return;
    }
    DomainDrainState& dom = domain_of(ev.rank);
    if (ev.generation != dom.generation) {
      ++result_.stats.stale_events;
      return;
    }
    const double tol = tolerance_for(st.target);
    advance_domain(dom, ev.time, tol);
    DrainMember* member = dom.find(ev.rank);
    if (member == nullptr) throw SimulationError("compute_done for a rank that is not draining");
    if (std::abs(member->remaining) > tol) {
      throw SimulationError("rank " + std::to_string(ev.rank) + " completed with " +
                            std::to_string(member->remaining) + " bytes left");
    }
    const double err = std::abs(member->drained - st.target) / st.target;
    result_.stats.max_conservation_error = std::max(result_.stats.max_conservation_error, err);
    if (options_.record_drain) {
      const auto r = static_cast<std::size_t>(ev.rank);
      const auto k = static_cast<std::size_t>(st.step);
      result_.drained[r][k] = member->drained;
      result_.target[r][k] = st.target;
    }
    dom.computing.erase(dom.computing.begin() + (member - dom.computing.data()));
    reproject(dom);
    if (st.noise_tail > 0.0) {
      push(ev.time + st.noise_tail, EventKind::kComputeDone, ev.rank, ++st.timer_generation,
           kRankTimer);
      return;
    }
    finish_compute(ev.rank, ev.time);
  }

  void finish_compute(int r, double now) {
    RankState& st = rank(r);
    record(r, IntervalKind::kCompute, st.interval_start, now, st.step);
    const auto& phases = phases_[static_cast<std::size_t>(r)];
    if (phases.empty()) {
      end_step(r, now, false);
      return;
    }
    st.phase = Phase::kInCommWait;
    st.interval_start = now;
    st.exchange_phase = 0;
    post_phase(r, now);
  }

  void post_phase(int r, double now) {
    RankState& st = rank(r);
    const ExchangePhase& phase = phases_[static_cast<std::size_t>(r)][st.exchange_phase];
    const double bytes = config_.comm.pattern.message_bytes;
    st.pending = static_cast<int>(phase.send_to.size() + phase.recv_from.size());
    st.pending_ids.clear();
    for (int to : phase.send_to) {
      handle_post(matcher_.post_send(r, to, st.step, bytes, now), now);
    }
    for (int from : phase.recv_from) {
      handle_post(matcher_.post_recv(from, r, st.step, bytes, now), now);
    }
  }

  void handle_post(const MessageMatcher::PostResult& posted, double now) {
    const MessageRequest& req = matcher_.request(posted.id);
    rank(req.owner()).pending_ids.push_back(posted.id);
    for (const auto& c : posted.completions) {
      const MessageRequest& target = matcher_.request(c.request);
      push(std::max(c.time, now),
           c.message_ready ? EventKind::kMessageReady : EventKind::kRequestComplete,
           target.owner(), 0, c.request);
    }
    if (posted.transfer) charge_transfer(*posted.transfer, now);
  }

  void charge_transfer(const Transfer& transfer, double now) {
    const double gamma = config_.comm.cost.membw_charge;
    if (gamma <= 0.0 || !memory_bound_) return;
    if (config_.node_of(transfer.src) != config_.node_of(transfer.dst)) return;
    const double duration = transfer.end - transfer.start;
    if (!(duration > 0.0)) return;
    const double rate = gamma * transfer.bytes / duration;
    for (int endpoint : {transfer.src, transfer.dst}) {
      const int d = config_.domain_of(endpoint);
      DomainDrainState& dom = domains_[static_cast<std::size_t>(d)];
      advance_domain(dom, now, tolerance_for(config_.workload.volume_per_step));
      dom.comm_demand += rate;
      result_.stats.domain_comm_bytes[static_cast<std::size_t>(d)] += gamma * transfer.bytes;
      reproject(dom);
      charges_.push_back(rate);
      push(transfer.end, EventKind::kChargeEnd, endpoint, static_cast<std::uint64_t>(d),
           charges_.size() - 1);
    }
  }

  void on_charge_end(const Event& ev) {
    DomainDrainState& dom = domains_[static_cast<std::size_t>(ev.generation)];
    advance_domain(dom, ev.time, tolerance_for(config_.workload.volume_per_step));
    dom.comm_demand -= charges_[ev.payload];
    if (dom.comm_demand < 1e-9) dom.comm_demand = 0.0;
    reproject(dom);
  }

  void on_request_complete(const Event& ev) {
    matcher_.mark_complete(ev.payload, ev.time);
    RankState& st = rank(ev.rank);
    auto& ids = st.pending_ids;
    ids.erase(std::remove(ids.begin(), ids.end(), ev.payload), ids.end());
    if (--st.pending > 0) return;
    const auto& phases = phases_[static_cast<std::size_t>(ev.rank)];
    if (++st.exchange_phase < phases.size()) {
      post_phase(ev.rank, ev.time);
      return;
    }
    end_step(ev.rank, ev.time, true);
  }

  void end_step(int r, double now, bool waited) {
    RankState& st = rank(r);
    if (waited) record(r, IntervalKind::kWait, st.interval_start, now, st.step);
    if (st.step + 1 < config_.workload.steps) {
      start_step(r, st.step + 1, now);
      return;
    }
    st.phase = Phase::kFinished;
  }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case EventKind::kInjectionStart:
        on_injection_start(ev.rank, ev.time);
        break;
      case EventKind::kInjectionEnd:
        on_injection_end(ev.rank, ev.time);
        break;
      case EventKind::kComputeDone:
        on_compute_done(ev);
        break;
      case EventKind::kMessageReady:
      case EventKind::kRequestComplete:
        on_request_complete(ev);
        break;
      case EventKind::kChargeEnd:
        on_charge_end(ev);
        break;
      case EventKind::kSimEnd:
        break;
    }
  }

  void check_finished() {
    std::ostringstream msg;
    bool blocked = false;
    for (int r = 0; r < config_.processes.count; ++r) {
      const RankState& st = rank(r);
      if (st.phase == Phase::kFinished) continue;
      if (!blocked) msg << "deadlock: no runnable event but ranks are blocked:";
      blocked = true;
      msg << "\n  rank " << r << " at step " << st.step << " waiting on";
      for (auto id : st.pending_ids) {
        const MessageRequest& req = matcher_.request(id);
        msg << (req.kind == RequestKind::kSend ? " send->" : " recv<-")
            << (req.kind == RequestKind::kSend ? req.dst : req.src) << "(step " << req.step
            << ")";
      }
    }
    if (blocked) throw DeadlockError(msg.str());
  }

  const SimConfig& config_;
  RunOptions options_;
  InjectionSchedule schedule_;
  MessageMatcher matcher_;
  bool memory_bound_;
  EventQueue queue_;
  std::vector<RankState> ranks_;
  std::vector<std::vector<ExchangePhase>> phases_;
  std::vector<DomainDrainState> domains_;
  std::vector<double> charges_;
  RunResult result_;
};

}  // namespace

RunResult simulate(const SimConfig& config, const RunOptions& options) {
  config.validate();
  Simulation sim(config, options);
  RunResult result = sim.run();
  result.trace.config_echo = config_to_json(config);
  return result;
}

Trace run(const SimConfig& config) { return simulate(config).trace; }

}  // namespace desync
