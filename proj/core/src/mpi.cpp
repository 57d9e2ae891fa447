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

#include "desync/mpi.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace desync {

namespace {

std::optional<int> partner(int rank, int offset, int process_count, Boundary boundary) {
  const int target = rank + offset;
  if (boundary == Boundary::kPeriodic) {
    return ((target % process_count) + process_count) % process_count;
  }
  if (target < 0 || target >= process_count) return std::nullopt;
  return target;
}

void add_offset(ExchangePhase& phase, int rank, int send_offset, int process_count,
                Boundary boundary) {
  if (auto to = partner(rank, send_offset, process_count, boundary)) {
    phase.send_to.push_back(*to);
  }
  if (auto from = partner(rank, -send_offset, process_count, boundary)) {
    phase.recv_from.push_back(*from);
  }
}

}  // namespace

std::vector<ExchangePhase> exchange_phases(int rank, int process_count,
                                           const CommPattern& pattern, WaitMode mode) {
  std::vector<ExchangePhase> phases;
  if (mode == WaitMode::kWaitAll) {
    ExchangePhase all;
    for (int d : pattern.distances_up) add_offset(all, rank, d, process_count, pattern.boundary);
    for (int d : pattern.distances_down) {
      add_offset(all, rank, -d, process_count, pattern.boundary);
    }
    if (!all.send_to.empty() || !all.recv_from.empty()) phases.push_back(std::move(all));
    return phases;
  }
  auto push = [&](int offset) {
    ExchangePhase phase;
    add_offset(phase, rank, offset, process_count, pattern.boundary);
    if (!phase.send_to.empty() || !phase.recv_from.empty()) phases.push_back(std::move(phase));
  };
  for (int d : pattern.distances_up) push(d);
  for (int d : pattern.distances_down) push(-d);
  return phases;
}

std::vector<MessageRequest> post_exchange(int rank, int step, int process_count,
                                          const CommPattern& pattern, double now) {
  std::vector<MessageRequest> out;
  const Protocol protocol = select_protocol(pattern.message_bytes, pattern.eager_threshold);
  for (const auto& phase : exchange_phases(rank, process_count, pattern)) {
    for (int to : phase.send_to) {
      MessageRequest req;
      req.kind = RequestKind::kSend;
      req.src = rank;
      req.dst = to;
      req.step = step;
      req.bytes = pattern.message_bytes;
      req.protocol = protocol;
      req.posted_at = now;
      out.push_back(req);
    }
    for (int from : phase.recv_from) {
      MessageRequest req;
      req.kind = RequestKind::kRecv;
      req.src = from;
      req.dst = rank;
      req.step = step;
      req.bytes = pattern.message_bytes;
      req.protocol = protocol;
      req.posted_at = now;
      out.push_back(req);
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = i + 1;
  return out;
}

std::vector<int> exchange_partners(int rank, int process_count, const CommPattern& pattern) {
  std::vector<int> partners;
  for (const auto& phase : exchange_phases(rank, process_count, pattern)) {
    partners.insert(partners.end(), phase.send_to.begin(), phase.send_to.end());
  }
  std::sort(partners.begin(), partners.end());
  partners.erase(std::unique(partners.begin(), partners.end()), partners.end());
  return partners;
}

MessageMatcher::PostResult MessageMatcher::post_send(int src, int dst, int step, double bytes,
                                                     double now) {
  MessageRequest req;
  req.kind = RequestKind::kSend;
  req.src = src;
  req.dst = dst;
  req.step = step;
  req.bytes = bytes;
  return post(req, now);
}

MessageMatcher::PostResult MessageMatcher::post_recv(int src, int dst, int step, double bytes,
                                                     double now) {
  MessageRequest req;
  req.kind = RequestKind::kRecv;
  req.src = src;
  req.dst = dst;
  req.step = step;
  req.bytes = bytes;
  return post(req, now);
}

MessageMatcher::PostResult MessageMatcher::post(MessageRequest req, double now) {
  PostResult result;
  req.id = next_id_++;
  req.posted_at = now;
  req.protocol = select_protocol(req.bytes, eager_threshold_);
  req.state = RequestState::kPosted;
  const auto key = std::make_pair(req.src, req.dst);
  const bool is_send = req.kind == RequestKind::kSend;
  req.pair_seq = is_send ? send_seq_[key]++ : recv_seq_[key]++;
  result.id = req.id;
  const double cost = cost_.transfer_time(req.bytes);

  if (is_send && req.protocol == Protocol::kEager) {
    // Buffered: the sender is released once the data has left.
    result.completions.push_back({req.id, now + cost, false});
    if (cost > 0.0) result.transfer = Transfer{req.src, req.dst, req.bytes, now, now + cost};
  }

  auto& opposite = is_send ? unmatched_recvs_[key] : unmatched_sends_[key];
  if (opposite.empty()) {
    (is_send ? unmatched_sends_[key] : unmatched_recvs_[key]).push_back(req.id);
    live_.emplace(req.id, req);
    return result;
  }

  const std::uint64_t other_id = opposite.front();
  opposite.pop_front();
  MessageRequest& other = at(other_id);
  live_.emplace(req.id, req);
  MessageRequest& self = at(req.id);
  MessageRequest& send = is_send ? self : other;
  MessageRequest& recv = is_send ? other : self;
  if (send.pair_seq != recv.pair_seq) {
    throw std::logic_error("message matching out of FIFO order");
  }
  send.peer = recv.id;
  recv.peer = send.id;
  send.matched_at = recv.matched_at = now;

  if (send.protocol == Protocol::kEager) {
    recv.state = RequestState::kMatched;
    const double ready = std::max(recv.posted_at, send.posted_at + cost);
    result.completions.push_back({recv.id, ready, true});
    if (send.state == RequestState::kComplete) {
      if (retain_history_) history_.push_back(send);
      live_.erase(send.id);
    } else {
      send.state = RequestState::kMatched;
    }
  } else {
    send.state = recv.state = RequestState::kTransferring;
    result.completions.push_back({send.id, now + cost, false});
    result.completions.push_back({recv.id, now + cost, false});
    if (cost > 0.0) result.transfer = Transfer{send.src, send.dst, send.bytes, now, now + cost};
  }
  return result;
}

void MessageMatcher::mark_complete(std::uint64_t id, double time) {
  MessageRequest& req = at(id);
  req.state = RequestState::kComplete;
  req.complete_at = time;
  // Unmatched eager sends stay visible so the receive can find their post time.
  if (req.peer == 0) return;
  if (retain_history_) history_.push_back(req);
  live_.erase(id);
}

const MessageRequest& MessageMatcher::request(std::uint64_t id) const {
  const auto it = live_.find(id);
  if (it != live_.end()) return it->second;
  for (const auto& r : history_) {
    if (r.id == id) return r;
  }
  throw std::out_of_range("unknown or retired message request " + std::to_string(id));
}

MessageRequest& MessageMatcher::at(std::uint64_t id) {
  const auto it = live_.find(id);
  if (it == live_.end()) {
    throw std::out_of_range("unknown message request " + std::to_string(id));
  }
  return it->second;
}

std::vector<MessageRequest> MessageMatcher::incomplete() const {
  std::vector<MessageRequest> out;
  for (const auto& [id, req] : live_) {
    if (req.state != RequestState::kComplete) out.push_back(req);
  }
  std::sort(out.begin(), out.end(),
            [](const MessageRequest& a, const MessageRequest& b) { return a.id < b.id; });
  return out;
}

}  // namespace desync
