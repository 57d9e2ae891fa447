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

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "desync/config.hpp"
#include "desync/model.hpp"

namespace desync {

enum class Protocol { kEager, kRendezvous };

/// Eager iff bytes < threshold.
[[nodiscard]] constexpr Protocol select_protocol(double bytes, double eager_threshold) {
  return bytes < eager_threshold ? Protocol::kEager : Protocol::kRendezvous;
}

enum class RequestKind { kSend, kRecv };
enum class RequestState { kPosted, kMatched, kTransferring, kComplete };

struct MessageRequest {
  std::uint64_t id = 0;
  RequestKind kind = RequestKind::kSend;
  int src = 0;
  int dst = 0;
  int step = 0;
  double bytes = 0.0;
  Protocol protocol = Protocol::kEager;
  double posted_at = 0.0;
  RequestState state = RequestState::kPosted;
  double matched_at = -1.0;
  double complete_at = -1.0;
  /// Position in the FIFO of its (src, dst) pair; a send and the receive it
  /// matches carry the same number.
  std::uint64_t pair_seq = 0;
  std::uint64_t peer = 0;  // id of the matched request, 0 if none yet

  [[nodiscard]] int owner() const { return kind == RequestKind::kSend ? src : dst; }
};

/// Send targets and receive sources of one blocking exchange.
struct ExchangePhase {
  std::vector<int> send_to;
  std::vector<int> recv_from;
};

/// Partner ranks of `rank` for one time step. For every up offset d the rank
/// sends to r+d and receives from r-d; for every down offset it sends to r-d
/// and receives from r+d. Open boundaries drop partners outside 0..P-1,
/// periodic boundaries wrap modulo P. kWaitAll yields a single phase,
/// kSplit one phase per offset (up offsets first).
[[nodiscard]] std::vector<ExchangePhase> exchange_phases(int rank, int process_count,
                                                         const CommPattern& pattern,
                                                         WaitMode mode = WaitMode::kWaitAll);

/// Requests posted by `rank` at the end of the compute phase of `step`
/// (all phases flattened), with protocol chosen from the message size.
[[nodiscard]] std::vector<MessageRequest> post_exchange(int rank, int step, int process_count,
                                                        const CommPattern& pattern,
                                                        double now = 0.0);

/// Distinct send targets of `rank` in ascending order.
[[nodiscard]] std::vector<int> exchange_partners(int rank, int process_count,
                                                 const CommPattern& pattern);

/// A scheduled completion produced by matching.
struct Completion {
  std::uint64_t request = 0;
  double time = 0.0;
  bool message_ready = false;  // eager arrival rather than rendezvous/send completion
};

/// Data movement that may be charged to memory bandwidth.
struct Transfer {
  int src = 0;
  int dst = 0;
  double bytes = 0.0;
  double start = 0.0;
  double end = 0.0;
};

/// Non-overtaking point-to-point matching with Hockney costs.
///
/// Eager sends complete alpha + bytes/beta after their post; the receive
/// completes at max(receive post, send completion). Rendezvous transfers
/// start when both sides have posted and complete both requests
/// alpha + bytes/beta later.
class MessageMatcher {
 public:
  struct PostResult {
    std::uint64_t id = 0;
    std::vector<Completion> completions;
    std::optional<Transfer> transfer;
  };

  MessageMatcher(CommCostModel cost, double eager_threshold)
      : cost_(cost), eager_threshold_(eager_threshold) {}

  PostResult post_send(int src, int dst, int step, double bytes, double now);
  PostResult post_recv(int src, int dst, int step, double bytes, double now);

  void mark_complete(std::uint64_t id, double time);

  /// Live (not yet completed) request, or a retained completed one.
  [[nodiscard]] const MessageRequest& request(std::uint64_t id) const;
  [[nodiscard]] std::vector<MessageRequest> incomplete() const;

  /// Completed requests in completion order; only filled when history is
  /// retained.
  [[nodiscard]] const std::vector<MessageRequest>& history() const { return history_; }
  void set_retain_history(bool retain) { retain_history_ = retain; }

 private:
  PostResult post(MessageRequest req, double now);
  MessageRequest& at(std::uint64_t id);

  CommCostModel cost_;
  double eager_threshold_;
  bool retain_history_ = false;
  std::uint64_t next_id_ = 1;
  std::unordered_map<std::uint64_t, MessageRequest> live_;
  std::vector<MessageRequest> history_;
  std::map<std::pair<int, int>, std::deque<std::uint64_t>> unmatched_sends_;
  std::map<std::pair<int, int>, std::deque<std::uint64_t>> unmatched_recvs_;
  std::map<std::pair<int, int>, std::uint64_t> send_seq_;
  std::map<std::pair<int, int>, std::uint64_t> recv_seq_;
};

}  // namespace desync
