// Copyright 2026 The qpvsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Chained teleportation shared by two adversaries E0 and E1.
//
// Each adversary performs a sequence of steps. A step takes the signal just
// captured (or a fresh |0> when nothing arrived) and port-teleports it to the
// partner with one logical port, then sends the partner the port outcome.
// Matched signals are operated on together as soon as both are in the
// coalition's hands, and the result is committed to the partner as a
// promise at the committing adversary's first step after the first member.
//
// A pair whose second member was captured by E_j is answered by E_{1-j} once
// the port outcome of that step arrives, and by E_j once the partner's
// promise has arrived.

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "qpv/engine.hpp"
#include "qpv/protocols.hpp"

namespace qpv {

enum class MatchRule {
  Keyed,            ///< members carry a pairing key (public order, per-side count)
  ConsecutiveReal,  ///< consecutive real captures form a pair
  SameTick,         ///< real captures at the same instant on both sides
  TwoPoint,         ///< same instant at P1; V1 side first by 2 L_pp / c at P0
};

enum class PairOp { Interfere, Bell };

struct ChainOptions {
  MatchRule rule = MatchRule::ConsecutiveReal;
  PairOp op = PairOp::Interfere;
  Time two_point_delay = 0;  ///< 2 L_pp / c for the two-point rule
  bool naive = false;        ///< E1 waits for the late member before committing
};

class Chain {
 public:
  explicit Chain(ChainOptions opt) : opt_(opt) {}

  void bind(std::array<PartyId, 2> adversaries, std::array<PartyId, 2> verifiers);

  /// One step by E_side now. `capture` empty means an empty signal. `key`
  /// is used by the keyed rule only.
  void step(Context& ctx, int side, std::vector<QubitId> capture, int key = -1);

  /// Port outcomes and promises from the partner.
  void on_receive(Context& ctx, int side, const Envelope& env);

  std::size_t steps() const { return steps_.size(); }
  std::size_t pairs_closed() const { return closed_; }
  std::size_t dropped() const { return dropped_; }

 private:
  struct Member {
    int step = -1;
    int side = 0;
    Time time = 0;
    std::vector<QubitId> qubits;
  };
  struct Pair {
    int id = 0;
    int key = -1;
    Member a;
    std::optional<Member> b;
    std::optional<int> value;
    std::array<std::optional<std::uint64_t>, 2> promise;
    std::array<std::optional<Envelope>, 2> promise_seen;  ///< partner's promise, delivered to side i
    bool outcome_seen = false;                              ///< n of step b delivered to the performer
    std::array<bool, 2> responded{false, false};
  };
  struct StepInfo {
    int side = 0;
    Time time = 0;
    std::unique_ptr<PortGroup> group;
  };

  Pair* match(Context& ctx, int side, int key, std::vector<QubitId>& capture);
  void close(Context& ctx, Pair& p, Member b);
  void commit(Context& ctx, int side, int step);
  void try_respond(Context& ctx, int side, Pair& p);
  void abandon(Context& ctx, int pair_id);
  int partner(int side) const { return adversaries_[1 - side]; }
  int next_point_is_p0() const;

  ChainOptions opt_;
  std::array<PartyId, 2> adversaries_{kNobody, kNobody};
  std::array<PartyId, 2> verifiers_{kNobody, kNobody};
  std::vector<StepInfo> steps_;
  std::map<int, Pair> pairs_;
  std::vector<int> open_;  // ids of pairs waiting for a second member
  std::map<std::uint64_t, int> outcome_envelopes_;  // envelope -> step
  std::map<std::uint64_t, int> promise_envelopes_;  // envelope -> pair
  std::optional<int> last_value_;
  int next_pair_ = 0;
  std::size_t closed_ = 0;
  std::size_t dropped_ = 0;
};

}  // namespace qpv
