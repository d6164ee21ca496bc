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

#include "qpv/chain.hpp"

#include <algorithm>
#include <cmath>

#include "qpv/errors.hpp"
#include "qpv/optics.hpp"

namespace qpv {

void Chain::bind(std::array<PartyId, 2> adversaries, std::array<PartyId, 2> verifiers) {
  adversaries_ = adversaries;
  verifiers_ = verifiers;
}

int Chain::next_point_is_p0() const { return last_value_ && *last_value_ == 0; }

void Chain::step(Context& ctx, int side, std::vector<QubitId> capture, int key) {
  const bool real = !capture.empty();
  if (!ctx.ledger().can_consume(1)) {
    if (real) {
      ctx.free(capture);
      ++dropped_;
      ctx.log("drop", "no entanglement left");
    }
    return;
  }
  std::vector<QubitId> src = real ? capture : std::vector<QubitId>{ctx.alloc(0)};
  auto group = std::make_unique<PortGroup>(PbtMode::Ideal, 1, ctx.self(), partner(side));
  const PortOutcome out = ctx.pbt_send(src, *group, {}, real);
  const int idx = static_cast<int>(steps_.size());
  steps_.push_back({side, ctx.now(), std::move(group)});
  if (!real) ctx.coalition_free(src, partner(side));
  const auto eid = ctx.send_to(partner(side), out, -1, "port step=" + std::to_string(idx));
  outcome_envelopes_[eid] = idx;

  if (real) {
    Member m{idx, side, ctx.now(), std::move(capture)};
    if (Pair* p = match(ctx, side, key, m.qubits)) {
      close(ctx, *p, std::move(m));
    } else {
      Pair np;
      np.id = next_pair_++;
      np.key = key;
      np.a = std::move(m);
      open_.push_back(np.id);
      pairs_.emplace(np.id, std::move(np));
    }
  }
  commit(ctx, side, idx);
  for (auto& [id, p] : pairs_) try_respond(ctx, side, p);
}

Chain::Pair* Chain::match(Context& ctx, int side, int key, std::vector<QubitId>&) {
  const Time now = ctx.now();
  auto front = [&]() -> Pair* { return open_.empty() ? nullptr : &pairs_.at(open_.front()); };
  auto same_tick = [&]() -> Pair* {
    Pair* p = front();
    if (!p) return nullptr;
    if (std::abs(p->a.time - now) <= kTolerance && p->a.side != side) return p;
    abandon(ctx, p->id);
    return nullptr;
  };
  switch (opt_.rule) {
    case MatchRule::Keyed:
      for (int id : open_)
        if (pairs_.at(id).key == key) return &pairs_.at(id);
      return nullptr;
    case MatchRule::ConsecutiveReal:
      return front();
    case MatchRule::SameTick:
      return same_tick();
    case MatchRule::TwoPoint: {
      if (!next_point_is_p0()) return same_tick();
      Pair* p = front();
      if (!p) return nullptr;
      if (p->a.side == 1 && side == 0 && std::abs(now - (p->a.time + opt_.two_point_delay)) <= kTolerance) return p;
      abandon(ctx, p->id);
      return nullptr;
    }
  }
  return nullptr;
}

void Chain::close(Context& ctx, Pair& p, Member b) {
  p.b = std::move(b);
  open_.erase(std::remove(open_.begin(), open_.end(), p.id), open_.end());
  const PartyId other = partner(p.b->side);
  std::vector<QubitId> qs = p.a.qubits;
  qs.insert(qs.end(), p.b->qubits.begin(), p.b->qubits.end());
  int value = 2;
  if (opt_.op == PairOp::Bell && qs.size() == 2) {
    value = static_cast<int>(ctx.coalition(qs, other).measure(qs, Basis::bell(), ctx.rng()).index);
  } else if (opt_.op == PairOp::Interfere && qs.size() == 2 && p.a.side != p.b->side) {
    const optics::DualRail dr = p.a.side == 0 ? optics::DualRail{qs[0], qs[1]} : optics::DualRail{qs[1], qs[0]};
    try {
      value = detection_value(optics::interfere_and_detect(ctx.coalition(qs, other), dr, ctx.rng()));
    } catch (const InvalidArgument&) {
      value = 2;
    }
  } else {
    value = static_cast<int>(ctx.rng().below(2));
  }
  std::vector<QubitId> live;
  for (auto q : qs)
    if (ctx.coalition(std::span<const QubitId>(&q, 1), other).live(q)) live.push_back(q);
  ctx.coalition_free(live, other);

  p.value = value;
  last_value_ = value;
  ++closed_;
  ctx.log("pair", "round=" + std::to_string(p.id) + " steps=" + std::to_string(p.a.step) + "," +
                      std::to_string(p.b->step) + " value=" + std::to_string(value));
  for (auto& pr : p.promise)
    if (pr) ctx.resolve(*pr, Classical{"L", {value}});
}

void Chain::commit(Context& ctx, int side, int step) {
  for (auto& [id, p] : pairs_) {
    if (p.promise[side] || p.a.step > step) continue;
    if (opt_.naive && side == 1 && !p.value) continue;
    p.promise[side] = ctx.make_promise();
    if (p.value) ctx.resolve(*p.promise[side], Classical{"L", {*p.value}});
    const auto eid = ctx.send_to(partner(side), PromiseRef{*p.promise[side]}, p.id, "L pair=" + std::to_string(p.id));
    promise_envelopes_[eid] = p.id;
  }
}

void Chain::try_respond(Context& ctx, int side, Pair& p) {
  if (p.responded[side] || !p.b || !p.value) return;
  const int performer = 1 - p.b->side;
  int value = 0;
  if (side == performer) {
    if (!p.promise[side] || !p.outcome_seen) return;
    value = *p.value;
  } else {
    if (!p.promise_seen[side]) return;
    value = static_cast<int>(ctx.open_classical(*p.promise_seen[side]).values.at(0));
  }
  p.responded[side] = true;
  ctx.log("respond", "round=" + std::to_string(p.id) + " value=" + std::to_string(value));
  ctx.send_to(verifiers_[side], Classical{"response", {value}}, p.id, "response");
}

void Chain::abandon(Context& ctx, int pair_id) {
  auto it = pairs_.find(pair_id);
  if (it == pairs_.end()) return;
  const PartyId other = partner(it->second.a.side);
  std::vector<QubitId> live;
  for (auto q : it->second.a.qubits)
    if (ctx.coalition(std::span<const QubitId>(&q, 1), other).live(q)) live.push_back(q);
  if (!live.empty()) ctx.coalition_free(live, other);
  ctx.log("unmatched", "round=" + std::to_string(pair_id));
  pairs_.erase(it);
  open_.erase(std::remove(open_.begin(), open_.end(), pair_id), open_.end());
  ++dropped_;
}

void Chain::on_receive(Context& ctx, int side, const Envelope& env) {
  if (const auto* out = std::get_if<PortOutcome>(&env.payload)) {
    auto it = outcome_envelopes_.find(env.id);
    if (it == outcome_envelopes_.end()) return;
    const int step = it->second;
    outcome_envelopes_.erase(it);
    auto& st = steps_.at(step);
    if (st.group && st.group->state() == PortGroup::State::Sent) ctx.pbt_receive(*st.group, *out);
    st.group.reset();
    for (auto& [id, p] : pairs_) {
      if (p.b && p.b->step == step) {
        p.outcome_seen = true;
        try_respond(ctx, side, p);
      }
    }
  } else if (std::holds_alternative<PromiseRef>(env.payload)) {
    auto it = promise_envelopes_.find(env.id);
    if (it == promise_envelopes_.end()) return;
    auto pit = pairs_.find(it->second);
    promise_envelopes_.erase(it);
    if (pit == pairs_.end()) return;
    pit->second.promise_seen[side] = env;
    try_respond(ctx, side, pit->second);
  }
}

}  // namespace qpv
