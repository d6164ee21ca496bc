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

#include "qpv/engine.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <sstream>
#include <tuple>

#include "qpv/errors.hpp"

namespace qpv {

namespace {

std::string fmt_time(Time t) {
  std::ostringstream os;
  os.precision(12);
  os << t;
  return os.str();
}

std::string csv_field(const std::string& s, bool always_quote = false) {
  if (!always_quote && s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<QubitId> payload_qubits(const Payload& p) {
  if (const auto* q = std::get_if<QubitPayload>(&p)) return real_qubits(q->qubits);
  return {};
}

}  // namespace

// Context ------------------------------------------------------------------

Time Context::now() const { return engine_.now_; }
const PartyInfo& Context::info() const { return engine_.parties_.at(self_); }
const PartyInfo& Context::party(PartyId id) const { return engine_.parties_.at(id); }
double Context::c() const { return engine_.c_; }
Rng& Context::rng() { return engine_.rng_; }
EntanglementLedger& Context::ledger() { return engine_.ledger_; }

std::uint64_t Context::send_toward(Position dest, Payload payload, SendOptions opt) {
  if (opt.medium == Medium::Addressed) throw InvalidArgument("send_toward needs an open medium");
  check_custody(payload_qubits(payload));
  return engine_.emit(self_, position(), dest, std::nullopt, std::move(payload), opt.medium, opt.round,
                      std::move(opt.label), kNobody);
}

std::uint64_t Context::send_to(PartyId to, Payload payload, int round, std::string label) {
  check_custody(payload_qubits(payload));
  return engine_.emit(self_, position(), engine_.parties_.at(to).position, to, std::move(payload),
                      Medium::Addressed, round, std::move(label), kNobody);
}

void Context::wake_at(Time t, int tag) {
  if (t + kTolerance < engine_.now_) throw CausalityViolation("cannot schedule work in the past");
  engine_.push({std::max(t, engine_.now_), Engine::EventClass::Compute, self_, self_, 0, 0, tag});
}

Classical Context::open_classical(const Envelope& env) const {
  if (env.receiver != self_ || env.arrives_at > engine_.now_ + kTolerance)
    throw CausalityViolation("opening an envelope that has not been delivered here");
  if (const auto* c = std::get_if<Classical>(&env.payload)) return *c;
  if (const auto* p = std::get_if<PromiseRef>(&env.payload)) {
    auto it = engine_.promises_.find(p->id);
    if (it == engine_.promises_.end()) throw InvalidArgument("unknown promise");
    if (!it->second)
      throw CausalityViolation("promise " + std::to_string(p->id) + " opened before it was resolved");
    return *it->second;
  }
  throw InvalidArgument("envelope does not carry classical data");
}

std::uint64_t Context::make_promise() {
  const auto id = engine_.next_promise_++;
  engine_.promises_[id] = std::nullopt;
  return id;
}

void Context::resolve(std::uint64_t promise, Classical value) {
  auto it = engine_.promises_.find(promise);
  if (it == engine_.promises_.end()) throw InvalidArgument("unknown promise");
  if (it->second) throw InvalidArgument("promise resolved twice");
  it->second = std::move(value);
}

void Context::check_custody(std::span<const QubitId> qs) const {
  for (auto q : qs) {
    if (is_junk(q)) continue;
    auto it = engine_.custody_.find(q);
    if (it == engine_.custody_.end() || it->second != self_)
      throw CausalityViolation(info().name + " acts on qubit " + std::to_string(q.value) +
                               " it does not hold");
  }
}

StateVector& Context::state(std::span<const QubitId> qs) {
  check_custody(qs);
  return engine_.sv_;
}

QubitId Context::alloc(int bit) {
  const auto q = engine_.sv_.alloc(bit);
  engine_.custody_[q] = self_;
  return q;
}

void Context::free(std::span<const QubitId> qs) {
  check_custody(qs);
  const auto real = real_qubits(qs);
  if (real.empty()) return;
  engine_.sv_.free(real, engine_.rng_);
  for (auto q : real) engine_.custody_.erase(q);
}

bool Context::holds(QubitId q) const {
  auto it = engine_.custody_.find(q);
  return it != engine_.custody_.end() && it->second == self_ && engine_.sv_.live(q);
}

void Context::adopt(std::span<const QubitId> qs) {
  for (auto q : real_qubits(qs)) {
    if (!engine_.sv_.live(q)) throw LivenessError("adopting a dead qubit");
    if (engine_.custody_.count(q)) throw CausalityViolation("qubit " + std::to_string(q.value) + " already has a holder");
    engine_.custody_[q] = self_;
  }
}

void Context::pass_private(std::span<const QubitId> qs, PartyId verifier) {
  if (info().role != Role::Verifier || party(verifier).role != Role::Verifier)
    throw CausalityViolation("private channel is only between verifiers");
  check_custody(qs);
  for (auto q : real_qubits(qs)) engine_.custody_[q] = verifier;
}

StateVector& Context::coalition(std::span<const QubitId> qs, PartyId partner) {
  if (info().role != Role::Adversary || party(partner).role != Role::Adversary)
    throw CausalityViolation("coalition access is only between adversaries");
  for (auto q : real_qubits(qs)) {
    auto it = engine_.custody_.find(q);
    if (it == engine_.custody_.end() || (it->second != self_ && it->second != partner))
      throw CausalityViolation(info().name + " coalition acts on qubit " + std::to_string(q.value) +
                               " held outside the coalition");
  }
  return engine_.sv_;
}

void Context::coalition_free(std::span<const QubitId> qs, PartyId partner) {
  coalition(qs, partner);
  std::vector<QubitId> live;
  for (auto q : real_qubits(qs))
    if (engine_.sv_.live(q)) live.push_back(q);
  if (!live.empty()) engine_.sv_.free(live, engine_.rng_);
  for (auto q : real_qubits(qs)) engine_.custody_.erase(q);
}

PortOutcome Context::pbt_send(std::span<const QubitId> src, PortGroup& group, PortStructure structure,
                              bool useful) {
  if (group.sender() != self_) throw InvalidArgument("port group belongs to another sender");
  check_custody(src);
  auto out = qpv::pbt_send(engine_.sv_, src, group, engine_.ledger_, engine_.rng_, now(), position(), structure,
                           useful);
  for (auto q : src) engine_.custody_.erase(q);
  for (auto q : group.all_receiver_qubits()) engine_.custody_[q] = group.receiver();
  return out;
}

std::vector<QubitId> Context::pbt_receive(PortGroup& group, const PortOutcome& outcome) {
  if (group.receiver() != self_) throw InvalidArgument("port group belongs to another receiver");
  return qpv::pbt_receive(engine_.sv_, group, outcome, now(), position(), engine_.rng_, engine_.c_);
}

std::vector<QubitId> Context::nested_discard(PortGroup& group, const PortOutcome& outer, int inner_k) {
  if (group.receiver() != self_) throw InvalidArgument("port group belongs to another receiver");
  return qpv::nested_discard(engine_.sv_, group, outer, inner_k, now(), position(), engine_.rng_, engine_.c_);
}

void Context::self_correct(PortGroup& group, int inner_k) {
  if (group.receiver() != self_) throw InvalidArgument("port group belongs to another receiver");
  qpv::self_correct(engine_.sv_, group, inner_k, engine_.rng_);
}

EprPair Context::share_epr(PartyId other) {
  auto p = make_epr_pair(engine_.sv_, self_, other);
  engine_.custody_[p.a] = self_;
  engine_.custody_[p.b] = other;
  return p;
}

std::vector<Envelope> Context::take_channel() {
  std::vector<Envelope> out;
  auto& ch = engine_.channel_[self_];
  for (auto it = ch.begin(); it != ch.end();) {
    auto& env = engine_.envelopes_.at(*it);
    if (std::abs(env.arrives_at - engine_.now_) <= kTolerance) {
      engine_.hand_over(env, self_);
      engine_.record(self_, "take", "envelope=" + std::to_string(env.id) + " round=" + std::to_string(env.round));
      out.push_back(env);
      it = ch.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

void Context::log(std::string kind, std::string detail) { engine_.record(self_, std::move(kind), std::move(detail)); }

// Engine -------------------------------------------------------------------

Engine::Engine(std::uint64_t seed, int qubit_cap, double c, std::optional<std::uint64_t> entanglement_supply)
    : sv_(qubit_cap), rng_(seed), c_(c), ledger_(entanglement_supply) {
  if (!(c > 0)) throw InvalidArgument("speed of light must be positive");
}

PartyId Engine::add_party(std::string name, Position pos, Role role, Agent* agent) {
  if (running_) throw InvalidArgument("parties must be added before the run");
  const PartyId id = static_cast<PartyId>(parties_.size());
  parties_.push_back({id, std::move(name), pos, role, agent});
  return id;
}

void Engine::add_ticks(PartyId party, const std::vector<Time>& times) {
  for (Time t : times) {
    if (!ticks_[party].insert(t).second) continue;
    push({t, EventClass::Tick, party, party, 0, 0, 0});
  }
}

void Engine::grant(QubitId q, PartyId party) {
  if (!sv_.live(q)) throw InvalidArgument("granting a qubit that does not exist");
  custody_[q] = party;
}

PartyId Engine::find(const std::string& name) const {
  for (const auto& p : parties_)
    if (p.name == name) return p.id;
  return kNobody;
}

std::optional<PartyId> Engine::custodian(QubitId q) const {
  auto it = custody_.find(q);
  if (it == custody_.end()) return std::nullopt;
  return it->second;
}

bool Engine::Later::operator()(const Event& a, const Event& b) const {
  auto key = [](const Event& e) {
    return std::make_tuple(e.time, static_cast<int>(e.cls), e.dest == kNobody ? INT_MAX : e.dest,
                           e.origin == kNobody ? INT_MAX : e.origin, e.seq);
  };
  return key(a) > key(b);
}

void Engine::push(Event e) {
  e.seq = seq_++;
  queue_.push(e);
}

void Engine::record(PartyId who, std::string kind, std::string detail) {
  trace_.push_back({now_, who == kNobody ? std::string("-") : parties_.at(who).name, std::move(kind),
                    std::move(detail)});
}

std::string Engine::describe(const Payload& p) {
  std::ostringstream os;
  if (const auto* c = std::get_if<Classical>(&p)) {
    os << "classical:" << c->kind;
    for (auto v : c->values) os << ' ' << v;
  } else if (const auto* q = std::get_if<QubitPayload>(&p)) {
    os << "qubits:";
    for (auto id : q->qubits) os << ' ' << id.value;
  } else if (const auto* k = std::get_if<PortOutcome>(&p)) {
    os << "port:" << k->k;
  } else if (const auto* pr = std::get_if<PromiseRef>(&p)) {
    os << "promise:" << pr->id;
  }
  return os.str();
}

std::uint64_t Engine::emit(PartyId from, Position from_pos, Position dest, std::optional<PartyId> addressed,
                           Payload payload, Medium medium, int round, std::string label, PartyId skip) {
  Envelope env;
  env.id = next_envelope_++;
  env.source = from;
  env.emitted_at = now_;
  env.emitted_from = from_pos;
  env.destination = dest;
  env.medium = medium;
  env.round = round;
  env.label = std::move(label);
  env.payload = std::move(payload);

  for (auto q : payload_qubits(env.payload)) custody_[q] = kNobody;

  PartyId to = kNobody;
  if (addressed) {
    to = *addressed;
  } else {
    const double lo = std::min(from_pos.x, dest.x), hi = std::max(from_pos.x, dest.x);
    double best = INFINITY;
    for (const auto& p : parties_) {
      if (p.id == from || p.id == skip || !p.agent) continue;
      if (p.position.x < lo - kTolerance || p.position.x > hi + kTolerance) continue;
      const double d = std::abs(p.position.x - from_pos.x);
      if (skip != kNobody && d <= kTolerance) continue;
      if (p.agent->intercepts(env) && d < best - kTolerance) {
        best = d;
        to = p.id;
      }
    }
    if (to == kNobody) {
      for (const auto& p : parties_) {
        if (p.id == from || p.id == skip) continue;
        if (std::abs(p.position.x - dest.x) <= kTolerance) {
          to = p.id;
          break;
        }
      }
    }
  }
  env.receiver = to;
  const Position end = to == kNobody ? dest : parties_.at(to).position;
  env.arrives_at = now_ + arrival_time(from_pos, end, c_);
  record(from, "send",
         "envelope=" + std::to_string(env.id) + " to=" + (to == kNobody ? std::string("lost") : parties_.at(to).name) +
             " arrives=" + fmt_time(env.arrives_at) + " round=" + std::to_string(round) + " label=" + env.label +
             " " + describe(env.payload));
  const auto id = env.id;
  envelopes_.emplace(id, std::move(env));
  push({envelopes_.at(id).arrives_at, EventClass::Arrive, to, from, 0, id, 0});
  return id;
}

void Engine::hand_over(Envelope& env, PartyId to) {
  for (auto q : payload_qubits(env.payload)) custody_[q] = to;
}

void Engine::drop(Envelope& env) {
  const auto qs = payload_qubits(env.payload);
  std::vector<QubitId> live;
  for (auto q : qs)
    if (sv_.live(q)) live.push_back(q);
  if (!live.empty()) sv_.free(live, rng_);
  for (auto q : qs) custody_.erase(q);
  record(kNobody, "lost", "envelope=" + std::to_string(env.id) + " round=" + std::to_string(env.round));
}

void Engine::passthrough(const Event& ev) {
  auto& env = envelopes_.at(ev.envelope);
  const PartyId at = env.receiver;
  record(at, "pass", "envelope=" + std::to_string(env.id) + " round=" + std::to_string(env.round));
  emit(env.source, parties_.at(at).position, env.destination, std::nullopt, env.payload, env.medium, env.round,
       env.label, at);
}

void Engine::deliver(const Event& ev) {
  auto& env = envelopes_.at(ev.envelope);
  if (env.receiver == kNobody) {
    drop(env);
    return;
  }
  const PartyInfo& r = parties_.at(env.receiver);
  const bool tapped = env.medium != Medium::Addressed && r.agent && r.agent->intercepts(env) &&
                      std::holds_alternative<QubitPayload>(env.payload);
  const TapMode mode = tapped ? r.agent->tap_mode() : TapMode::Notify;

  if (mode == TapMode::Detect && env.medium == Medium::Rail) {
    const auto qs = payload_qubits(env.payload);
    bool click = false;
    for (auto q : qs) click = sv_.measure(q, Basis::computational(), rng_).index == 1 || click;
    record(r.id, click ? "click" : "dark", "envelope=" + std::to_string(env.id) + " round=" + std::to_string(env.round));
    if (!click) {
      passthrough(ev);
      return;
    }
  } else if (mode == TapMode::Tick) {
    auto& ts = ticks_[r.id];
    auto it = ts.lower_bound(env.arrives_at - kTolerance);
    if (it != ts.end() && std::abs(*it - env.arrives_at) <= kTolerance) {
      channel_[r.id].push_back(env.id);
      push({now_, EventClass::Passthrough, r.id, env.source, 0, env.id, 0});
    } else {
      passthrough(ev);
    }
    return;
  }

  hand_over(env, r.id);
  record(r.id, "recv", "envelope=" + std::to_string(env.id) + " round=" + std::to_string(env.round) + " " +
                           describe(env.payload));
  if (r.agent) {
    Context ctx(*this, r.id);
    r.agent->on_receive(ctx, env);
  }
}

void Engine::run(Time start, std::size_t max_events) {
  running_ = true;
  now_ = start;
  for (const auto& p : parties_) {
    if (!p.agent) continue;
    Context ctx(*this, p.id);
    p.agent->on_start(ctx);
  }
  std::size_t processed = 0;
  while (!queue_.empty()) {
    if (++processed > max_events) throw LivenessError("event budget exhausted");
    const Event ev = queue_.top();
    queue_.pop();
    if (ev.time + kTolerance < now_) throw CausalityViolation("event scheduled in the past");
    now_ = std::max(now_, ev.time);
    switch (ev.cls) {
      case EventClass::Arrive: deliver(ev); break;
      case EventClass::Tick: {
        const auto& p = parties_.at(ev.dest);
        if (p.agent) {
          Context ctx(*this, p.id);
          p.agent->on_tick(ctx);
        }
        break;
      }
      case EventClass::Compute: {
        const auto& p = parties_.at(ev.dest);
        if (p.agent) {
          Context ctx(*this, p.id);
          p.agent->on_wake(ctx, ev.tag);
        }
        break;
      }
      case EventClass::Passthrough: {
        auto& ch = channel_[ev.dest];
        auto it = std::find(ch.begin(), ch.end(), ev.envelope);
        if (it != ch.end()) {
          ch.erase(it);
          passthrough(ev);
        }
        break;
      }
    }
  }
  running_ = false;
}

std::string Engine::trace_csv() const {
  std::string out = "time,party,kind,detail\n";
  for (const auto& row : trace_)
    out += fmt_time(row.time) + "," + csv_field(row.party) + "," + csv_field(row.kind) + "," +
           csv_field(row.detail, true) + "\n";
  return out;
}

}  // namespace qpv
