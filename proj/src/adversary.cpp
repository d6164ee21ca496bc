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

#include "qpv/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "qpv/errors.hpp"
#include "qpv/optics.hpp"

namespace qpv {

namespace {

long long time_key(Time t) { return std::llround(t * 1e6); }

bool pair_protocol(ProtocolKind k) { return k == ProtocolKind::P2 || k == ProtocolKind::PublicOrderDT; }
bool rail_protocol(ProtocolKind k) { return k == ProtocolKind::P1 || k == ProtocolKind::P3; }

struct Names {
  const char* id;
  Strategy s;
};
constexpr Names kNames[] = {
    {"none", Strategy::None},          {"honest", Strategy::Honest},
    {"displaced", Strategy::Displaced}, {"relay", Strategy::Relay},
    {"which_way", Strategy::WhichWay}, {"general_detect", Strategy::GeneralDetect},
    {"inqc", Strategy::Inqc},          {"attack_i", Strategy::AttackI},
    {"attack_ii", Strategy::AttackII}, {"attack_iii", Strategy::AttackIII},
    {"sinqc", Strategy::Sinqc},
};

// Base for agents that take signals coming from the verifiers.
class Interceptor : public Agent {
 public:
  Interceptor(ProtocolRun& run, int side) : run_(run), side_(side) {}
  bool intercepts(const Envelope& env) const override {
    return env.medium != Medium::Addressed &&
           (env.source == run_.verifier(0) || env.source == run_.verifier(1));
  }

 protected:
  void respond(Context& ctx, int side, int value, int round) {
    ctx.log("respond", "round=" + std::to_string(round) + " value=" + std::to_string(value));
    ctx.send_to(run_.verifier(side), Classical{"response", {value}}, round, "response");
  }
  void broadcast(Context& ctx, int value, int round) {
    respond(ctx, 0, value, round);
    respond(ctx, 1, value, round);
  }

  ProtocolRun& run_;
  int side_;
};

// E0 reads which channel the photon took and lets it continue.
class WhichWayAgent : public Interceptor {
 public:
  using Interceptor::Interceptor;
  bool intercepts(const Envelope& env) const override {
    return env.medium == Medium::Rail && env.source == run_.verifier(0);
  }
  void on_receive(Context& ctx, const Envelope& env) override {
    const auto* q = std::get_if<QubitPayload>(&env.payload);
    if (!q) return;
    const QubitId r = q->qubits.at(0);
    const auto rec = ctx.state(std::span<const QubitId>(&r, 1)).measure(r, Basis::computational(), ctx.rng());
    ctx.log("which_way", "round=" + std::to_string(env.round) + " occupied=" + rec.outcome);
    ctx.send_toward(env.destination, *q, {Medium::Rail, env.round, "forward"});
  }
};

// A lone responder at E0 that has to guess the basis.
class DisplacedAgent : public Interceptor {
 public:
  using Interceptor::Interceptor;
  void on_receive(Context& ctx, const Envelope& env) override {
    const auto* q = std::get_if<QubitPayload>(&env.payload);
    if (!q) return;
    const QubitId a = q->qubits.at(0);
    const bool x = ctx.rng().coin();
    const auto rec = ctx.state(std::span<const QubitId>(&a, 1))
                         .measure(a, x ? Basis::hadamard() : Basis::computational(), ctx.rng());
    ctx.free(std::span<const QubitId>(&a, 1));
    broadcast(ctx, static_cast<int>(rec.index), count_++);
  }

 private:
  int count_ = 0;
};

// Acts only on a click. The rail that clicked carries no phase any more, so
// the best the clicker can do is send it through a beam splitter alone.
class DetectRailAgent : public Interceptor {
 public:
  using Interceptor::Interceptor;
  TapMode tap_mode() const override { return TapMode::Detect; }
  bool intercepts(const Envelope& env) const override {
    return env.medium == Medium::Rail && Interceptor::intercepts(env);
  }
  void on_receive(Context& ctx, const Envelope& env) override {
    const auto* q = std::get_if<QubitPayload>(&env.payload);
    if (!q) return;
    const QubitId rail = q->qubits.at(0);
    const QubitId vac = ctx.alloc(0);
    const optics::DualRail dr = side_ == 0 ? optics::DualRail{rail, vac} : optics::DualRail{vac, rail};
    const std::array<QubitId, 2> qs{rail, vac};
    const auto d = optics::interfere_and_detect(ctx.state(qs), dr, ctx.rng());
    broadcast(ctx, detection_value(d), count_++);
  }

 private:
  int count_ = 0;
};

// Forwarding without entanglement: E0 ships everything to E1, who plays the
// prover and reports back.
struct RelayShared {
  std::map<long long, Envelope> held;  // E1's captures by time
  std::map<long long, Envelope> forwarded;
  int count = 0;
  std::array<PartyId, 2> ids{kNobody, kNobody};
};

class RelayAgent : public Interceptor {
 public:
  RelayAgent(ProtocolRun& run, int side, RelayShared& shared) : Interceptor(run, side), shared_(shared) {}

  void on_receive(Context& ctx, const Envelope& env) override {
    const bool from_verifier = env.source == run_.verifier(0) || env.source == run_.verifier(1);
    if (side_ == 0) {
      if (from_verifier) {
        ctx.send_to(partner(), env.payload, env.round, "relay");
      } else if (const auto* c = std::get_if<Classical>(&env.payload); c && c->kind == "result") {
        respond(ctx, 0, static_cast<int>(c->values.at(0)), static_cast<int>(c->values.at(1)));
      }
      return;
    }
    const long long key = time_key(from_verifier ? ctx.now() : env.emitted_at);
    (from_verifier ? shared_.held : shared_.forwarded)[key] = env;
    if (!shared_.held.count(key) || !shared_.forwarded.count(key)) return;
    const int value = operate(ctx, shared_.forwarded.at(key), shared_.held.at(key));
    shared_.held.erase(key);
    shared_.forwarded.erase(key);
    const int round = shared_.count++;
    respond(ctx, 1, value, round);
    ctx.send_to(partner(), Classical{"result", {value, round}}, round, "result");
  }

 private:
  int operate(Context& ctx, const Envelope& from0, const Envelope& from1) {
    if (run_.script().config.kind == ProtocolKind::Baseline) {
      const QubitId a = std::get<QubitPayload>(from0.payload).qubits.at(0);
      const int b = static_cast<int>(std::get<Classical>(from1.payload).values.at(0));
      const auto rec = ctx.state(std::span<const QubitId>(&a, 1))
                           .measure(a, b == 1 ? Basis::hadamard() : Basis::computational(), ctx.rng());
      ctx.free(std::span<const QubitId>(&a, 1));
      return static_cast<int>(rec.index);
    }
    const optics::DualRail dr{std::get<QubitPayload>(from0.payload).qubits.at(0),
                              std::get<QubitPayload>(from1.payload).qubits.at(0)};
    const std::array<QubitId, 2> qs{dr.upper, dr.lower};
    return detection_value(optics::interfere_and_detect(ctx.state(qs), dr, ctx.rng()));
  }

  PartyId partner() const { return shared_.ids[1 - side_]; }

  RelayShared& shared_;
};

// INQC on the baseline: E0 port-teleports the qubit, E1 port-teleports the
// received ports together with the basis, E0 undoes her own scrambling and
// measures every port; the right port is picked once its index arrives.
struct InqcSlot {
  int index = 0;
  Time meeting = 0;
  std::unique_ptr<PortGroup> g1, g2;
  PortOutcome out0, out1;
  bool relay = false;
  std::optional<int> basis;
  bool sent_back = false;
  bool retried = false;
  std::vector<int> results;
};

struct InqcShared {
  PbtMode mode = PbtMode::Ideal;
  int ports = 1;
  std::array<PartyId, 2> ids{kNobody, kNobody};
  std::map<long long, InqcSlot> slots;  // by meeting time
  std::map<std::uint64_t, long long> envelopes;
  int count = 0;

  InqcSlot& slot(Time meeting) {
    auto it = slots.find(time_key(meeting));
    if (it != slots.end()) return it->second;
    auto& s = slots[time_key(meeting)];
    s.meeting = meeting;
    s.index = count++;
    return s;
  }
};

class InqcAgent : public Interceptor {
 public:
  InqcAgent(ProtocolRun& run, int side, InqcShared& shared) : Interceptor(run, side), s_(shared) {}

  void on_receive(Context& ctx, const Envelope& env) override {
    const auto& g = run_.script().geometry;
    const bool from_verifier = env.source == run_.verifier(0) || env.source == run_.verifier(1);
    if (from_verifier) {
      const Time meeting = ctx.now() + std::abs(g.p - ctx.position().x) / g.c;
      if (side_ == 0) capture_qubit(ctx, s_.slot(meeting), std::get<QubitPayload>(env.payload).qubits.at(0));
      else capture_basis(ctx, s_.slot(meeting), static_cast<int>(std::get<Classical>(env.payload).values.at(0)));
      return;
    }
    auto it = s_.envelopes.find(env.id);
    if (it == s_.envelopes.end()) return;
    InqcSlot& slot = s_.slots.at(it->second);
    if (const auto* out = std::get_if<PortOutcome>(&env.payload)) {
      if (side_ == 0 && env.label == "n1") {
        const auto kept = ctx.pbt_receive(*slot.g2, *out);
        respond(ctx, 0, slot.results.at(out->k - 1), slot.index);
        ctx.free(real_qubits(kept));
      }
    } else if (const auto* c = std::get_if<Classical>(&env.payload)) {
      if (c->kind == "L") respond(ctx, 1, static_cast<int>(c->values.at(slot.out1.k - 1)), slot.index);
      if (c->kind == "result") respond(ctx, 0, static_cast<int>(c->values.at(0)), slot.index);
    } else if (const auto* q = std::get_if<QubitPayload>(&env.payload)) {
      // Relayed qubit without entanglement.
      slot.g1.reset();
      relay_measure(ctx, slot, q->qubits.at(0));
    }
  }

  void on_wake(Context& ctx, int tag) override {
    for (auto& [key, slot] : s_.slots) {
      if (slot.index != tag) continue;
      if (side_ == 1) send_back(ctx, slot);
      else measure_ports(ctx, slot);
    }
  }

 private:
  Time capture_time(const InqcSlot& slot, int side) const {
    const auto& g = run_.script().geometry;
    return slot.meeting - std::abs(g.p - (side == 0 ? g.e0 : g.e1)) / g.c;
  }

  int return_ports() const { return s_.mode == PbtMode::Exact ? 1 : s_.ports; }

  void capture_qubit(Context& ctx, InqcSlot& slot, QubitId a) {
    const std::uint64_t need = static_cast<std::uint64_t>(s_.ports + return_ports());
    if (!ctx.ledger().can_consume(need)) {
      slot.relay = true;
      ctx.log("relay", "round=" + std::to_string(slot.index));
      s_.envelopes[ctx.send_to(s_.ids[1], QubitPayload{{a}}, slot.index, "relay")] = time_key(slot.meeting);
      return;
    }
    slot.g1 = std::make_unique<PortGroup>(s_.mode, s_.ports, ctx.self(), s_.ids[1]);
    slot.out0 = ctx.pbt_send(std::span<const QubitId>(&a, 1), *slot.g1);
    s_.envelopes[ctx.send_to(s_.ids[1], slot.out0, slot.index, "n0")] = time_key(slot.meeting);
    ctx.wake_at(std::max(ctx.now(), capture_time(slot, 1)), slot.index);
  }

  void capture_basis(Context& ctx, InqcSlot& slot, int b) {
    slot.basis = b;
    if (slot.relay) return;
    if (slot.g1) send_back(ctx, slot);
    else ctx.wake_at(std::max(ctx.now(), capture_time(slot, 0)), slot.index);
  }

  void send_back(Context& ctx, InqcSlot& slot) {
    if (slot.relay || slot.sent_back || !slot.g1 || !slot.basis) return;
    slot.sent_back = true;
    std::vector<QubitId> src = slot.g1->layout();
    const int inner_width = slot.g1->width();
    src.push_back(ctx.alloc(*slot.basis));
    const PbtMode mode2 = s_.mode == PbtMode::Exact ? PbtMode::Ideal : s_.mode;
    slot.g2 = std::make_unique<PortGroup>(mode2, return_ports(), ctx.self(), s_.ids[0]);
    slot.out1 = ctx.pbt_send(src, *slot.g2, {s_.ports, inner_width});
    s_.envelopes[ctx.send_to(s_.ids[0], slot.out1, slot.index, "n1")] = time_key(slot.meeting);
  }

  void measure_ports(Context& ctx, InqcSlot& slot) {
    if (slot.relay || !slot.results.empty()) return;
    if (!slot.g2 || slot.g2->state() != PortGroup::State::Sent) {
      // E1 acts at this same instant; let her go first.
      if (slot.retried) throw CausalityViolation("return teleportation missing when E0 measures");
      slot.retried = true;
      ctx.wake_at(ctx.now(), slot.index);
      return;
    }
    ctx.self_correct(*slot.g2, slot.out0.k);
    std::vector<std::int64_t> values;
    for (int j = 1; j <= slot.g2->size(); ++j) {
      const auto& reg = slot.g2->port(j);
      int value;
      if (reg.size() == 2 && !is_junk(reg[0]) && !is_junk(reg[1])) {
        auto& sv = ctx.state(reg);
        const int b = static_cast<int>(sv.measure(reg[1], Basis::computational(), ctx.rng()).index);
        value = static_cast<int>(sv.measure(reg[0], b == 1 ? Basis::hadamard() : Basis::computational(),
                                            ctx.rng())
                                     .index);
      } else {
        value = static_cast<int>(ctx.rng().below(2));
      }
      slot.results.push_back(value);
      values.push_back(value);
    }
    s_.envelopes[ctx.send_to(s_.ids[1], Classical{"L", values}, slot.index, "L")] = time_key(slot.meeting);
  }

  void relay_measure(Context& ctx, InqcSlot& slot, QubitId a) {
    const int b = slot.basis.value_or(0);
    const auto rec = ctx.state(std::span<const QubitId>(&a, 1))
                         .measure(a, b == 1 ? Basis::hadamard() : Basis::computational(), ctx.rng());
    ctx.free(std::span<const QubitId>(&a, 1));
    const int value = static_cast<int>(rec.index);
    respond(ctx, 1, value, slot.index);
    s_.envelopes[ctx.send_to(s_.ids[0], Classical{"result", {value}}, slot.index, "result")] =
        time_key(slot.meeting);
  }

  InqcShared& s_;
};

// Drives one side of a Chain from captures, ticks or a public schedule.
class ChainAgent : public Interceptor {
 public:
  enum class Drive { Detect, Tick, Schedule };

  ChainAgent(ProtocolRun& run, int side, Chain& chain, Drive drive) : Interceptor(run, side), chain_(chain), drive_(drive) {}

  TapMode tap_mode() const override {
    return drive_ == Drive::Tick ? TapMode::Tick : drive_ == Drive::Detect ? TapMode::Detect : TapMode::Notify;
  }
  bool intercepts(const Envelope& env) const override {
    return Interceptor::intercepts(env) && std::holds_alternative<QubitPayload>(env.payload);
  }

  std::map<long long, int> keys;  // capture time -> pairing key (scheduled drive)
  std::vector<Time> empties;      // scheduled empty steps

  void on_start(Context& ctx) override {
    for (std::size_t i = 0; i < empties.size(); ++i) ctx.wake_at(empties[i], static_cast<int>(i));
  }

  void on_receive(Context& ctx, const Envelope& env) override {
    const bool from_verifier = env.source == run_.verifier(0) || env.source == run_.verifier(1);
    if (!from_verifier) {
      chain_.on_receive(ctx, side_, env);
      return;
    }
    const auto& q = std::get<QubitPayload>(env.payload);
    int key = -1;
    if (drive_ == Drive::Schedule) {
      auto it = keys.find(time_key(ctx.now()));
      key = it == keys.end() ? -1 - static_cast<int>(env.id) : it->second;
    } else {
      key = count_++;
    }
    chain_.step(ctx, side_, q.qubits, key);
  }

  void on_tick(Context& ctx) override {
    auto got = ctx.take_channel();
    if (got.empty()) {
      chain_.step(ctx, side_, {});
      return;
    }
    for (const auto& env : got) chain_.step(ctx, side_, std::get<QubitPayload>(env.payload).qubits);
  }

  void on_wake(Context& ctx, int) override { chain_.step(ctx, side_, {}); }

 private:
  Chain& chain_;
  Drive drive_;
  int count_ = 0;
};

class Installed : public AdversaryRun {
 public:
  std::vector<std::unique_ptr<Agent>> agents;
  std::unique_ptr<Chain> chain;
  std::unique_ptr<RelayShared> relay;
  std::unique_ptr<InqcShared> inqc;
  void set_note(std::string n) { note_ = std::move(n); }
};

}  // namespace

std::string to_string(Strategy s) {
  for (const auto& n : kNames)
    if (n.s == s) return n.id;
  return "?";
}

Strategy strategy_from_string(const std::string& s) {
  for (const auto& n : kNames)
    if (s == n.id) return n.s;
  throw ConfigError("unknown strategy '" + s + "'");
}

bool uses_honest_prover(Strategy s) { return s == Strategy::Honest || s == Strategy::WhichWay; }

void AdversaryConfig::validate(ProtocolKind protocol, const Geometry& geo) const {
  const auto region = geo.secure_region();
  if (region.contains({geo.e0}) || region.contains({geo.e1}))
    throw ConfigError("adversaries may not stand inside the secure region");
  if (ports < 1) throw ConfigError("ports must be at least 1");
  if (mode == PbtMode::Exact && ports > kMaxExactPorts) throw ConfigError("exact mode supports at most 4 ports");
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw ConfigError(to_string(strategy) + " does not apply to " + to_string(protocol) + ": " + what);
  };
  switch (strategy) {
    case Strategy::None:
    case Strategy::Honest: break;
    case Strategy::Displaced: need(protocol == ProtocolKind::Baseline, "baseline only"); break;
    case Strategy::Relay: need(!pair_protocol(protocol), "needs one signal from each side"); break;
    case Strategy::WhichWay: need(rail_protocol(protocol), "needs dual-rail signals"); break;
    case Strategy::GeneralDetect: break;
    case Strategy::Inqc: need(protocol == ProtocolKind::Baseline, "baseline only"); break;
    case Strategy::AttackI: need(pair_protocol(protocol), "needs paired signals"); break;
    case Strategy::AttackIII: need(protocol == ProtocolKind::P3, "two proving points only"); [[fallthrough]];
    case Strategy::AttackII:
    case Strategy::Sinqc:
      need(protocol != ProtocolKind::Baseline, "needs quantum challenges on both sides");
      if (!(tick > 0)) throw ConfigError("tick must be positive");
      break;
  }
  if (naive && strategy != Strategy::AttackIII) throw ConfigError("naive applies to attack_iii only");
  if (shuffled && strategy != Strategy::AttackI) throw ConfigError("shuffled applies to attack_i only");
  if (mode == PbtMode::Exact && strategy != Strategy::Inqc &&
      !(strategy == Strategy::GeneralDetect && protocol == ProtocolKind::Baseline))
    throw ConfigError("exact port-based teleportation is only used for single-hop INQC");
}

LedgerReport ledger_report(const EntanglementLedger& ledger) {
  return {ledger.consumed(), ledger.useful(), ledger.waste_fraction()};
}

std::vector<Time> adversary_ticks(const Script& script, const AdversaryConfig& cfg) {
  const auto& g = script.geometry;
  Time lo = kNever, hi = -kNever;
  for (const auto& s : script.signals) {
    const Time t = script.passes(s, s.side == 0 ? g.e0 : g.e1);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  return tick_schedule(cfg.tick, cfg.tick_start.value_or(lo), cfg.tick_end.value_or(hi));
}

std::unique_ptr<AdversaryRun> install_adversary(Engine& engine, ProtocolRun& run, const AdversaryConfig& cfg) {
  const Script& script = run.script();
  const auto& g = script.geometry;
  const auto kind = script.config.kind;
  cfg.validate(kind, g);
  auto out = std::make_unique<Installed>();
  const std::array<PartyId, 2> verifiers{run.verifier(0), run.verifier(1)};

  auto add = [&](int side, std::unique_ptr<Agent> a) {
    out->agents.push_back(std::move(a));
    return engine.add_party(side == 0 ? "E0" : "E1", {side == 0 ? g.e0 : g.e1}, Role::Adversary,
                            out->agents.back().get());
  };

  auto install_chain = [&](ChainOptions opt, ChainAgent::Drive drive) {
    out->chain = std::make_unique<Chain>(opt);
    std::array<PartyId, 2> ids{};
    std::array<ChainAgent*, 2> agents{};
    for (int side = 0; side < 2; ++side) {
      auto a = std::make_unique<ChainAgent>(run, side, *out->chain, drive);
      agents[side] = a.get();
      ids[side] = add(side, std::move(a));
    }
    out->chain->bind(ids, verifiers);
    if (drive == ChainAgent::Drive::Tick) {
      const auto ticks = adversary_ticks(script, cfg);
      engine.add_ticks(ids[0], ticks);
      engine.add_ticks(ids[1], ticks);
    }
    return agents;
  };

  auto tick_rule = [&]() {
    ChainOptions opt;
    opt.op = pair_protocol(kind) ? PairOp::Bell : PairOp::Interfere;
    opt.rule = pair_protocol(kind) ? MatchRule::ConsecutiveReal
               : kind == ProtocolKind::P3 ? MatchRule::TwoPoint
                                          : MatchRule::SameTick;
    opt.two_point_delay = 2 * g.l_pp / g.c;
    opt.naive = cfg.naive;
    return opt;
  };

  switch (cfg.strategy) {
    case Strategy::None:
    case Strategy::Honest: break;
    case Strategy::WhichWay: add(0, std::make_unique<WhichWayAgent>(run, 0)); break;
    case Strategy::Displaced: add(0, std::make_unique<DisplacedAgent>(run, 0)); break;
    case Strategy::Relay: {
      out->relay = std::make_unique<RelayShared>();
      out->relay->ids[0] = add(0, std::make_unique<RelayAgent>(run, 0, *out->relay));
      out->relay->ids[1] = add(1, std::make_unique<RelayAgent>(run, 1, *out->relay));
      break;
    }
    case Strategy::Inqc:
    case Strategy::GeneralDetect:
      if (kind == ProtocolKind::Baseline || cfg.strategy == Strategy::Inqc) {
        out->inqc = std::make_unique<InqcShared>();
        out->inqc->mode = cfg.mode;
        out->inqc->ports = cfg.ports;
        out->inqc->ids[0] = add(0, std::make_unique<InqcAgent>(run, 0, *out->inqc));
        out->inqc->ids[1] = add(1, std::make_unique<InqcAgent>(run, 1, *out->inqc));
      } else if (rail_protocol(kind)) {
        add(0, std::make_unique<DetectRailAgent>(run, 0));
        add(1, std::make_unique<DetectRailAgent>(run, 1));
      } else {
        ChainOptions opt;
        opt.rule = MatchRule::Keyed;
        opt.op = PairOp::Bell;
        install_chain(opt, ChainAgent::Drive::Detect);
      }
      break;
    case Strategy::AttackI: {
      std::vector<OrderedEntry> order;
      try {
        order = normalize_order(script, kind == ProtocolKind::PublicOrderDT ? Knowledge::Public : Knowledge::Private);
      } catch (const InsufficientKnowledge& e) {
        out->set_note(std::string("refused: ") + e.what());
        break;
      }
      ChainOptions opt;
      opt.rule = MatchRule::Keyed;
      opt.op = PairOp::Bell;
      auto agents = install_chain(opt, ChainAgent::Drive::Schedule);
      std::vector<int> key_of(script.signals.size());
      for (const auto& s : script.signals) key_of[s.id] = s.round;
      if (cfg.shuffled) {
        // Pair the signals up at random instead of by the real order.
        std::vector<int> ids(script.signals.size());
        std::iota(ids.begin(), ids.end(), 0);
        for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[engine.rng().below(i)]);
        for (std::size_t i = 0; i < ids.size(); ++i) key_of[ids[i]] = static_cast<int>(i / 2);
      }
      for (const auto& e : order) {
        const double ex = e.side == 0 ? g.e0 : g.e1;
        const Time at_e = e.at_meeting - std::abs(g.p - ex) / g.c;
        if (e.empty()) agents[e.side]->empties.push_back(at_e);
        else agents[e.side]->keys[time_key(at_e)] = key_of[e.signal];
      }
      break;
    }
    case Strategy::AttackII:
    case Strategy::AttackIII:
    case Strategy::Sinqc: install_chain(tick_rule(), ChainAgent::Drive::Tick); break;
  }
  return out;
}

}  // namespace qpv
