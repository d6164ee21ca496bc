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

#include "qpv/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qpv/errors.hpp"

namespace qpv {

namespace {

bool on_lattice(double v, double lattice) {
  const double r = v / lattice;
  return std::abs(r - std::round(r)) < 1e-9;
}

bool pair_protocol(ProtocolKind k) { return k == ProtocolKind::P2 || k == ProtocolKind::PublicOrderDT; }
bool rail_protocol(ProtocolKind k) { return k == ProtocolKind::P1 || k == ProtocolKind::P3; }

long long time_key(Time t) { return std::llround(t * 1e6); }

}  // namespace

void Geometry::validate() const {
  if (!(c > 0)) throw ConfigError("speed of light must be positive");
  if (!(secure_radius > 0)) throw ConfigError("secure radius must be positive");
  if (!(v0 < e0 && e0 < p - secure_radius && p + secure_radius < e1 && e1 < v1))
    throw ConfigError("layout must be V0 < E0 < secure region < E1 < V1");
  if (!(l_pp >= 0) || !secure_region().contains({p0()}))
    throw ConfigError("both proving points must lie inside the secure region");
}

std::string to_string(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::Baseline: return "baseline";
    case ProtocolKind::P1: return "p1";
    case ProtocolKind::P2: return "p2";
    case ProtocolKind::PublicOrderDT: return "public_dt";
    case ProtocolKind::P3: return "p3";
  }
  return "?";
}

ProtocolKind protocol_from_string(const std::string& s) {
  for (auto k : {ProtocolKind::Baseline, ProtocolKind::P1, ProtocolKind::P2, ProtocolKind::PublicOrderDT,
                 ProtocolKind::P3})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown protocol '" + s + "'");
}

void ProtocolConfig::validate() const {
  if (rounds < 1) throw ConfigError("rounds must be at least 1");
  if (!(lattice > 0)) throw ConfigError("lattice spacing must be positive");
  if (!(epsilon >= 0)) throw ConfigError("epsilon must be non-negative");
  if (!on_lattice(first, lattice)) throw ConfigError("first meeting time must lie on the lattice");
  if (kind == ProtocolKind::Baseline) {
    if (!(period > 0) || !on_lattice(period, lattice)) throw ConfigError("period must be a positive lattice multiple");
    return;
  }
  if (!(rate > 0)) throw ConfigError("rate must be positive");
  if (!(g_min > 0) || !on_lattice(g_min, lattice)) throw ConfigError("g_min must be a positive lattice multiple");
  if (pair_protocol(kind)) {
    if (!(g_adj > 0) || !on_lattice(g_adj, lattice)) throw ConfigError("g_adj must be a positive lattice multiple");
    if (!(g_adj < g_min)) throw ConfigError("pairs must be tighter than the gap between pairs (g_adj < g_min)");
  }
}

Time Script::passes(const SignalSpec& s, double x) const {
  const double from = s.side == 0 ? geometry.v0 : geometry.v1;
  return s.emit + std::abs(x - from) / geometry.c;
}

std::vector<Time> random_meeting_times(int count, Time first, Time g_min, double rate, Time lattice, Time extra,
                                       Rng& rng) {
  std::vector<Time> out;
  Time t = first;
  for (int i = 0; i < count; ++i) {
    out.push_back(t);
    const double wait = -std::log(1.0 - rng.uniform()) / rate;
    t += g_min + extra + std::ceil(wait / lattice) * lattice;
  }
  return out;
}

Script generate_script(const ProtocolConfig& cfg, const Geometry& geo, Rng& rng) {
  cfg.validate();
  geo.validate();
  Script s;
  s.config = cfg;
  s.geometry = geo;

  auto add_signal = [&](RoundSpec& r, int side, Time at, double x, bool classical) {
    SignalSpec sig;
    sig.id = static_cast<int>(s.signals.size());
    sig.side = side;
    sig.at_meeting = at;
    sig.meeting_x = x;
    sig.emit = at - std::abs(x - (side == 0 ? geo.v0 : geo.v1)) / geo.c;
    sig.round = r.index;
    sig.member = static_cast<int>(r.signals.size());
    sig.classical = classical;
    r.signals.push_back(sig.id);
    s.signals.push_back(sig);
  };

  std::vector<Time> times;
  if (cfg.kind == ProtocolKind::Baseline) {
    for (int i = 0; i < cfg.rounds; ++i) times.push_back(cfg.first + i * cfg.period);
  } else {
    times = random_meeting_times(cfg.rounds, cfg.first, cfg.g_min, cfg.rate, cfg.lattice,
                                 pair_protocol(cfg.kind) ? cfg.g_adj : 0.0, rng);
  }

  double x = geo.p;
  for (int i = 0; i < cfg.rounds; ++i) {
    RoundSpec r;
    r.index = i;
    const Time t = times[i];
    switch (cfg.kind) {
      case ProtocolKind::Baseline:
        r.basis = static_cast<int>(rng.below(2));
        r.expected = static_cast<int>(rng.below(2));
        r.meeting_x = geo.p;
        add_signal(r, 0, t, r.meeting_x, false);
        add_signal(r, 1, t, r.meeting_x, true);
        r.complete = t;
        break;
      case ProtocolKind::P1:
      case ProtocolKind::P3:
        r.expected = static_cast<int>(rng.below(2));
        r.meeting_x = cfg.kind == ProtocolKind::P1 ? geo.p : x;
        add_signal(r, 0, t, r.meeting_x, false);
        add_signal(r, 1, t, r.meeting_x, false);
        r.complete = t;
        // D0 moves the next round to P0, D1 to P1.
        x = r.expected == 0 ? geo.p0() : geo.p1();
        break;
      case ProtocolKind::P2:
      case ProtocolKind::PublicOrderDT: {
        r.group = static_cast<int>(rng.below(4));
        r.expected = static_cast<int>(rng.below(4));
        r.meeting_x = geo.p;
        const int first_side = r.group >= 2 ? 1 : 0;
        const int second_side = (r.group == 1 || r.group == 3) ? 1 : 0;
        add_signal(r, first_side, t, r.meeting_x, false);
        add_signal(r, second_side, t + cfg.g_adj, r.meeting_x, false);
        r.complete = t + cfg.g_adj;
        break;
      }
    }
    r.deadline = {r.complete + (r.meeting_x - geo.v0) / geo.c, r.complete + (geo.v1 - r.meeting_x) / geo.c};
    s.rounds.push_back(std::move(r));
  }
  return s;
}

std::vector<OrderedEntry> normalize_order(const Script& script, Knowledge knowledge) {
  if (knowledge == Knowledge::Private)
    throw InsufficientKnowledge("signal order is private; empty signals cannot be placed");
  std::vector<int> ids(script.signals.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
    const auto& sa = script.signals[a];
    const auto& sb = script.signals[b];
    if (sa.at_meeting != sb.at_meeting) return sa.at_meeting < sb.at_meeting;
    return sa.side < sb.side;
  });
  std::vector<OrderedEntry> out;
  for (int id : ids) {
    const auto& sig = script.signals[id];
    if (out.empty() && sig.side == 1) out.push_back({0, -1, sig.at_meeting});
    if (!out.empty() && out.back().side == sig.side) out.push_back({1 - sig.side, -1, out.back().at_meeting});
    out.push_back({sig.side, sig.id, sig.at_meeting});
  }
  if (!out.empty() && out.back().side == 0) out.push_back({1, -1, out.back().at_meeting});
  return out;
}

Verdict judge(const Script& script, const std::array<std::vector<ResponseRecord>, 2>& responses) {
  const double eps = script.config.epsilon;
  Verdict v;
  v.rounds.resize(script.rounds.size());
  std::vector<std::array<bool, 2>> answered(script.rounds.size(), {false, false});
  std::vector<std::array<bool, 2>> ok(script.rounds.size(), {false, false});
  std::vector<std::array<bool, 2>> in_time(script.rounds.size(), {false, false});
  bool extra = false;

  for (int side = 0; side < 2; ++side) {
    std::vector<int> order(script.rounds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return script.rounds[a].deadline[side] < script.rounds[b].deadline[side];
    });
    auto resp = responses[side];
    std::stable_sort(resp.begin(), resp.end(),
                     [](const ResponseRecord& a, const ResponseRecord& b) { return a.arrival < b.arrival; });
    if (resp.size() > order.size()) extra = true;
    for (std::size_t i = 0; i < order.size() && i < resp.size(); ++i) {
      const auto& r = script.rounds[order[i]];
      const Time late = resp[i].arrival - r.deadline[side];
      answered[order[i]][side] = true;
      ok[order[i]][side] = resp[i].value == r.expected;
      in_time[order[i]][side] = late <= eps + kTolerance;
      auto& rv = v.rounds[order[i]];
      rv.lateness = std::max(rv.lateness, std::max(0.0, late));
    }
  }

  v.accept = !extra;
  if (extra) v.reason = "more responses than rounds";
  for (std::size_t i = 0; i < v.rounds.size(); ++i) {
    auto& rv = v.rounds[i];
    rv.round = static_cast<int>(i);
    rv.answered = answered[i][0] && answered[i][1];
    rv.correct = ok[i][0] && ok[i][1];
    rv.timely = rv.answered && in_time[i][0] && in_time[i][1];
    v.max_lateness = std::max(v.max_lateness, rv.lateness);
    if (!(rv.correct && rv.timely) && v.accept) {
      v.accept = false;
      v.reason = "round " + std::to_string(i) + (!rv.answered ? " unanswered" : !rv.timely ? " late" : " wrong");
    }
  }
  return v;
}

int detection_value(optics::Detection d) {
  switch (d) {
    case optics::Detection::D0: return 0;
    case optics::Detection::D1: return 1;
    case optics::Detection::NoClick: return 2;
  }
  return 2;
}

// Agents -------------------------------------------------------------------

class ProtocolRun::VerifierAgent : public Agent {
 public:
  VerifierAgent(ProtocolRun& run, int side) : run_(run), side_(side) {}

  void on_start(Context& ctx) override {
    for (const auto& s : run_.script_.signals)
      if (s.side == side_) ctx.wake_at(s.emit, s.id);
  }

  void on_wake(Context& ctx, int id) override {
    const auto& s = run_.script_.signals.at(id);
    const auto& r = run_.script_.rounds.at(s.round);
    const Position dest{s.meeting_x};
    if (s.classical) {
      ctx.send_toward(dest, Classical{"basis", {r.basis}}, {Medium::Open, r.index, "challenge"});
      return;
    }
    if (!run_.prepared_.count(id)) run_.prepare_round(ctx, s.round);
    const Medium m = rail_protocol(run_.script_.config.kind) ? Medium::Rail : Medium::Open;
    ctx.send_toward(dest, QubitPayload{run_.prepared_.at(id)}, {m, r.index, "challenge"});
    run_.prepared_.erase(id);
  }

  void on_receive(Context& ctx, const Envelope& env) override {
    if (const auto* c = std::get_if<Classical>(&env.payload)) {
      if (c->kind == "response" && !c->values.empty())
        run_.responses_[side_].push_back({ctx.now(), static_cast<int>(c->values[0])});
      return;
    }
    if (const auto* q = std::get_if<QubitPayload>(&env.payload)) ctx.free(q->qubits);
  }

 private:
  ProtocolRun& run_;
  int side_;
};

class ProtocolRun::ProverAgent : public Agent {
 public:
  ProverAgent(ProtocolRun& run) : run_(run) {}

  void on_receive(Context& ctx, const Envelope& env) override {
    const int side = env.emitted_from.x < ctx.position().x ? 0 : 1;
    const auto kind = run_.script_.config.kind;
    const long long key = time_key(ctx.now());
    if (const auto* c = std::get_if<Classical>(&env.payload)) {
      if (c->kind == "basis" && !c->values.empty()) basis_[key] = static_cast<int>(c->values[0]);
    } else if (const auto* q = std::get_if<QubitPayload>(&env.payload)) {
      if (pair_protocol(kind)) {
        queue_.push_back(q->qubits.at(0));
      } else {
        held_[key][side] = q->qubits.at(0);
        has_[key][side] = true;
      }
    } else {
      return;
    }
    act(ctx, key);
  }

 private:
  void act(Context& ctx, long long key) {
    const auto kind = run_.script_.config.kind;
    if (kind == ProtocolKind::Baseline) {
      if (!basis_.count(key) || !has_[key][0]) return;
      const QubitId q = held_[key][0];
      const int b = basis_[key];
      const auto rec = ctx.state(std::span<const QubitId>(&q, 1))
                           .measure(q, b == 1 ? Basis::hadamard() : Basis::computational(), ctx.rng());
      ctx.free(std::span<const QubitId>(&q, 1));
      basis_.erase(key);
      held_.erase(key);
      has_.erase(key);
      broadcast(ctx, static_cast<int>(rec.index));
    } else if (rail_protocol(kind)) {
      if (!has_[key][0] || !has_[key][1]) return;
      const optics::DualRail dr{held_[key][0], held_[key][1]};
      const std::array<QubitId, 2> qs{dr.upper, dr.lower};
      const auto d = optics::interfere_and_detect(ctx.state(qs), dr, ctx.rng());
      held_.erase(key);
      has_.erase(key);
      broadcast(ctx, detection_value(d));
    } else {
      if (queue_.size() < 2) return;
      const std::array<QubitId, 2> qs{queue_[0], queue_[1]};
      queue_.clear();
      const auto rec = ctx.state(qs).measure(qs, Basis::bell(), ctx.rng());
      ctx.free(qs);
      broadcast(ctx, static_cast<int>(rec.index));
    }
  }

  void broadcast(Context& ctx, int value) {
    const int round = run_.completions_++;
    const auto& g = run_.script_.geometry;
    ctx.log("respond", "round=" + std::to_string(round) + " value=" + std::to_string(value));
    ctx.send_toward({g.v0}, Classical{"response", {value}}, {Medium::Open, round, "response"});
    ctx.send_toward({g.v1}, Classical{"response", {value}}, {Medium::Open, round, "response"});
  }

  ProtocolRun& run_;
  std::map<long long, std::array<QubitId, 2>> held_;
  std::map<long long, std::array<bool, 2>> has_;
  std::map<long long, int> basis_;
  std::vector<QubitId> queue_;
};

ProtocolRun::ProtocolRun(Engine& engine, Script script, bool honest_prover)
    : engine_(engine), script_(std::move(script)) {
  const auto& g = script_.geometry;
  for (int side = 0; side < 2; ++side) {
    agents_.push_back(std::make_unique<VerifierAgent>(*this, side));
    verifiers_[side] = engine_.add_party(side == 0 ? "V0" : "V1", {side == 0 ? g.v0 : g.v1}, Role::Verifier,
                                         agents_.back().get());
  }
  if (!honest_prover) return;
  if (script_.config.kind == ProtocolKind::P3) {
    agents_.push_back(std::make_unique<ProverAgent>(*this));
    provers_.push_back(engine_.add_party("P0", {g.p0()}, Role::Prover, agents_.back().get()));
    agents_.push_back(std::make_unique<ProverAgent>(*this));
    provers_.push_back(engine_.add_party("P1", {g.p1()}, Role::Prover, agents_.back().get()));
  } else {
    agents_.push_back(std::make_unique<ProverAgent>(*this));
    provers_.push_back(engine_.add_party("P", {g.p}, Role::Prover, agents_.back().get()));
  }
}

ProtocolRun::~ProtocolRun() = default;

void ProtocolRun::prepare_round(Context& ctx, int round) {
  const auto& r = script_.rounds.at(round);
  const auto kind = script_.config.kind;
  std::vector<std::vector<QubitId>> members;
  if (kind == ProtocolKind::Baseline) {
    const QubitId q = ctx.alloc(r.expected);
    if (r.basis == 1) ctx.state(std::span<const QubitId>(&q, 1)).apply_unitary(q, gates::h());
    members.push_back({q});
  } else if (rail_protocol(kind)) {
    const auto dr = optics::inject_photon(engine_.sv(), r.expected == 0 ? optics::Source::S0 : optics::Source::S1);
    const std::array<QubitId, 2> qs{dr.upper, dr.lower};
    ctx.adopt(qs);
    members.push_back({dr.upper});
    members.push_back({dr.lower});
  } else {
    const QubitId a = ctx.alloc(0), b = ctx.alloc(0);
    const std::array<QubitId, 2> qs{a, b};
    auto& sv = ctx.state(qs);
    sv.apply_unitary(a, gates::h());
    sv.apply_unitary(qs, gates::cnot());
    if (r.expected == 2 || r.expected == 3) sv.apply_unitary(b, gates::x());
    if (r.expected == 1 || r.expected == 3) sv.apply_unitary(a, gates::z());
    members.push_back({a});
    members.push_back({b});
  }
  for (std::size_t m = 0; m < members.size(); ++m) {
    const int id = r.signals.at(m);
    const int side = script_.signals.at(id).side;
    prepared_[id] = members[m];
    if (verifiers_[side] != ctx.self()) ctx.pass_private(members[m], verifiers_[side]);
  }
}

Verdict ProtocolRun::verdict() const { return judge(script_, responses_); }

}  // namespace qpv
