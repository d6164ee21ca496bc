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

// Discrete-event engine. Parties sit at fixed points on a line and exchange
// envelopes at light speed. Qubits are owned by exactly one party at a time
// (or by nobody while in flight) and only the owner may act on them.
//
// Events at equal times are ordered by class (arrivals, then ticks, then
// self-scheduled computations, then pass-throughs), then by receiving party,
// then by sending party, then by insertion order.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "qpv/common.hpp"
#include "qpv/qsim.hpp"
#include "qpv/spacetime.hpp"
#include "qpv/teleport.hpp"

namespace qpv {

inline constexpr PartyId kNobody = -1;

struct Classical {
  std::string kind;
  std::vector<std::int64_t> values;
};

struct QubitPayload {
  std::vector<QubitId> qubits;
};

struct PromiseRef {
  std::uint64_t id = 0;
};

using Payload = std::variant<Classical, QubitPayload, PortOutcome, PromiseRef>;

enum class Medium {
  Addressed,  ///< delivered to a named party, never intercepted
  Open,       ///< travels toward a point; adversaries on the path may take it
  Rail,       ///< like Open, and the qubit is one rail of an occupation code
};

struct Envelope {
  std::uint64_t id = 0;
  PartyId source = kNobody;
  PartyId receiver = kNobody;  ///< kNobody when the signal is lost
  Time emitted_at = 0;
  Position emitted_from;
  Position destination;
  Time arrives_at = 0;
  Medium medium = Medium::Addressed;
  int round = -1;
  std::string label;
  Payload payload;
};

enum class Role { Verifier, Prover, Adversary };

/// How an adversary handles qubits travelling on Open and Rail media.
enum class TapMode {
  Notify,  ///< every interception is delivered to on_receive
  Detect,  ///< rails are checked for a photon; only clicks are delivered
  Tick,    ///< qubits are visible only during ticks at their arrival time
};

struct SendOptions {
  Medium medium = Medium::Open;
  int round = -1;
  std::string label;
};

class Engine;
class Context;

class Agent {
 public:
  virtual ~Agent() = default;
  virtual void on_start(Context&) {}
  virtual void on_receive(Context&, const Envelope&) {}
  virtual void on_tick(Context&) {}
  virtual void on_wake(Context&, int /*tag*/) {}
  virtual TapMode tap_mode() const { return TapMode::Notify; }
  /// Whether this party takes an Open/Rail signal passing through its point.
  virtual bool intercepts(const Envelope&) const { return false; }
};

struct PartyInfo {
  PartyId id = kNobody;
  std::string name;
  Position position;
  Role role = Role::Verifier;
  Agent* agent = nullptr;
};

struct TraceRow {
  Time time = 0;
  std::string party;
  std::string kind;
  std::string detail;
};

class Context {
 public:
  Time now() const;
  PartyId self() const { return self_; }
  const PartyInfo& info() const;
  const PartyInfo& party(PartyId id) const;
  Position position() const { return info().position; }
  double c() const;

  Rng& rng();
  EntanglementLedger& ledger();

  /// Emits toward a point; the first intercepting party on the path takes it,
  /// otherwise the party standing at that point, otherwise it is lost.
  std::uint64_t send_toward(Position dest, Payload payload, SendOptions opt = {});
  /// Emits directly to a party (never intercepted).
  std::uint64_t send_to(PartyId to, Payload payload, int round = -1, std::string label = {});

  void wake_at(Time t, int tag = 0);

  /// Classical content of a delivered envelope, resolving promises.
  Classical open_classical(const Envelope& env) const;

  std::uint64_t make_promise();
  void resolve(std::uint64_t promise, Classical value);

  /// Checked access to the global state for qubits this party holds.
  StateVector& state(std::span<const QubitId> qs);
  QubitId alloc(int bit = 0);
  void free(std::span<const QubitId> qs);
  bool holds(QubitId q) const;
  /// Takes custody of qubits that were allocated directly in the state and
  /// have no holder yet.
  void adopt(std::span<const QubitId> qs);
  /// Hands qubits to another verifier over the verifiers' private channel.
  void pass_private(std::span<const QubitId> qs, PartyId verifier);
  /// Access for two adversaries acting as one coalition on logical ports:
  /// each qubit must be held by this party or by `partner`.
  StateVector& coalition(std::span<const QubitId> qs, PartyId partner);
  void coalition_free(std::span<const QubitId> qs, PartyId partner);

  PortOutcome pbt_send(std::span<const QubitId> src, PortGroup& group, PortStructure structure = {},
                       bool useful = true);
  std::vector<QubitId> pbt_receive(PortGroup& group, const PortOutcome& outcome);
  std::vector<QubitId> nested_discard(PortGroup& group, const PortOutcome& outer, int inner_k);
  void self_correct(PortGroup& group, int inner_k);
  EprPair share_epr(PartyId other);

  /// Tick-mode signals sitting at this party during the current tick.
  std::vector<Envelope> take_channel();

  void log(std::string kind, std::string detail);

 private:
  friend class Engine;
  Context(Engine& e, PartyId self) : engine_(e), self_(self) {}
  void check_custody(std::span<const QubitId> qs) const;
  Engine& engine_;
  PartyId self_;
};

class Engine {
 public:
  explicit Engine(std::uint64_t seed, int qubit_cap = kDefaultQubitCap, double c = 1.0,
                  std::optional<std::uint64_t> entanglement_supply = std::nullopt);

  PartyId add_party(std::string name, Position pos, Role role, Agent* agent);
  void add_ticks(PartyId party, const std::vector<Time>& times);
  /// Transfers a qubit to a party before the run starts (pre-shared state).
  void grant(QubitId q, PartyId party);

  /// Runs until no events remain. `start` is the time of on_start.
  void run(Time start = 0, std::size_t max_events = 10'000'000);

  StateVector& sv() { return sv_; }
  const StateVector& sv() const { return sv_; }
  Rng& rng() { return rng_; }
  EntanglementLedger& ledger() { return ledger_; }
  const std::vector<PartyInfo>& parties() const { return parties_; }
  const std::vector<TraceRow>& trace() const { return trace_; }
  std::string trace_csv() const;
  Time now() const { return now_; }
  double c() const { return c_; }
  PartyId find(const std::string& name) const;
  std::optional<PartyId> custodian(QubitId q) const;

 private:
  friend class Context;

  enum class EventClass { Arrive = 0, Tick = 1, Compute = 2, Passthrough = 3 };

  struct Event {
    Time time = 0;
    EventClass cls = EventClass::Arrive;
    PartyId dest = 0;
    PartyId origin = 0;
    std::uint64_t seq = 0;
    std::uint64_t envelope = 0;
    int tag = 0;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const;
  };

  void push(Event e);
  std::uint64_t emit(PartyId from, Position from_pos, Position dest, std::optional<PartyId> addressed,
                     Payload payload, Medium medium, int round, std::string label, PartyId skip);
  void deliver(const Event& ev);
  void passthrough(const Event& ev);
  void hand_over(Envelope& env, PartyId to);
  void drop(Envelope& env);
  void record(PartyId who, std::string kind, std::string detail);
  static std::string describe(const Payload& p);

  StateVector sv_;
  Rng rng_;
  double c_;
  EntanglementLedger ledger_;
  Time now_ = 0;
  bool running_ = false;
  std::uint64_t seq_ = 0;
  std::uint64_t next_envelope_ = 1;
  std::uint64_t next_promise_ = 1;
  std::vector<PartyInfo> parties_;
  std::map<PartyId, std::set<Time>> ticks_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::map<std::uint64_t, Envelope> envelopes_;
  std::map<PartyId, std::vector<std::uint64_t>> channel_;
  std::map<std::uint64_t, std::optional<Classical>> promises_;
  std::map<QubitId, PartyId> custody_;
  std::vector<TraceRow> trace_;
};

}  // namespace qpv
