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

// Challenge scripts, honest verifiers and provers, signal ordering and the
// verifiers' joint verdict.
//
// Every protocol is described by a Script: a list of signals (who emits what
// and when, and where it is meant to meet its partner) grouped into rounds.
// The verifiers and honest provers are engine agents that play the script.

#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qpv/engine.hpp"
#include "qpv/optics.hpp"

namespace qpv {

struct Geometry {
  double v0 = 0;
  double v1 = 100;
  double p = 50;   ///< proving point (P1 in the two-point protocol)
  double e0 = 25;
  double e1 = 75;
  double c = 1;
  double secure_radius = 5;
  double l_pp = 2;  ///< separation of the two proving points

  double p1() const { return p; }
  double p0() const { return p - l_pp; }
  SecureRegion secure_region() const { return {{p}, secure_radius}; }
  /// Throws ConfigError when the layout is not V0 < E0 < region < E1 < V1.
  void validate() const;
};

enum class ProtocolKind { Baseline, P1, P2, PublicOrderDT, P3 };

std::string to_string(ProtocolKind k);
ProtocolKind protocol_from_string(const std::string& s);

struct ProtocolConfig {
  ProtocolKind kind = ProtocolKind::P1;
  int rounds = 50;
  Time period = 10;   ///< fixed-slot spacing (baseline)
  double rate = 0.1;  ///< rate of the exponential part of random gaps
  Time g_min = 4;     ///< minimum gap between consecutive rounds
  Time g_adj = 1;     ///< gap between the two halves of a pair (pair protocols)
  Time lattice = 0.5; ///< every meeting time is a multiple of this
  Time first = 200;   ///< meeting time of the first round
  double epsilon = 0; ///< timeliness tolerance

  void validate() const;
};

enum class Knowledge { Public, Private };

enum class Basis2 { Z = 0, X = 1 };

/// One challenge piece as emitted by a verifier.
struct SignalSpec {
  int id = 0;
  int side = 0;         ///< emitting verifier
  Time emit = 0;
  Time at_meeting = 0;  ///< arrival time at the meeting point
  double meeting_x = 0;
  int round = 0;
  int member = 0;       ///< position inside its round
  bool classical = false;
};

struct RoundSpec {
  int index = 0;
  double meeting_x = 0;
  Time complete = 0;  ///< when an honest prover has everything
  std::array<Time, 2> deadline{};
  int expected = 0;
  int group = 0;      ///< pair placement: 0 = 00, 1 = 01, 2 = 10, 3 = 11
  int basis = 0;      ///< baseline basis
  std::vector<int> signals;
};

struct Script {
  ProtocolConfig config;
  Geometry geometry;
  std::vector<SignalSpec> signals;
  std::vector<RoundSpec> rounds;

  /// Time a signal reaches position x on its way to the meeting point.
  Time passes(const SignalSpec& s, double x) const;
};

/// Draws the secret choices and timings of one run.
Script generate_script(const ProtocolConfig& cfg, const Geometry& geo, Rng& rng);

/// Meeting time sequence with minimum gap g_min on the lattice.
std::vector<Time> random_meeting_times(int count, Time first, Time g_min, double rate, Time lattice,
                                       Time extra, Rng& rng);

struct OrderedEntry {
  int side = 0;
  int signal = -1;  ///< -1 for an inserted empty signal
  Time at_meeting = 0;
  bool empty() const { return signal < 0; }
};

/// The alternating sequence V0, V1, V0, ... of signals by arrival at the
/// prover, with empty placeholders. Private knowledge throws
/// InsufficientKnowledge.
std::vector<OrderedEntry> normalize_order(const Script& script, Knowledge knowledge);

struct ResponseRecord {
  Time arrival = 0;
  int value = 0;
};

struct RoundVerdict {
  int round = 0;
  bool correct = false;
  bool timely = false;
  Time lateness = 0;  ///< max over both verifiers, 0 when on time
  bool answered = false;
};

struct Verdict {
  bool accept = false;
  std::vector<RoundVerdict> rounds;
  std::string reason;
  Time max_lateness = 0;
};

/// Responses are matched first-in first-out to rounds in deadline order.
Verdict judge(const Script& script, const std::array<std::vector<ResponseRecord>, 2>& responses);

/// Payload value of a detection, as broadcast by interference provers.
int detection_value(optics::Detection d);

/// Honest parties of one run. Adds V0 and V1 (and the honest provers when
/// requested) to the engine, in that order.
class ProtocolRun {
 public:
  ProtocolRun(Engine& engine, Script script, bool honest_prover);
  ~ProtocolRun();
  ProtocolRun(const ProtocolRun&) = delete;
  ProtocolRun& operator=(const ProtocolRun&) = delete;

  const Script& script() const { return script_; }
  PartyId verifier(int side) const { return verifiers_[side]; }
  const std::vector<PartyId>& provers() const { return provers_; }
  Verdict verdict() const;
  const std::array<std::vector<ResponseRecord>, 2>& responses() const { return responses_; }

 private:
  class VerifierAgent;
  class ProverAgent;
  friend class VerifierAgent;
  friend class ProverAgent;

  void prepare_round(Context& ctx, int round);

  Engine& engine_;
  Script script_;
  std::array<PartyId, 2> verifiers_{kNobody, kNobody};
  std::vector<PartyId> provers_;
  std::vector<std::unique_ptr<Agent>> agents_;
  std::map<int, std::vector<QubitId>> prepared_;  // signal id -> qubits
  std::array<std::vector<ResponseRecord>, 2> responses_;
  int completions_ = 0;
};

}  // namespace qpv
