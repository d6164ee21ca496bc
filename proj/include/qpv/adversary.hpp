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

// Adversary strategies. Each strategy installs parties E0 and/or E1 on the
// line between the verifiers and the secure region.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qpv/chain.hpp"
#include "qpv/engine.hpp"
#include "qpv/protocols.hpp"

namespace qpv {

enum class Strategy {
  None,           ///< nobody answers
  Honest,         ///< honest prover only
  Displaced,      ///< one responder at E0 guessing the basis
  Relay,          ///< forwarding without entanglement
  WhichWay,       ///< E0 measures the upper rail, honest prover present
  GeneralDetect,  ///< acts only on detected signals
  Inqc,           ///< instantaneous nonlocal computation on the baseline
  AttackI,        ///< chained teleportation on a public order
  AttackII,       ///< chained teleportation on a fine tick grid
  AttackIII,      ///< chained teleportation for two proving points
  Sinqc,          ///< INQC at every tick
};

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);
bool uses_honest_prover(Strategy s);

struct AdversaryConfig {
  Strategy strategy = Strategy::Honest;
  PbtMode mode = PbtMode::Ideal;
  int ports = 1;
  Time tick = 0.25;
  std::optional<Time> tick_start;
  std::optional<Time> tick_end;
  bool naive = false;     ///< delayed commitment in the two-point attack
  bool shuffled = false;  ///< public-order attack working from a wrong order
  std::optional<std::uint64_t> supply;

  /// Throws ConfigError for strategies that do not apply to the protocol.
  void validate(ProtocolKind protocol, const Geometry& geo) const;
};

struct LedgerReport {
  std::uint64_t consumed = 0;
  std::uint64_t useful = 0;
  double waste_fraction = 0;
};

LedgerReport ledger_report(const EntanglementLedger& ledger);

/// Owns the adversary agents of one run.
class AdversaryRun {
 public:
  virtual ~AdversaryRun() = default;
  /// Human-readable note, e.g. why a strategy refused to act.
  const std::string& note() const { return note_; }

 protected:
  std::string note_;
};

/// Adds the adversary parties for `cfg` to the engine. Call after the
/// ProtocolRun has added the verifiers and provers.
std::unique_ptr<AdversaryRun> install_adversary(Engine& engine, ProtocolRun& run, const AdversaryConfig& cfg);

/// Tick grid used by tick-driven strategies for a script.
std::vector<Time> adversary_ticks(const Script& script, const AdversaryConfig& cfg);

}  // namespace qpv
