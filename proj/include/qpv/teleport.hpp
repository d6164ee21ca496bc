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

// Standard and port-based teleportation over pre-shared EPR pairs, plus the
// ledger that counts how much of the shared entanglement was spent.
//
// Port-based teleportation (PBT) comes in two modes:
//   Ideal - outcome k is uniform on [1, N] and the input lands exactly in
//           receiver port k; the other ports hold maximally mixed junk.
//           Ports may be several qubits wide.
//   Exact - the square-root (pretty good) measurement on the sender's
//           N+1 qubits, single-qubit input, N <= 4.
// In both modes the receiver never applies a correction; it only discards.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpv/qsim.hpp"
#include "qpv/spacetime.hpp"

namespace qpv {

/// Placeholder for a maximally mixed qubit that is in product with the rest
/// of the world. It lives in port registers but never in a StateVector.
inline constexpr QubitId kJunkQubit{0};
inline bool is_junk(QubitId q) { return q == kJunkQubit; }

/// Drops junk placeholders.
std::vector<QubitId> real_qubits(std::span<const QubitId> qs);

class EntanglementLedger {
 public:
  struct Entry {
    std::string label;
    std::uint64_t pairs = 0;
    bool useful = false;
  };

  /// `supply` limits the total number of pairs; nullopt means unlimited.
  explicit EntanglementLedger(std::optional<std::uint64_t> supply = std::nullopt) : supply_(supply) {}

  bool can_consume(std::uint64_t pairs) const;
  /// Records `pairs` consumed EPR pairs. Throws ResourceError past the supply.
  void consume(std::uint64_t pairs, bool useful, std::string label);

  std::uint64_t consumed() const { return consumed_; }
  std::uint64_t useful() const { return useful_; }
  /// 1 - useful/consumed, or 0 if nothing was consumed.
  double waste_fraction() const;
  const std::vector<Entry>& log() const { return log_; }

 private:
  std::optional<std::uint64_t> supply_;
  std::uint64_t consumed_ = 0;
  std::uint64_t useful_ = 0;
  std::vector<Entry> log_;
};

struct EprPair {
  QubitId a;
  QubitId b;
  PartyId owner_a = 0;
  PartyId owner_b = 0;
  bool consumed = false;
};

/// Allocates (|00> + |11>)/sqrt2 on fresh qubits.
EprPair make_epr_pair(StateVector& sv, PartyId owner_a, PartyId owner_b);

struct StandardTeleport {
  int correction = 0;  ///< Bell outcome index: 0 Phi+, 1 Phi-, 2 Psi+, 3 Psi-
  QubitId destination;
};

/// Bell-measures (src, pair.a), frees both and charges one pair to the ledger.
/// The receiver must still call apply_teleport_correction.
StandardTeleport teleport_standard(StateVector& sv, QubitId src, EprPair& pair, EntanglementLedger& ledger,
                                   Rng& rng, bool useful = true);

/// Pauli correction on the receiver side for a Bell outcome index.
void apply_teleport_correction(StateVector& sv, QubitId destination, int correction);

enum class PbtMode { Ideal, Exact };

/// Classical outcome of a PBT measurement; travels at light speed.
struct PortOutcome {
  int k = 0;  ///< 1-based port index
  PartyId sender = 0;
  Time emitted_at = 0;
  Position emitted_from;
};

/// Layout of a register that itself contains the ports of an earlier group:
/// the first `inner_ports * inner_width` qubits are the inner ports in order,
/// the remaining qubits are a tail carried alongside.
struct PortStructure {
  int inner_ports = 0;
  int inner_width = 0;
};

class PortGroup {
 public:
  enum class State { Fresh, Sent, Received };

  PortGroup(PbtMode mode, int ports, PartyId sender, PartyId receiver);

  PbtMode mode() const { return mode_; }
  int size() const { return ports_; }
  PartyId sender() const { return sender_; }
  PartyId receiver() const { return receiver_; }
  State state() const { return state_; }
  int width() const { return width_; }
  const PortStructure& structure() const { return structure_; }

  /// Receiver-side qubits of port k (1-based). Valid once sent.
  const std::vector<QubitId>& port(int k) const;
  /// Every port register concatenated in port order, junk slots included.
  std::vector<QubitId> layout() const;
  /// Real receiver qubits of all ports.
  std::vector<QubitId> all_receiver_qubits() const;

 private:
  friend PortOutcome pbt_send(StateVector&, std::span<const QubitId>, PortGroup&, EntanglementLedger&, Rng&,
                              Time, Position, PortStructure, bool);
  friend std::vector<QubitId> pbt_receive(StateVector&, PortGroup&, const PortOutcome&, Time, Position, Rng&,
                                          double);
  friend void self_correct(StateVector&, PortGroup&, int, Rng&);

  PbtMode mode_;
  int ports_;
  PartyId sender_;
  PartyId receiver_;
  State state_ = State::Fresh;
  int width_ = 0;
  PortStructure structure_;
  std::vector<std::vector<QubitId>> receiver_ports_;
};

/// Sender side of PBT. Consumes the group, frees the sender's systems and
/// charges `size()` pairs to the ledger.
PortOutcome pbt_send(StateVector& sv, std::span<const QubitId> src, PortGroup& group, EntanglementLedger& ledger,
                     Rng& rng, Time now = 0, Position at = {}, PortStructure structure = {}, bool useful = true);

/// Receiver side: keeps port k and frees every other port. The returned
/// register may contain junk placeholders. The outcome must
/// already have reached `at` by time `now`.
std::vector<QubitId> pbt_receive(StateVector& sv, PortGroup& group, const PortOutcome& outcome, Time now,
                                 Position at, Rng& rng, double c = 1.0);

/// In every port, keeps only inner port `inner_k` plus the tail and frees the
/// rest. This is the sender undoing the scrambling of her own earlier PBT; it
/// needs only her own outcome.
void self_correct(StateVector& sv, PortGroup& group, int inner_k, Rng& rng);

/// self_correct followed by pbt_receive: the qubits at sub-port
/// (outer.k, inner_k) plus the tail.
std::vector<QubitId> nested_discard(StateVector& sv, PortGroup& group, const PortOutcome& outer, int inner_k,
                                    Time now, Position at, Rng& rng, double c = 1.0);

/// Kraus operators sqrt(E_k) of the square-root PBT measurement on
/// (input, a_1..a_N), input as the most significant qubit.
const std::vector<Eigen::MatrixXcd>& exact_pbt_kraus(int ports);

struct PbtChannel {
  Eigen::MatrixXcd choi;            ///< 4x4 state of (reference, output)
  double entanglement_fidelity = 0; ///< <Phi+| choi |Phi+>
  double average_fidelity = 0;      ///< (2 F_e + 1) / 3
};

/// Channel of exact-mode PBT, reconstructed by sending half of a Bell pair
/// through it and summing every outcome branch exactly.
PbtChannel exact_pbt_channel(int ports);

inline constexpr int kMaxExactPorts = 4;

}  // namespace qpv
