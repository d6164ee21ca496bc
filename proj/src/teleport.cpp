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

#include "qpv/teleport.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/Eigenvalues>

#include "qpv/errors.hpp"

namespace qpv {

namespace {

// Slot value used for a junk qubit that is maximally mixed and uncorrelated
// with everything; it never enters the statevector.
constexpr QubitId kJunk = kJunkQubit;

void free_real(StateVector& sv, const std::vector<QubitId>& qs, Rng& rng) {
  std::vector<QubitId> real;
  for (auto q : qs)
    if (q != kJunk) real.push_back(q);
  if (!real.empty()) sv.free(real, rng);
}

// |Phi+><Phi+| on local qubits (0, j) of an (n+1)-qubit register, identity
// elsewhere. Qubit 0 is the MSB.
Eigen::MatrixXcd phi_plus_projector(int n, int j) {
  const int q = n + 1;
  const Eigen::Index dim = Eigen::Index{1} << q;
  const int bit0 = q - 1;
  const int bitj = q - 1 - j;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      const Eigen::Index mask = (Eigen::Index{1} << bit0) | (Eigen::Index{1} << bitj);
      if ((r & ~mask) != (c & ~mask)) continue;
      const bool r0 = (r >> bit0) & 1, rj = (r >> bitj) & 1;
      const bool c0 = (c >> bit0) & 1, cj = (c >> bitj) & 1;
      if (r0 == rj && c0 == cj) m(r, c) = 0.5;
    }
  }
  return m;
}

std::vector<Eigen::MatrixXcd> build_kraus(int n) {
  const Eigen::Index dim = Eigen::Index{1} << (n + 1);
  std::vector<Eigen::MatrixXcd> sigma;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (int j = 1; j <= n; ++j) {
    sigma.push_back(phi_plus_projector(n, j));
    rho += sigma.back();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  Eigen::VectorXd inv_sqrt(dim);
  Eigen::VectorXd kernel(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double v = es.eigenvalues()(i);
    const bool zero = v < 1e-10;
    inv_sqrt(i) = zero ? 0.0 : 1.0 / std::sqrt(v);
    kernel(i) = zero ? 1.0 : 0.0;
  }
  const Eigen::MatrixXcd& u = es.eigenvectors();
  const Eigen::MatrixXcd rho_is = u * inv_sqrt.cast<Complex>().asDiagonal() * u.adjoint();
  const Eigen::MatrixXcd delta = u * kernel.cast<Complex>().asDiagonal() * u.adjoint();

  std::vector<Eigen::MatrixXcd> kraus;
  for (int j = 0; j < n; ++j) {
    Eigen::MatrixXcd e = rho_is * sigma[j] * rho_is + delta / static_cast<double>(n);
    e = 0.5 * (e + e.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ee(e);
    Eigen::VectorXd sq = ee.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    kraus.push_back(ee.eigenvectors() * sq.cast<Complex>().asDiagonal() * ee.eigenvectors().adjoint());
  }
  return kraus;
}

}  // namespace

std::vector<QubitId> real_qubits(std::span<const QubitId> qs) {
  std::vector<QubitId> out;
  for (auto q : qs)
    if (!is_junk(q)) out.push_back(q);
  return out;
}

bool EntanglementLedger::can_consume(std::uint64_t pairs) const {
  return !supply_ || consumed_ + pairs <= *supply_;
}

void EntanglementLedger::consume(std::uint64_t pairs, bool useful, std::string label) {
  if (!can_consume(pairs))
    throw ResourceError("entanglement supply exhausted: " + std::to_string(consumed_) + " used, " +
                        std::to_string(pairs) + " more requested");
  consumed_ += pairs;
  if (useful) useful_ += pairs;
  log_.push_back({std::move(label), pairs, useful});
}

double EntanglementLedger::waste_fraction() const {
  if (consumed_ == 0) return 0.0;
  return 1.0 - static_cast<double>(useful_) / static_cast<double>(consumed_);
}

EprPair make_epr_pair(StateVector& sv, PartyId owner_a, PartyId owner_b) {
  EprPair p{sv.alloc(0), sv.alloc(0), owner_a, owner_b, false};
  sv.apply_unitary(p.a, gates::h());
  const std::array<QubitId, 2> t{p.a, p.b};
  sv.apply_unitary(t, gates::cnot());
  return p;
}

StandardTeleport teleport_standard(StateVector& sv, QubitId src, EprPair& pair, EntanglementLedger& ledger,
                                   Rng& rng, bool useful) {
  if (pair.consumed) throw InvalidArgument("EPR pair already consumed");
  ledger.consume(1, useful, "teleport");
  const std::array<QubitId, 2> t{src, pair.a};
  const auto rec = sv.measure(t, Basis::bell(), rng);
  sv.free(t, rng);
  pair.consumed = true;
  return {static_cast<int>(rec.index), pair.b};
}

void apply_teleport_correction(StateVector& sv, QubitId destination, int correction) {
  switch (correction) {
    case 0: break;
    case 1: sv.apply_unitary(destination, gates::z()); break;
    case 2: sv.apply_unitary(destination, gates::x()); break;
    case 3:
      sv.apply_unitary(destination, gates::x());
      sv.apply_unitary(destination, gates::z());
      break;
    default: throw InvalidArgument("Bell outcome index out of range");
  }
}

PortGroup::PortGroup(PbtMode mode, int ports, PartyId sender, PartyId receiver)
    : mode_(mode), ports_(ports), sender_(sender), receiver_(receiver) {
  if (ports < 1) throw InvalidArgument("port group needs at least one port");
  if (mode == PbtMode::Exact && ports > kMaxExactPorts)
    throw InvalidArgument("exact PBT supports at most " + std::to_string(kMaxExactPorts) + " ports");
}

const std::vector<QubitId>& PortGroup::port(int k) const {
  if (state_ == State::Fresh) throw InvalidArgument("port group has not been used yet");
  if (k < 1 || k > ports_) throw InvalidArgument("port index out of range");
  return receiver_ports_[k - 1];
}

std::vector<QubitId> PortGroup::layout() const {
  std::vector<QubitId> out;
  for (const auto& p : receiver_ports_) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::vector<QubitId> PortGroup::all_receiver_qubits() const {
  std::vector<QubitId> out;
  for (const auto& p : receiver_ports_)
    for (auto q : p)
      if (q != kJunk) out.push_back(q);
  return out;
}

PortOutcome pbt_send(StateVector& sv, std::span<const QubitId> src, PortGroup& group, EntanglementLedger& ledger,
                     Rng& rng, Time now, Position at, PortStructure structure, bool useful) {
  if (group.state_ != PortGroup::State::Fresh) throw InvalidArgument("port group already used");
  if (src.empty()) throw InvalidArgument("nothing to teleport");
  const int w = static_cast<int>(src.size());
  if (structure.inner_ports * structure.inner_width > w)
    throw InvalidArgument("port structure larger than the register");
  const int n = group.ports_;
  ledger.consume(static_cast<std::uint64_t>(n), useful, "pbt");

  int k = 0;
  group.receiver_ports_.assign(n, std::vector<QubitId>(w, kJunk));
  if (group.mode_ == PbtMode::Ideal) {
    k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    group.receiver_ports_[k - 1].assign(src.begin(), src.end());
  } else {
    if (w != 1 || src[0] == kJunk) throw InvalidArgument("exact PBT teleports a single qubit");
    std::vector<EprPair> pairs;
    for (int j = 0; j < n; ++j) pairs.push_back(make_epr_pair(sv, group.sender_, group.receiver_));
    std::vector<QubitId> sender_side{src[0]};
    for (const auto& p : pairs) sender_side.push_back(p.a);
    const auto& kraus = exact_pbt_kraus(n);
    std::vector<double> probs(n);
    for (int j = 0; j < n; ++j) {
      StateVector copy = sv;
      probs[j] = copy.apply_kraus(sender_side, kraus[j]);
    }
    double r = rng.uniform();
    k = n;
    for (int j = 0; j < n; ++j) {
      if (r < probs[j]) {
        k = j + 1;
        break;
      }
      r -= probs[j];
    }
    sv.apply_kraus(sender_side, kraus[k - 1]);
    sv.free(sender_side, rng);
    for (int j = 0; j < n; ++j) group.receiver_ports_[j][0] = pairs[j].b;
  }
  group.width_ = w;
  group.structure_ = structure;
  group.state_ = PortGroup::State::Sent;
  return {k, group.sender_, now, at};
}

std::vector<QubitId> pbt_receive(StateVector& sv, PortGroup& group, const PortOutcome& outcome, Time now,
                                 Position at, Rng& rng, double c) {
  if (group.state_ != PortGroup::State::Sent) throw InvalidArgument("port group is not awaiting receipt");
  if (outcome.k < 1 || outcome.k > group.ports_) throw InvalidArgument("port index out of range");
  const Time earliest = outcome.emitted_at + arrival_time(outcome.emitted_from, at, c);
  if (now + kTolerance < earliest)
    throw CausalityViolation("port outcome used at t=" + std::to_string(now) + " before it can arrive at t=" +
                             std::to_string(earliest));
  for (int j = 1; j <= group.ports_; ++j)
    if (j != outcome.k) free_real(sv, group.receiver_ports_[j - 1], rng);
  group.state_ = PortGroup::State::Received;
  return group.receiver_ports_[outcome.k - 1];
}

void self_correct(StateVector& sv, PortGroup& group, int inner_k, Rng& rng) {
  if (group.state_ != PortGroup::State::Sent) throw InvalidArgument("port group is not awaiting receipt");
  const auto s = group.structure_;
  if (s.inner_ports == 0) throw InvalidArgument("port group has no inner structure");
  if (inner_k < 1 || inner_k > s.inner_ports) throw InvalidArgument("inner port index out of range");
  const int lo = (inner_k - 1) * s.inner_width;
  const int hi = lo + s.inner_width;
  const int inner_end = s.inner_ports * s.inner_width;
  for (auto& reg : group.receiver_ports_) {
    std::vector<QubitId> keep, drop;
    for (int i = 0; i < static_cast<int>(reg.size()); ++i) {
      if ((i >= lo && i < hi) || i >= inner_end)
        keep.push_back(reg[i]);
      else
        drop.push_back(reg[i]);
    }
    free_real(sv, drop, rng);
    reg = std::move(keep);
  }
  group.width_ = group.width_ - inner_end + s.inner_width;
  group.structure_ = {};
}

std::vector<QubitId> nested_discard(StateVector& sv, PortGroup& group, const PortOutcome& outer, int inner_k,
                                    Time now, Position at, Rng& rng, double c) {
  self_correct(sv, group, inner_k, rng);
  return pbt_receive(sv, group, outer, now, at, rng, c);
}

const std::vector<Eigen::MatrixXcd>& exact_pbt_kraus(int ports) {
  if (ports < 1 || ports > kMaxExactPorts) throw InvalidArgument("exact PBT supports 1..4 ports");
  static std::mutex mu;
  static std::map<int, std::vector<Eigen::MatrixXcd>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(ports);
  if (it == cache.end()) it = cache.emplace(ports, build_kraus(ports)).first;
  return it->second;
}

PbtChannel exact_pbt_channel(int ports) {
  const auto& kraus = exact_pbt_kraus(ports);
  StateVector sv(2 + 2 * ports);
  auto bell = make_epr_pair(sv, 0, 0);
  const QubitId ref = bell.a, input = bell.b;
  std::vector<EprPair> pairs;
  for (int j = 0; j < ports; ++j) pairs.push_back(make_epr_pair(sv, 0, 1));
  std::vector<QubitId> sender_side{input};
  for (const auto& p : pairs) sender_side.push_back(p.a);

  PbtChannel ch;
  ch.choi = Eigen::MatrixXcd::Zero(4, 4);
  for (int j = 0; j < ports; ++j) {
    StateVector copy = sv;
    const double p = copy.apply_kraus(sender_side, kraus[j]);
    if (p <= 0) continue;
    const std::array<QubitId, 2> t{ref, pairs[j].b};
    ch.choi += p * copy.reduced_density(t);
  }
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  ch.entanglement_fidelity = std::real((phi.adjoint() * ch.choi * phi)(0, 0));
  ch.average_fidelity = (2.0 * ch.entanglement_fidelity + 1.0) / 3.0;
  return ch;
}

}  // namespace qpv
