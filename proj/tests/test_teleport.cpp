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

#include <doctest.h>

#include <array>
#include <vector>

#include "oracle.hpp"
#include "qpv/errors.hpp"
#include "qpv/optics.hpp"
#include "qpv/teleport.hpp"

using namespace qpv;

namespace {

// Qubit in a Haar-random state; returns the state vector too.
std::pair<QubitId, oracle::Vec> random_qubit(StateVector& sv, Rng& rng) {
  const auto q = sv.alloc();
  const auto u = gates::random_unitary(2, rng);
  sv.apply_unitary(q, u);
  return {q, u.col(0)};
}

}  // namespace

TEST_CASE("standard teleportation reproduces random states") {
  Rng rng(31);
  EntanglementLedger ledger;
  for (int i = 0; i < 50; ++i) {
    StateVector sv;
    auto [q, psi] = random_qubit(sv, rng);
    auto pair = make_epr_pair(sv, 0, 1);
    const auto t = teleport_standard(sv, q, pair, ledger, rng);
    apply_teleport_correction(sv, t.destination, t.correction);
    const std::array<QubitId, 1> d{t.destination};
    CHECK(std::abs(sv.fidelity(d, psi) - 1.0) < 1e-9);
    CHECK(sv.num_qubits() == 1);
  }
  CHECK(ledger.consumed() == 50);
  CHECK(ledger.waste_fraction() == 0.0);
}

TEST_CASE("ledger accounting and supply") {
  EntanglementLedger ledger(5);
  CHECK(ledger.waste_fraction() == 0.0);
  ledger.consume(3, false, "a");
  ledger.consume(1, true, "b");
  CHECK(ledger.consumed() == 4);
  CHECK(ledger.useful() == 1);
  CHECK(ledger.waste_fraction() == doctest::Approx(0.75));
  CHECK(ledger.can_consume(1));
  CHECK_FALSE(ledger.can_consume(2));
  CHECK_THROWS_AS(ledger.consume(2, true, "c"), ResourceError);
  CHECK(ledger.log().size() == 2);
}

TEST_CASE("ideal PBT delivers the input exactly into port k") {
  Rng rng(32);
  for (int i = 0; i < 50; ++i) {
    const int n = 1 + i % 5;
    StateVector sv;
    EntanglementLedger ledger;
    auto [q, psi] = random_qubit(sv, rng);
    PortGroup g(PbtMode::Ideal, n, 0, 1);
    const std::array<QubitId, 1> src{q};
    const auto out = pbt_send(sv, src, g, ledger, rng, 0, {0});
    CHECK(out.k >= 1);
    CHECK(out.k <= n);
    CHECK(ledger.consumed() == static_cast<std::uint64_t>(n));
    const auto got = pbt_receive(sv, g, out, 10, {10}, rng);
    REQUIRE(got.size() == 1);
    CHECK(std::abs(sv.fidelity(got, psi) - 1.0) < 1e-9);
    CHECK(sv.num_qubits() == 1);
  }
}

TEST_CASE("ideal PBT port index is uniform") {
  Rng rng(33);
  const int n = 4, runs = 4000;
  std::array<int, n> counts{};
  for (int i = 0; i < runs; ++i) {
    StateVector sv;
    EntanglementLedger ledger;
    const auto q = sv.alloc();
    PortGroup g(PbtMode::Ideal, n, 0, 1);
    const std::array<QubitId, 1> src{q};
    ++counts[pbt_send(sv, src, g, ledger, rng).k - 1];
  }
  double chi2 = 0;
  for (int c : counts) chi2 += (c - runs / 4.0) * (c - runs / 4.0) / (runs / 4.0);
  CHECK(chi2 < 16.27);  // 3 dof, p = 0.001
}

TEST_CASE("the outcome must reach the receiver before the port is used") {
  Rng rng(34);
  StateVector sv;
  EntanglementLedger ledger;
  const auto q = sv.alloc();
  PortGroup g(PbtMode::Ideal, 2, 0, 1);
  const std::array<QubitId, 1> src{q};
  const auto out = pbt_send(sv, src, g, ledger, rng, 0, {0});
  CHECK_THROWS_AS(pbt_receive(sv, g, out, 5, {10}, rng), CausalityViolation);
  CHECK_NOTHROW(pbt_receive(sv, g, out, 10, {10}, rng));
}

TEST_CASE("nested discard undoes two rounds of ideal PBT") {
  Rng rng(35);
  for (int i = 0; i < 20; ++i) {
    StateVector sv;
    EntanglementLedger ledger;
    auto [q, psi] = random_qubit(sv, rng);
    const auto tag = sv.alloc(1);
    PortGroup g1(PbtMode::Ideal, 3, 0, 1);
    const std::array<QubitId, 1> src{q};
    const auto o1 = pbt_send(sv, src, g1, ledger, rng, 0, {0});
    auto reg = g1.layout();
    reg.push_back(tag);
    CHECK(real_qubits(reg).size() == 2);  // input and tag; other ports are junk
    PortGroup g2(PbtMode::Ideal, 2, 1, 0);
    const auto o2 = pbt_send(sv, reg, g2, ledger, rng, 0, {10}, {3, 1});
    const auto got = nested_discard(sv, g2, o2, o1.k, 10, {0}, rng);
    REQUIRE(got.size() == 2);
    const std::array<QubitId, 1> data{got[0]}, t{got[1]};
    CHECK(std::abs(sv.fidelity(data, psi) - 1.0) < 1e-9);
    CHECK(std::abs(sv.fidelity(t, oracle::basis_ket(2, 1)) - 1.0) < 1e-9);
    CHECK(ledger.consumed() == 3 + 2);
  }
}

TEST_CASE("a teleported vacuum pair still never clicks") {
  Rng rng(36);
  for (int i = 0; i < 10; ++i) {
    StateVector sv;
    EntanglementLedger ledger;
    const auto dr = optics::vacuum_pair(sv);
    std::array<QubitId, 2> rails{dr.upper, dr.lower};
    std::vector<QubitId> out;
    for (auto r : rails) {
      PortGroup g(PbtMode::Ideal, 3, 0, 1);
      const std::array<QubitId, 1> src{r};
      const auto o = pbt_send(sv, src, g, ledger, rng);
      out.push_back(pbt_receive(sv, g, o, 0, {0}, rng).at(0));
    }
    CHECK(optics::interfere_and_detect(sv, {out[0], out[1]}, rng) == optics::Detection::NoClick);
  }
}

TEST_CASE("exact PBT fidelity agrees with a density-matrix oracle and grows with N") {
  std::vector<double> f;
  for (int n = 1; n <= kMaxExactPorts; ++n) {
    const auto ch = exact_pbt_channel(n);
    const double oracle_f = oracle::pbt_fidelity(n);
    CHECK(std::abs(ch.entanglement_fidelity - oracle_f) < 1e-9);
    CHECK(std::abs(ch.average_fidelity - (2 * oracle_f + 1) / 3) < 1e-9);
    CHECK(std::abs(ch.choi.trace().real() - 1.0) < 1e-9);
    f.push_back(oracle_f);
  }
  CHECK(std::abs(f[0] - 0.25) < 1e-9);  // one port carries nothing
  CHECK(f[1] < f[2]);
  CHECK(f[2] < f[3]);
  CHECK(f[3] < 1.0);
}

TEST_CASE("exact PBT Kraus operators form a complete measurement") {
  for (int n = 1; n <= kMaxExactPorts; ++n) {
    const auto& ks = exact_pbt_kraus(n);
    REQUIRE(static_cast<int>(ks.size()) == n);
    const int d = 1 << (n + 1);
    oracle::Mat sum = oracle::Mat::Zero(d, d);
    for (const auto& k : ks) sum += k.adjoint() * k;
    CHECK(oracle::max_abs(sum - oracle::Mat::Identity(d, d)) < 1e-9);
  }
}

TEST_CASE("exact PBT through the statevector keeps the qubit count small") {
  Rng rng(37);
  StateVector sv;
  EntanglementLedger ledger;
  auto [q, psi] = random_qubit(sv, rng);
  PortGroup g(PbtMode::Exact, 3, 0, 1);
  const std::array<QubitId, 1> src{q};
  const auto o = pbt_send(sv, src, g, ledger, rng);
  const auto got = pbt_receive(sv, g, o, 0, {0}, rng);
  CHECK(got.size() == 1);
  CHECK(sv.num_qubits() == 1);
  CHECK_THROWS_AS(PortGroup(PbtMode::Exact, kMaxExactPorts + 1, 0, 1), InvalidArgument);
}
