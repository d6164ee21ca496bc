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

// Dense statevector over a registry of qubits that grows and shrinks during
// a run. Measured or discarded qubits are removed from the registry so the
// amplitude array stays as small as the live system.

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpv/common.hpp"

namespace qpv {

/// Opaque qubit handle. Ids are never reused within one StateVector.
struct QubitId {
  std::uint64_t value = 0;
  auto operator<=>(const QubitId&) const = default;
};

/// A complete orthonormal measurement basis for k qubits.
///
/// Vector i of the basis is the i-th column of `matrix()`. The first target
/// passed to a measurement is the most significant bit of the local index,
/// so `|01>` means first target 0, second target 1.
class Basis {
 public:
  /// Z basis on any number of qubits; outcome labels are bit strings.
  static Basis computational();
  /// Bell basis on two qubits: Phi+, Phi-, Psi+, Psi-.
  static Basis bell();
  /// Single-qubit X basis; outcome "0" is |+>, "1" is |->.
  static Basis hadamard();
  /// Arbitrary basis; columns of `vectors` must be orthonormal and complete.
  static Basis custom(std::string name, Eigen::MatrixXcd vectors, std::vector<std::string> labels = {});

  const std::string& name() const { return name_; }
  bool is_computational() const { return computational_; }
  /// Number of qubits the basis acts on (0 means "any", computational only).
  int arity() const { return arity_; }
  const Eigen::MatrixXcd& matrix() const { return vectors_; }
  std::string label(std::size_t index, int num_targets) const;

 private:
  std::string name_;
  bool computational_ = false;
  int arity_ = 0;
  Eigen::MatrixXcd vectors_;
  std::vector<std::string> labels_;
};

struct MeasurementRecord {
  std::size_t index = 0;    ///< outcome index in the basis
  std::string outcome;      ///< human-readable label, e.g. "01" or "Phi+"
  double probability = 0;   ///< Born probability of this outcome
  std::string basis;
};

/// Exact outcome table of a measurement, without collapse.
struct Distribution {
  std::vector<std::string> labels;
  std::vector<double> probabilities;

  /// Probability of a label; 0 if the label is not an outcome.
  double at(const std::string& label) const;
  double total() const;
};

class StateVector {
 public:
  explicit StateVector(int qubit_cap = kDefaultQubitCap);

  /// New qubit in |bit>, in product with the rest of the register.
  QubitId alloc(int bit = 0);

  /// Applies a 2^k x 2^k unitary to the targets (first target = MSB).
  void apply_unitary(std::span<const QubitId> targets, const Eigen::MatrixXcd& u);

  /// Applies an arbitrary operator and renormalizes. Returns the squared norm
  /// before renormalization, i.e. the probability of that Kraus branch. A
  /// zero-probability branch leaves the state untouched and returns 0.
  double apply_kraus(std::span<const QubitId> targets, const Eigen::MatrixXcd& k);

  /// Born-rule measurement with collapse. Measured qubits stay live.
  MeasurementRecord measure(std::span<const QubitId> targets, const Basis& basis, Rng& rng);

  Distribution born_distribution(std::span<const QubitId> targets, const Basis& basis) const;

  /// Removes qubits from the registry. Each one is measured in Z and the
  /// outcome forgotten, which is a partial trace for every later statistic.
  void free(std::span<const QubitId> targets, Rng& rng);

  /// Reduced density matrix of the targets (first target = MSB).
  Eigen::MatrixXcd reduced_density(std::span<const QubitId> targets) const;

  /// <psi| rho_targets |psi> for a pure reference state.
  double fidelity(std::span<const QubitId> targets, const Eigen::VectorXcd& psi) const;

  bool live(QubitId q) const;
  int num_qubits() const { return static_cast<int>(qubits_.size()); }
  int qubit_cap() const { return cap_; }
  const std::vector<QubitId>& qubits() const { return qubits_; }
  const std::vector<Complex>& amplitudes() const { return amps_; }
  double norm() const;

  // Convenience wrappers used throughout the protocol code.
  MeasurementRecord measure(QubitId q, const Basis& basis, Rng& rng) {
    return measure(std::span<const QubitId>(&q, 1), basis, rng);
  }
  void free(QubitId q, Rng& rng) { free(std::span<const QubitId>(&q, 1), rng); }
  void apply_unitary(QubitId q, const Eigen::MatrixXcd& u) {
    apply_unitary(std::span<const QubitId>(&q, 1), u);
  }

 private:
  std::vector<int> positions(std::span<const QubitId> targets) const;
  void apply_local(const std::vector<int>& pos, const Eigen::MatrixXcd& m);
  void collapse_computational(const std::vector<int>& pos, std::size_t local);
  void remove_basis_qubit(int pos, int bit);
  std::vector<double> local_probabilities(const std::vector<int>& pos) const;

  int cap_;
  std::uint64_t next_id_ = 1;
  std::vector<QubitId> qubits_;  // bit i of an amplitude index is qubits_[i]
  std::vector<Complex> amps_;
};

namespace gates {
Eigen::MatrixXcd identity(int qubits);
Eigen::MatrixXcd x();
Eigen::MatrixXcd y();
Eigen::MatrixXcd z();
Eigen::MatrixXcd h();
Eigen::MatrixXcd cnot();
Eigen::MatrixXcd swap();
/// Haar-random unitary of the given dimension.
Eigen::MatrixXcd random_unitary(int dim, Rng& rng);
/// Haar-random normalized state of the given dimension.
Eigen::VectorXcd random_state(int dim, Rng& rng);
bool is_unitary(const Eigen::MatrixXcd& u, double tol = kTolerance);
}  // namespace gates

}  // namespace qpv
