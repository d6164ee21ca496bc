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

#include "qpv/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qpv/errors.hpp"

namespace qpv {

namespace {

std::string bit_string(std::size_t index, int width) {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int j = 0; j < width; ++j) {
    if ((index >> (width - 1 - j)) & 1U) s[static_cast<std::size_t>(j)] = '1';
  }
  return s;
}

std::size_t sample_index(const std::vector<double>& probs, Rng& rng) {
  double total = 0;
  for (double p : probs) total += p;
  const double r = rng.uniform() * total;
  double acc = 0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0) continue;
    acc += probs[i];
    last_nonzero = i;
    if (r < acc) return i;
  }
  return last_nonzero;
}

}  // namespace

// ---------------------------------------------------------------------------
// Basis

Basis Basis::computational() {
  Basis b;
  b.name_ = "Z";
  b.computational_ = true;
  return b;
}

Basis Basis::bell() {
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(4, 4);
  v(0, 0) = s, v(3, 0) = s;   // Phi+
  v(0, 1) = s, v(3, 1) = -s;  // Phi-
  v(1, 2) = s, v(2, 2) = s;   // Psi+
  v(1, 3) = s, v(2, 3) = -s;  // Psi-
  return custom("Bell", v, {"Phi+", "Phi-", "Psi+", "Psi-"});
}

Basis Basis::hadamard() { return custom("X", gates::h(), {"0", "1"}); }

Basis Basis::custom(std::string name, Eigen::MatrixXcd vectors, std::vector<std::string> labels) {
  const auto dim = vectors.rows();
  if (dim < 2 || vectors.cols() != dim || (dim & (dim - 1)) != 0) {
    throw InvalidArgument("basis '" + name + "' is not a complete set of 2^k vectors");
  }
  if (!gates::is_unitary(vectors)) {
    throw InvalidArgument("basis '" + name + "' is not orthonormal");
  }
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != dim) {
    throw InvalidArgument("basis '" + name + "' has the wrong number of labels");
  }
  Basis b;
  b.name_ = std::move(name);
  b.arity_ = static_cast<int>(std::log2(static_cast<double>(dim)) + 0.5);
  b.vectors_ = std::move(vectors);
  b.labels_ = std::move(labels);
  return b;
}

std::string Basis::label(std::size_t index, int num_targets) const {
  if (!labels_.empty()) return labels_.at(index);
  return bit_string(index, computational_ ? num_targets : arity_);
}

// ---------------------------------------------------------------------------
// Distribution

double Distribution::at(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return probabilities[i];
  }
  return 0.0;
}

double Distribution::total() const {
  double t = 0;
  for (double p : probabilities) t += p;
  return t;
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(int qubit_cap) : cap_(qubit_cap), amps_{Complex{1.0, 0.0}} {
  if (qubit_cap < 1) throw InvalidArgument("qubit cap must be positive");
}

QubitId StateVector::alloc(int bit) {
  if (num_qubits() >= cap_) {
    throw ResourceError("qubit cap of " + std::to_string(cap_) + " exceeded");
  }
  const QubitId id{next_id_++};
  const std::size_t old = amps_.size();
  std::vector<Complex> next(old * 2, Complex{});
  const std::size_t offset = bit ? old : 0;
  for (std::size_t i = 0; i < old; ++i) next[i + offset] = amps_[i];
  amps_ = std::move(next);
  qubits_.push_back(id);
  return id;
}

bool StateVector::live(QubitId q) const {
  return std::find(qubits_.begin(), qubits_.end(), q) != qubits_.end();
}

std::vector<int> StateVector::positions(std::span<const QubitId> targets) const {
  std::vector<int> pos;
  pos.reserve(targets.size());
  for (const auto& q : targets) {
    const auto it = std::find(qubits_.begin(), qubits_.end(), q);
    if (it == qubits_.end()) {
      throw LivenessError("qubit " + std::to_string(q.value) + " is not live");
    }
    const int p = static_cast<int>(it - qubits_.begin());
    if (std::find(pos.begin(), pos.end(), p) != pos.end()) {
      throw InvalidArgument("duplicate target qubit " + std::to_string(q.value));
    }
    pos.push_back(p);
  }
  return pos;
}

void StateVector::apply_local(const std::vector<int>& pos, const Eigen::MatrixXcd& m) {
  const int k = static_cast<int>(pos.size());
  const std::size_t local_dim = std::size_t{1} << k;
  std::size_t mask = 0;
  for (int p : pos) mask |= std::size_t{1} << p;

  // Offset of every local basis index within the global index.
  std::vector<std::size_t> offsets(local_dim, 0);
  for (std::size_t l = 0; l < local_dim; ++l) {
    for (int j = 0; j < k; ++j) {
      if ((l >> (k - 1 - j)) & 1U) offsets[l] |= std::size_t{1} << pos[static_cast<std::size_t>(j)];
    }
  }
  Eigen::VectorXcd in(static_cast<Eigen::Index>(local_dim));
  for (std::size_t base = 0; base < amps_.size(); ++base) {
    if (base & mask) continue;
    for (std::size_t l = 0; l < local_dim; ++l) in(static_cast<Eigen::Index>(l)) = amps_[base | offsets[l]];
    const Eigen::VectorXcd out = m * in;
    for (std::size_t l = 0; l < local_dim; ++l) amps_[base | offsets[l]] = out(static_cast<Eigen::Index>(l));
  }
}

void StateVector::apply_unitary(std::span<const QubitId> targets, const Eigen::MatrixXcd& u) {
  const auto pos = positions(targets);
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << pos.size());
  if (u.rows() != dim || u.cols() != dim) {
    throw InvalidArgument("unitary dimension does not match the number of targets");
  }
  if (!gates::is_unitary(u)) throw InvalidArgument("matrix is not unitary");
  apply_local(pos, u);
}

double StateVector::apply_kraus(std::span<const QubitId> targets, const Eigen::MatrixXcd& k) {
  const auto pos = positions(targets);
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << pos.size());
  if (k.rows() != dim || k.cols() != dim) {
    throw InvalidArgument("operator dimension does not match the number of targets");
  }
  const std::vector<Complex> backup = amps_;
  apply_local(pos, k);
  const double n = norm();
  const double p = n * n;
  if (p <= 0) {
    amps_ = backup;
    return 0.0;
  }
  for (auto& a : amps_) a /= n;
  return p;
}

std::vector<double> StateVector::local_probabilities(const std::vector<int>& pos) const {
  const int k = static_cast<int>(pos.size());
  std::vector<double> probs(std::size_t{1} << k, 0.0);
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    std::size_t l = 0;
    for (int j = 0; j < k; ++j) l = (l << 1) | ((i >> pos[static_cast<std::size_t>(j)]) & 1U);
    probs[l] += std::norm(amps_[i]);
  }
  return probs;
}

void StateVector::collapse_computational(const std::vector<int>& pos, std::size_t local) {
  const int k = static_cast<int>(pos.size());
  double kept = 0;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    std::size_t l = 0;
    for (int j = 0; j < k; ++j) l = (l << 1) | ((i >> pos[static_cast<std::size_t>(j)]) & 1U);
    if (l != local) {
      amps_[i] = Complex{};
    } else {
      kept += std::norm(amps_[i]);
    }
  }
  const double s = 1.0 / std::sqrt(kept);
  for (auto& a : amps_) a *= s;
}

MeasurementRecord StateVector::measure(std::span<const QubitId> targets, const Basis& basis, Rng& rng) {
  const auto pos = positions(targets);
  const int k = static_cast<int>(pos.size());
  if (k == 0) throw InvalidArgument("measurement needs at least one target");
  if (!basis.is_computational() && basis.arity() != k) {
    throw InvalidArgument("basis '" + basis.name() + "' does not match the number of targets");
  }
  if (!basis.is_computational()) apply_local(pos, basis.matrix().adjoint());
  const auto probs = local_probabilities(pos);
  const std::size_t outcome = sample_index(probs, rng);
  collapse_computational(pos, outcome);
  if (!basis.is_computational()) apply_local(pos, basis.matrix());
  return {outcome, basis.label(outcome, k), probs[outcome], basis.name()};
}

Distribution StateVector::born_distribution(std::span<const QubitId> targets, const Basis& basis) const {
  const auto pos = positions(targets);
  const int k = static_cast<int>(pos.size());
  if (k == 0) throw InvalidArgument("measurement needs at least one target");
  if (!basis.is_computational() && basis.arity() != k) {
    throw InvalidArgument("basis '" + basis.name() + "' does not match the number of targets");
  }
  std::vector<double> probs;
  if (basis.is_computational()) {
    probs = local_probabilities(pos);
  } else {
    const Eigen::MatrixXcd rho = reduced_density(targets);
    const Eigen::MatrixXcd& v = basis.matrix();
    probs.resize(static_cast<std::size_t>(v.cols()));
    for (Eigen::Index i = 0; i < v.cols(); ++i) {
      probs[static_cast<std::size_t>(i)] = std::max(0.0, (v.col(i).adjoint() * rho * v.col(i))(0, 0).real());
    }
  }
  Distribution d;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    d.labels.push_back(basis.label(i, k));
    d.probabilities.push_back(probs[i]);
  }
  return d;
}

void StateVector::remove_basis_qubit(int pos, int bit) {
  std::vector<Complex> next(amps_.size() / 2);
  const std::size_t low_mask = (std::size_t{1} << pos) - 1;
  for (std::size_t j = 0; j < next.size(); ++j) {
    const std::size_t i = (j & low_mask) | ((j & ~low_mask) << 1) | (static_cast<std::size_t>(bit) << pos);
    next[j] = amps_[i];
  }
  amps_ = std::move(next);
  qubits_.erase(qubits_.begin() + pos);
}

void StateVector::free(std::span<const QubitId> targets, Rng& rng) {
  positions(targets);  // liveness and duplicate check before touching anything
  for (const auto& q : targets) {
    const auto rec = measure(q, Basis::computational(), rng);
    const auto pos = positions(std::span<const QubitId>(&q, 1));
    remove_basis_qubit(pos[0], static_cast<int>(rec.index));
  }
}

Eigen::MatrixXcd StateVector::reduced_density(std::span<const QubitId> targets) const {
  const auto pos = positions(targets);
  const int k = static_cast<int>(pos.size());
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << k);
  std::size_t mask = 0;
  for (int p : pos) mask |= std::size_t{1} << p;
  std::vector<std::size_t> offsets(static_cast<std::size_t>(dim), 0);
  for (std::size_t l = 0; l < offsets.size(); ++l) {
    for (int j = 0; j < k; ++j) {
      if ((l >> (k - 1 - j)) & 1U) offsets[l] |= std::size_t{1} << pos[static_cast<std::size_t>(j)];
    }
  }
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::VectorXcd v(dim);
  for (std::size_t base = 0; base < amps_.size(); ++base) {
    if (base & mask) continue;
    for (Eigen::Index l = 0; l < dim; ++l) v(l) = amps_[base | offsets[static_cast<std::size_t>(l)]];
    rho += v * v.adjoint();
  }
  return rho;
}

double StateVector::fidelity(std::span<const QubitId> targets, const Eigen::VectorXcd& psi) const {
  const Eigen::MatrixXcd rho = reduced_density(targets);
  if (psi.size() != rho.rows()) throw InvalidArgument("reference state has the wrong dimension");
  return (psi.adjoint() * rho * psi)(0, 0).real();
}

double StateVector::norm() const {
  double s = 0;
  for (const auto& a : amps_) s += std::norm(a);
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// gates

namespace gates {

Eigen::MatrixXcd identity(int qubits) {
  const auto d = static_cast<Eigen::Index>(std::size_t{1} << qubits);
  return Eigen::MatrixXcd::Identity(d, d);
}

Eigen::MatrixXcd x() {
  Eigen::MatrixXcd m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Eigen::MatrixXcd y() {
  Eigen::MatrixXcd m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

Eigen::MatrixXcd z() {
  Eigen::MatrixXcd m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Eigen::MatrixXcd h() {
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXcd m(2, 2);
  m << s, s, s, -s;
  return m;
}

Eigen::MatrixXcd cnot() {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
  return m;
}

Eigen::MatrixXcd swap() {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1;
  return m;
}

Eigen::VectorXcd random_state(int dim, Rng& rng) {
  // Complex Gaussian entries, normalized, give the Haar measure.
  Eigen::VectorXcd v(dim);
  auto gauss = [&rng]() {
    const double u1 = std::max(rng.uniform(), 1e-300);
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  };
  for (int i = 0; i < dim; ++i) v(i) = Complex(gauss(), gauss());
  return v / v.norm();
}

Eigen::MatrixXcd random_unitary(int dim, Rng& rng) {
  Eigen::MatrixXcd g(dim, dim);
  for (int c = 0; c < dim; ++c) g.col(c) = random_state(dim, rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    const Complex d = r(i, i);
    if (std::abs(d) > 0) q.col(i) *= d / std::abs(d);
  }
  return q;
}

bool is_unitary(const Eigen::MatrixXcd& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const Eigen::MatrixXcd diff = u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
  return diff.cwiseAbs().maxCoeff() < tol;
}

}  // namespace gates

}  // namespace qpv
