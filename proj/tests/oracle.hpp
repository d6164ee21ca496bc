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

// Brute-force reference computations on explicit matrices, written without
// any of the library's index arithmetic.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qpv/qsim.hpp"

namespace oracle {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using cd = std::complex<double>;

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Vec kron(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (int i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline Vec ket(std::initializer_list<cd> amps) {
  Vec v(static_cast<int>(amps.size()));
  int i = 0;
  for (auto a : amps) v(i++) = a;
  return v;
}

inline Vec basis_ket(int dim, int index) {
  Vec v = Vec::Zero(dim);
  v(index) = 1;
  return v;
}

inline Mat projector(const Vec& v) { return v * v.adjoint(); }

/// Whole register of `sv` as a vector in "first listed qubit is the most
/// significant bit" order, for the given qubit order.
inline Vec state_in_order(const qpv::StateVector& sv, const std::vector<qpv::QubitId>& order) {
  const int n = static_cast<int>(order.size());
  const auto& reg = sv.qubits();
  std::vector<int> pos(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < static_cast<int>(reg.size()); ++j)
      if (reg[j] == order[i]) pos[i] = j;
  Vec out = Vec::Zero(1 << n);
  const auto& amps = sv.amplitudes();
  for (std::size_t g = 0; g < amps.size(); ++g) {
    int local = 0;
    for (int i = 0; i < n; ++i) local = (local << 1) | static_cast<int>((g >> pos[i]) & 1U);
    out(local) = amps[g];
  }
  return out;
}

/// Partial trace keeping the first `keep` of `n` qubits (MSB side).
inline Mat trace_out_tail(const Mat& rho, int n, int keep) {
  const int dk = 1 << keep, dr = 1 << (n - keep);
  Mat out = Mat::Zero(dk, dk);
  for (int i = 0; i < dk; ++i)
    for (int j = 0; j < dk; ++j)
      for (int r = 0; r < dr; ++r) out(i, j) += rho(i * dr + r, j * dr + r);
  return out;
}

/// Operator that applies `u` to the leading qubits of an n-qubit register.
inline Mat on_head(const Mat& u, int n) {
  const int k = static_cast<int>(std::lround(std::log2(static_cast<double>(u.rows()))));
  return kron(u, Mat::Identity(1 << (n - k), 1 << (n - k)));
}

inline Mat on_tail(const Mat& u, int n) {
  const int k = static_cast<int>(std::lround(std::log2(static_cast<double>(u.rows()))));
  return kron(Mat::Identity(1 << (n - k), 1 << (n - k)), u);
}

inline Mat hadamard() {
  const double s = 1.0 / std::sqrt(2.0);
  Mat h(2, 2);
  h << s, s, s, -s;
  return h;
}

inline Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline Vec phi_plus() {
  const double s = 1.0 / std::sqrt(2.0);
  return ket({s, 0, 0, s});
}

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

// Pseudo-inverse square root of a Hermitian PSD matrix.
inline Mat inv_sqrt(const Mat& m, Mat& kernel) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  Mat out = Mat::Zero(m.rows(), m.cols());
  kernel = Mat::Zero(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i) {
    const double ev = es.eigenvalues()(i);
    const Vec v = es.eigenvectors().col(i);
    if (ev > 1e-12) out += (1.0 / std::sqrt(ev)) * v * v.adjoint();
    else kernel += v * v.adjoint();
  }
  return out;
}

// Entanglement fidelity of square-root-measurement PBT with n ports, from
// the full density matrix of reference, input and n resource pairs.
inline double pbt_fidelity(int n) {
  const int ds = 1 << (n + 1);  // sender: input c then a_1..a_n
  const int dj = 1 << (n + 1);  // reference r then b_1..b_n
  Mat psi = Mat::Zero(ds, dj);
  const double amp = std::pow(2.0, -(n + 1) / 2.0);
  for (int x = 0; x < ds; ++x) psi(x, x) = amp;  // c = r and a_i = b_i

  // Signals: Phi+ on (c, a_k), identity elsewhere.
  std::vector<Mat> sigma;
  Mat rho = Mat::Zero(ds, ds);
  for (int k = 0; k < n; ++k) {
    Vec v = Vec::Zero(ds);
    Mat s = Mat::Zero(ds, ds);
    for (int rest = 0; rest < (1 << n); ++rest) {
      if ((rest >> (n - 1 - k)) & 1) continue;
      Vec w = Vec::Zero(ds);
      for (int bit = 0; bit < 2; ++bit) {
        const int a = rest | (bit << (n - 1 - k));
        w((bit << n) | a) = 1.0 / std::sqrt(2.0);
      }
      s += w * w.adjoint();
    }
    sigma.push_back(s);
    rho += s;
  }
  Mat kernel;
  const Mat r = inv_sqrt(rho, kernel);

  double fe = 0;
  const Vec phi = phi_plus();
  for (int k = 0; k < n; ++k) {
    const Mat e = r * sigma[k] * r + kernel / n;
    const Mat out = psi.transpose() * e.transpose() * psi.conjugate();
    // Keep r and b_k.
    Mat red = Mat::Zero(4, 4);
    for (int j = 0; j < dj; ++j)
      for (int jp = 0; jp < dj; ++jp) {
        const int rest_mask = ((1 << n) - 1) & ~(1 << (n - 1 - k));
        if ((j & rest_mask) != (jp & rest_mask)) continue;
        const int i = (((j >> n) & 1) << 1) | ((j >> (n - 1 - k)) & 1);
        const int ip = (((jp >> n) & 1) << 1) | ((jp >> (n - 1 - k)) & 1);
        red(i, ip) += out(j, jp);
      }
    fe += (phi.adjoint() * red * phi)(0, 0).real();
  }
  return fe;
}

}  // namespace oracle
