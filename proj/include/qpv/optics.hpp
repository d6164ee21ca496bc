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

// Dual-rail single-photon encoding. Each channel of the interferometer is an
// occupation qubit: |1> means the photon is in that channel, |0> vacuum.

#include <string>

#include "qpv/qsim.hpp"

namespace qpv::optics {

enum class Source { S0, S1 };
enum class Detection { D0, D1, NoClick };
enum class Channel { Upper, Lower };

std::string to_string(Detection d);

struct DualRail {
  QubitId upper;
  QubitId lower;
};

/// 50:50 beam splitter on (upper, lower):
///   |10> -> (|10> + |01>)/sqrt2,  |01> -> (|10> - |01>)/sqrt2,
/// identity on |00> and |11>. It is its own inverse.
const Eigen::MatrixXcd& beam_splitter();

/// Photon from S0 gives (|10>+|01>)/sqrt2, from S1 (|10>-|01>)/sqrt2.
DualRail inject_photon(StateVector& sv, Source source);

/// Both rails empty; the "no wave packet" signal.
DualRail vacuum_pair(StateVector& sv);

/// Recombines the rails on a beam splitter and reads both detectors.
/// 10 -> D0, 01 -> D1, 00 -> NoClick. The rails are freed.
Detection interfere_and_detect(StateVector& sv, const DualRail& dr, Rng& rng);

/// Z measurement of one rail (photon present = 1). Collapses the photon.
int which_way_measure(StateVector& sv, const DualRail& dr, Channel channel, Rng& rng);

struct DetectionDistribution {
  double d0 = 0;
  double d1 = 0;
  double no_click = 0;
  double two_photon = 0;  ///< probability of outcome 11; zero for valid inputs
};

/// Exact detector statistics of interfere_and_detect, without collapse.
DetectionDistribution detection_distribution(const StateVector& sv, const DualRail& dr);

}  // namespace qpv::optics
