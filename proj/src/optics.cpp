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

#include "qpv/optics.hpp"

#include <array>
#include <cmath>

#include "qpv/errors.hpp"

namespace qpv::optics {

std::string to_string(Detection d) {
  switch (d) {
    case Detection::D0:
      return "D0";
    case Detection::D1:
      return "D1";
    case Detection::NoClick:
      return "NoClick";
  }
  return "?";
}

const Eigen::MatrixXcd& beam_splitter() {
  static const Eigen::MatrixXcd bs = [] {
    const double s = 1.0 / std::sqrt(2.0);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
    // index = 2*upper + lower
    m(0, 0) = 1;
    m(3, 3) = 1;
    m(2, 2) = s, m(1, 2) = s;
    m(2, 1) = s, m(1, 1) = -s;
    return m;
  }();
  return bs;
}

DualRail inject_photon(StateVector& sv, Source source) {
  const QubitId upper = sv.alloc(source == Source::S0 ? 1 : 0);
  const QubitId lower = sv.alloc(source == Source::S0 ? 0 : 1);
  const std::array<QubitId, 2> rails{upper, lower};
  sv.apply_unitary(rails, beam_splitter());
  return {upper, lower};
}

DualRail vacuum_pair(StateVector& sv) {
  const QubitId upper = sv.alloc(0);
  const QubitId lower = sv.alloc(0);
  return {upper, lower};
}

Detection interfere_and_detect(StateVector& sv, const DualRail& dr, Rng& rng) {
  const std::array<QubitId, 2> rails{dr.upper, dr.lower};
  sv.apply_unitary(rails, beam_splitter());
  const auto rec = sv.measure(rails, Basis::computational(), rng);
  sv.free(rails, rng);
  switch (rec.index) {
    case 0b10:
      return Detection::D0;
    case 0b01:
      return Detection::D1;
    case 0b00:
      return Detection::NoClick;
    default:
      throw InvalidArgument("two photons detected in a single-photon interferometer");
  }
}

int which_way_measure(StateVector& sv, const DualRail& dr, Channel channel, Rng& rng) {
  const QubitId q = channel == Channel::Upper ? dr.upper : dr.lower;
  return static_cast<int>(sv.measure(q, Basis::computational(), rng).index);
}

DetectionDistribution detection_distribution(const StateVector& sv, const DualRail& dr) {
  StateVector copy = sv;
  const std::array<QubitId, 2> rails{dr.upper, dr.lower};
  copy.apply_unitary(rails, beam_splitter());
  const auto dist = copy.born_distribution(rails, Basis::computational());
  return {dist.at("10"), dist.at("01"), dist.at("00"), dist.at("11")};
}

}  // namespace qpv::optics
