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

// One-dimensional geometry and clock arithmetic. Every signal, classical or
// quantum, travels at speed c; all parties share one global clock.

#include <cstddef>
#include <optional>
#include <vector>

#include "qpv/common.hpp"

namespace qpv {

/// Point on the line, in light-units (c = 1 by default).
struct Position {
  double x = 0;
  auto operator<=>(const Position&) const = default;
};

/// Time for a light-speed signal to go from `from` to `to`.
Time arrival_time(Position from, Position to, double c = 1.0);

/// Zone around the prover that adversaries cannot enter.
struct SecureRegion {
  Position center;
  double radius = 0;

  bool contains(Position p) const;
};

/// Tick times start + i*dt for i = 0..floor((end-start)/dt).
std::vector<Time> tick_schedule(Time dt, Time start, Time end);

/// Index of the tick window [t_i, t_i + dt) containing `t`, if any.
std::optional<std::size_t> tick_window(Time t, Time dt, Time start, std::size_t num_ticks);

/// True when every time lies in some window and no window holds two times.
bool every_signal_caught_once(const std::vector<Time>& signal_times, Time dt, Time start, Time end);

}  // namespace qpv
