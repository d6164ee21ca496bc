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

#include "qpv/spacetime.hpp"

#include <cmath>
#include <set>

#include "qpv/errors.hpp"

namespace qpv {

Time arrival_time(Position from, Position to, double c) {
  if (!std::isfinite(from.x) || !std::isfinite(to.x)) throw InvalidArgument("position must be finite");
  if (!(c > 0)) throw InvalidArgument("speed of light must be positive");
  return std::abs(to.x - from.x) / c;
}

bool SecureRegion::contains(Position p) const { return std::abs(p.x - center.x) <= radius; }

std::vector<Time> tick_schedule(Time dt, Time start, Time end) {
  if (!(dt > 0)) throw InvalidArgument("tick interval must be positive");
  if (end < start) return {};
  // Computing each tick as start + i*dt avoids accumulated rounding.
  const auto count = static_cast<std::size_t>(std::floor((end - start) / dt + 1e-12)) + 1;
  std::vector<Time> ticks;
  ticks.reserve(count);
  for (std::size_t i = 0; i < count; ++i) ticks.push_back(start + static_cast<double>(i) * dt);
  return ticks;
}

std::optional<std::size_t> tick_window(Time t, Time dt, Time start, std::size_t num_ticks) {
  if (!(dt > 0)) throw InvalidArgument("tick interval must be positive");
  if (t < start) return std::nullopt;
  const auto i = static_cast<std::size_t>(std::floor((t - start) / dt));
  if (i >= num_ticks) return std::nullopt;
  return i;
}

bool every_signal_caught_once(const std::vector<Time>& signal_times, Time dt, Time start, Time end) {
  const auto ticks = tick_schedule(dt, start, end);
  std::set<std::size_t> used;
  for (Time t : signal_times) {
    const auto w = tick_window(t, dt, start, ticks.size());
    if (!w || !used.insert(*w).second) return false;
  }
  return true;
}

}  // namespace qpv
