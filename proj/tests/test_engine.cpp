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
#include <functional>
#include <string>
#include <vector>

#include "qpv/engine.hpp"
#include "qpv/errors.hpp"
#include "qpv/spacetime.hpp"

using namespace qpv;

namespace {

// Agent whose callbacks are set per test.
struct Scripted : Agent {
  std::function<void(Context&)> start;
  std::function<void(Context&, const Envelope&)> recv;
  std::function<void(Context&, int)> wake;
  std::function<void(Context&)> tick;
  std::function<bool(const Envelope&)> takes;
  TapMode mode = TapMode::Notify;
  std::vector<std::pair<Time, std::string>> log;

  void on_start(Context& c) override {
    if (start) start(c);
  }
  void on_receive(Context& c, const Envelope& e) override {
    log.emplace_back(c.now(), e.label);
    if (recv) recv(c, e);
  }
  void on_wake(Context& c, int tag) override {
    if (wake) wake(c, tag);
  }
  void on_tick(Context& c) override {
    if (tick) tick(c);
  }
  TapMode tap_mode() const override { return mode; }
  bool intercepts(const Envelope& e) const override { return takes && takes(e); }
};

}  // namespace

TEST_CASE("light-speed arithmetic") {
  CHECK(arrival_time({0}, {100}) == 100);
  CHECK(arrival_time({100}, {0}, 2.0) == 50);
  CHECK_THROWS_AS(arrival_time({0}, {1}, 0.0), InvalidArgument);
  SecureRegion r{{50}, 5};
  CHECK(r.contains({45}));
  CHECK_FALSE(r.contains({44.9}));
}

TEST_CASE("tick schedule and windows") {
  const auto t = tick_schedule(0.25, 10, 11);
  REQUIRE(t.size() == 5);
  CHECK(t.back() == 11);
  CHECK(tick_window(10.3, 0.25, 10, t.size()) == std::optional<std::size_t>(1));
  CHECK_FALSE(tick_window(9.9, 0.25, 10, t.size()).has_value());
  CHECK(every_signal_caught_once({10, 10.5, 10.75}, 0.25, 10, 11));
  CHECK_FALSE(every_signal_caught_once({10, 10.1}, 0.25, 10, 11));
  CHECK_FALSE(every_signal_caught_once({12}, 0.25, 10, 11));
}

TEST_CASE("classical signals arrive after distance over c") {
  Engine e(1);
  Scripted a, b;
  a.start = [](Context& c) { c.send_toward({30}, Classical{"hi", {1}}, {Medium::Open, 0, "ping"}); };
  e.add_party("A", {0}, Role::Verifier, &a);
  e.add_party("B", {30}, Role::Prover, &b);
  e.run(5);
  REQUIRE(b.log.size() == 1);
  CHECK(b.log[0].first == 35);
}

TEST_CASE("open signals are taken by the first interceptor, addressed ones never") {
  Engine e(1);
  Scripted v, near, far, dest;
  v.start = [](Context& c) {
    c.send_toward({100}, Classical{"x", {}}, {Medium::Open, 0, "open"});
    c.send_to(3, Classical{"x", {}}, 0, "direct");
  };
  near.takes = [](const Envelope&) { return true; };
  far.takes = [](const Envelope&) { return true; };
  e.add_party("V", {0}, Role::Verifier, &v);
  e.add_party("E_far", {60}, Role::Adversary, &far);
  e.add_party("E_near", {20}, Role::Adversary, &near);
  e.add_party("P", {100}, Role::Prover, &dest);
  e.run();
  REQUIRE(near.log.size() == 1);
  CHECK(near.log[0] == std::pair<Time, std::string>{20, "open"});
  CHECK(far.log.empty());
  REQUIRE(dest.log.size() == 1);
  CHECK(dest.log[0] == std::pair<Time, std::string>{100, "direct"});
}

TEST_CASE("a signal toward an empty point is lost along with its qubits") {
  Engine e(1);
  Scripted v;
  v.start = [](Context& c) {
    const auto q = c.alloc();
    c.send_toward({40}, QubitPayload{{q}}, {Medium::Open, 0, "q"});
  };
  e.add_party("V", {0}, Role::Verifier, &v);
  e.run();
  CHECK(e.sv().num_qubits() == 0);
}

TEST_CASE("equal-time events: arrivals first, then ticks, then computation; ranks break ties") {
  Engine e(1);
  std::vector<std::string> order;
  Scripted a, b, r;
  a.start = [](Context& c) { c.send_to(2, Classical{"from_a", {}}, 0, "a"); };
  b.start = [](Context& c) { c.send_to(2, Classical{"from_b", {}}, 0, "b"); };
  r.start = [](Context& c) { c.wake_at(10, 7); };
  r.recv = [&](Context&, const Envelope& env) { order.push_back("recv " + env.label); };
  r.wake = [&](Context&, int tag) { order.push_back("wake " + std::to_string(tag)); };
  r.tick = [&](Context&) { order.push_back("tick"); };
  e.add_party("A", {0}, Role::Verifier, &a);
  e.add_party("B", {20}, Role::Verifier, &b);
  e.add_party("R", {10}, Role::Prover, &r);
  e.add_ticks(2, {10});
  e.run();
  CHECK(order == std::vector<std::string>{"recv a", "recv b", "tick", "wake 7"});
}

TEST_CASE("opening a promise before it is resolved is a causality violation") {
  Engine e(1);
  Scripted a, b;
  a.start = [](Context& c) {
    const auto p = c.make_promise();
    c.send_to(1, PromiseRef{p}, 0, "promise");
    c.wake_at(50, static_cast<int>(p));
  };
  a.wake = [](Context& c, int p) { c.resolve(static_cast<std::uint64_t>(p), Classical{"v", {1}}); };
  b.recv = [](Context& c, const Envelope& env) { c.open_classical(env); };
  e.add_party("A", {0}, Role::Adversary, &a);
  e.add_party("B", {10}, Role::Adversary, &b);
  CHECK_THROWS_AS(e.run(), CausalityViolation);
}

TEST_CASE("a resolved promise opens to its value") {
  Engine e(1);
  Scripted a, b;
  std::int64_t got = -1;
  a.start = [](Context& c) {
    const auto p = c.make_promise();
    c.resolve(p, Classical{"v", {42}});
    c.send_to(1, PromiseRef{p}, 0, "promise");
  };
  b.recv = [&](Context& c, const Envelope& env) { got = c.open_classical(env).values.at(0); };
  e.add_party("A", {0}, Role::Adversary, &a);
  e.add_party("B", {10}, Role::Adversary, &b);
  e.run();
  CHECK(got == 42);
}

TEST_CASE("scheduling in the past is rejected") {
  Engine e(1);
  Scripted a;
  a.start = [](Context& c) { c.wake_at(c.now() - 1); };
  e.add_party("A", {0}, Role::Verifier, &a);
  CHECK_THROWS_AS(e.run(10), CausalityViolation);
}

TEST_CASE("only the holder may touch a qubit, and not while it is in flight") {
  Engine e(1);
  Scripted a, b;
  QubitId q;
  a.start = [&](Context& c) {
    q = c.alloc();
    c.send_to(1, QubitPayload{{q}}, 0, "q");
    const std::array<QubitId, 1> qs{q};
    c.state(qs);
  };
  e.add_party("A", {0}, Role::Verifier, &a);
  e.add_party("B", {10}, Role::Prover, &b);
  CHECK_THROWS_AS(e.run(), CausalityViolation);
}

TEST_CASE("custody moves with the envelope") {
  Engine e(1);
  Scripted a, b;
  QubitId q;
  bool held = false;
  a.start = [&](Context& c) {
    q = c.alloc();
    c.send_to(1, QubitPayload{{q}}, 0, "q");
  };
  b.recv = [&](Context& c, const Envelope&) { held = c.holds(q); };
  e.add_party("A", {0}, Role::Verifier, &a);
  e.add_party("B", {10}, Role::Prover, &b);
  e.run();
  CHECK(held);
  CHECK(e.custodian(q) == std::optional<PartyId>(1));
}

TEST_CASE("detect taps deliver clicks and let vacuum through") {
  Engine e(1);
  Scripted v, tap, p;
  v.start = [](Context& c) {
    c.send_toward({100}, QubitPayload{{c.alloc(1)}}, {Medium::Rail, 0, "photon"});
    c.send_toward({100}, QubitPayload{{c.alloc(0)}}, {Medium::Rail, 1, "vacuum"});
  };
  tap.mode = TapMode::Detect;
  tap.takes = [](const Envelope&) { return true; };
  e.add_party("V", {0}, Role::Verifier, &v);
  e.add_party("E", {30}, Role::Adversary, &tap);
  e.add_party("P", {100}, Role::Prover, &p);
  e.run();
  REQUIRE(tap.log.size() == 1);
  CHECK(tap.log[0].second == "photon");
  REQUIRE(p.log.size() == 1);
  CHECK(p.log[0] == std::pair<Time, std::string>{100, "vacuum"});
}

TEST_CASE("tick taps see only signals that land on a tick") {
  Engine e(1);
  Scripted v, tap, p;
  std::vector<std::string> seen;
  v.start = [](Context& c) {
    c.send_toward({100}, QubitPayload{{c.alloc()}}, {Medium::Open, 0, "on_tick"});
    c.wake_at(0.5, 1);
  };
  v.wake = [](Context& c, int) { c.send_toward({100}, QubitPayload{{c.alloc()}}, {Medium::Open, 1, "off_tick"}); };
  tap.mode = TapMode::Tick;
  tap.takes = [](const Envelope&) { return true; };
  tap.tick = [&](Context& c) {
    for (const auto& env : c.take_channel()) {
      seen.push_back(env.label);
      c.free(std::get<QubitPayload>(env.payload).qubits);
    }
  };
  e.add_party("V", {0}, Role::Verifier, &v);
  e.add_party("E", {30}, Role::Adversary, &tap);
  e.add_party("P", {100}, Role::Prover, &p);
  e.add_ticks(1, {30, 31});
  e.run();
  CHECK(seen == std::vector<std::string>{"on_tick"});
  REQUIRE(p.log.size() == 1);
  CHECK(p.log[0].second == "off_tick");
}

TEST_CASE("identical seeds replay identical traces") {
  auto once = [](std::uint64_t seed) {
    Engine e(seed);
    Scripted a, b;
    a.start = [](Context& c) {
      for (int i = 0; i < 20; ++i) {
        const auto q = c.alloc();
        c.state(std::array<QubitId, 1>{q}).apply_unitary(q, gates::h());
        c.send_toward({10}, QubitPayload{{q}}, {Medium::Open, i, "q"});
      }
    };
    b.recv = [](Context& c, const Envelope& env) {
      const auto qs = std::get<QubitPayload>(env.payload).qubits;
      const auto r = c.state(qs).measure(qs, Basis::computational(), c.rng());
      c.log("bit", "round=" + std::to_string(env.round) + " value=" + r.outcome);
      c.free(qs);
    };
    e.add_party("A", {0}, Role::Verifier, &a);
    e.add_party("B", {10}, Role::Prover, &b);
    e.run();
    return e.trace_csv();
  };
  CHECK(once(5) == once(5));
  CHECK(once(5) != once(6));
  CHECK(once(5).rfind("time,party,kind,detail\n", 0) == 0);
}
