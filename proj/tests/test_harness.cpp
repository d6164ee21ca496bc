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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

#include "qpv/errors.hpp"
#include "qpv/harness.hpp"

using namespace qpv;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(name: t
seed: 9
trials: 4
protocol:
  kind: p1
  rounds: 6
adversary:
  strategy: honest
)";

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "qpvsim_harness_test";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(QPVSIM_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("scenario parsing fills defaults and overrides") {
  const auto s = parse_scenario(kMinimal);
  CHECK(s.name == "t");
  CHECK(s.seed == 9);
  CHECK(s.trials == 4);
  CHECK(s.protocol.kind == ProtocolKind::P1);
  CHECK(s.protocol.rounds == 6);
  CHECK(s.geometry.v1 == 100);
  CHECK(s.adversary.strategy == Strategy::Honest);
}

TEST_CASE("malformed and invalid scenarios are rejected") {
  CHECK_THROWS_AS(parse_scenario("name: [unclosed"), ParseError);
  CHECK_THROWS_AS(parse_scenario("name: x\nprotocol:\n  kind: p1\n  colour: red\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario("name: x\nprotocol:\n  kind: p1\n  rounds: many\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario("name: x\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario("name: x\nprotocol:\n  kind: p7\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("name: x\ntrials: 0\nprotocol:\n  kind: p1\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("name: x\nprotocol:\n  kind: p1\ngeometry:\n  e1: 52\nadversary:\n"
                                 "  strategy: relay\n"),
                  ConfigError);
}

TEST_CASE("results are reproducible and accept_rate is exact") {
  const auto s = parse_scenario(kMinimal);
  const auto a = to_json(run_scenario(s)).dump();
  const auto b = to_json(run_scenario(s)).dump();
  CHECK(a == b);
  const auto j = nlohmann::json::parse(a);
  for (const char* key : {"schema_version", "scenario_hash", "seed", "trials", "accept_rate", "per_trial", "ledger",
                          "timing_summary"})
    CHECK_MESSAGE(j.contains(key), key);
  CHECK(j["timing_summary"].contains("max_response_lateness"));
  CHECK(j["per_trial"].size() == 4);
  int accepted = 0;
  for (const auto& t : j["per_trial"]) accepted += t["accept"].get<bool>();
  CHECK(j["accept_rate"].get<double>() == static_cast<double>(accepted) / 4);
  CHECK(j["scenario_hash"].get<std::string>() == fnv1a_hex(kMinimal));
}

TEST_CASE("trials are isolated and seeded by index") {
  const auto s = parse_scenario(kMinimal);
  const auto t2 = run_trial(s, 2, false);
  const auto all = run_scenario(s);
  CHECK(all.per_trial[2].seed == t2.result.seed);
  CHECK(all.per_trial[2].correct_rounds == t2.result.correct_rounds);
  CHECK(run_trial(s, 1, false).result.seed != t2.result.seed);
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("summarize builds a protocol by strategy matrix") {
  nlohmann::json a = {{"schema_version", kSchemaVersion}, {"protocol", "p1"}, {"strategy", "honest"},
                      {"accept_rate", 1.0}, {"ledger", {{"waste_fraction", 0.0}}}};
  nlohmann::json b = a;
  b["strategy"] = "sinqc";
  b["ledger"]["waste_fraction"] = 0.99;
  const auto md = summarize({a, b}, "md");
  CHECK(md.find("| p1 |") != std::string::npos);
  CHECK(md.find("sinqc") != std::string::npos);
  const auto csv = summarize({a, b}, "csv");
  CHECK(csv.find("p1,sinqc,1,0.99") != std::string::npos);
  CHECK_THROWS_AS(summarize({}, "md"), InvalidArgument);
  nlohmann::json old = a;
  old["schema_version"] = kSchemaVersion + 1;
  CHECK_THROWS_AS(summarize({a, old}, "md"), InvalidArgument);
}

TEST_CASE("trace filter keeps the header and one round") {
  const std::string csv =
      "time,party,kind,detail\n"
      "1,V0,send,\"round=1 label=x\"\n"
      "2,V0,send,\"round=12 label=x\"\n"
      "3,P,respond,round=1 value=0\n";
  const auto out = filter_trace(csv, 1);
  CHECK(out == "time,party,kind,detail\n1,V0,send,\"round=1 label=x\"\n3,P,respond,round=1 value=0\n");
}

TEST_CASE("CLI: run, summarize, trace and exit codes") {
  const auto scen = scratch("cli.yaml");
  const auto out = scratch("out");
  write(scen, kMinimal);
  CHECK(cli("run " + scen.string() + " --trials 2 --seed 3 --out " + out.string()) == 0);
  const auto result = out / "t.results.json";
  REQUIRE(fs::exists(result));
  REQUIRE(fs::exists(out / "t.trace.csv"));
  const auto j = nlohmann::json::parse(slurp(result));
  CHECK(j["trials"] == 2);
  CHECK(j["seed"] == 3);
  CHECK(j["trace_file"] == "t.trace.csv");
  CHECK(cli("summarize " + result.string() + " --format csv") == 0);
  CHECK(cli("trace " + result.string() + " --round 0") == 0);

  const auto bad = scratch("bad.yaml");
  write(bad, "name: [oops");
  CHECK(cli("run " + bad.string() + " --out " + out.string()) == 1);
  const auto inside = scratch("inside.yaml");
  write(inside, "name: x\nprotocol:\n  kind: p1\ngeometry:\n  e0: 47\nadversary:\n  strategy: relay\n");
  CHECK(cli("run " + inside.string() + " --out " + out.string()) == 2);
  CHECK(cli("summarize") == 1);
  CHECK(cli("run /nonexistent.yaml") == 1);
}
