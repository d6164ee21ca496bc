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

// Scenario files, batches of trials and their machine-readable results.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpv/adversary.hpp"
#include "qpv/protocols.hpp"

namespace qpv {

inline constexpr int kSchemaVersion = 1;

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  int trials = 1;
  ProtocolConfig protocol;
  Geometry geometry;
  AdversaryConfig adversary;
  int qubit_cap = kDefaultQubitCap;
  int trace_trial = 0;
  std::string source;  ///< original text, hashed into results

  void validate() const;
};

/// Throws ParseError for malformed text and ConfigError for invalid values.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// FNV-1a 64-bit digest as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  bool accept = false;
  std::string reason;
  int correct_rounds = 0;
  int timely_rounds = 0;
  int answered_rounds = 0;
  Time max_lateness = 0;
  std::uint64_t consumed = 0;
  std::uint64_t useful = 0;
};

struct TrialRun {
  TrialResult result;
  Verdict verdict;
  Script script;
  std::string trace_csv;
  std::vector<TraceRow> trace;
  std::string note;
};

/// Runs one trial with seed Rng::split(scenario.seed, trial).
TrialRun run_trial(const Scenario& scenario, int trial, bool keep_trace);

struct RunResult {
  std::string name;
  std::string scenario_hash;
  std::string protocol;
  std::string strategy;
  AdversaryConfig adversary;
  std::uint64_t seed = 0;
  int trials = 0;
  int accepted = 0;
  double accept_rate = 0;
  LedgerReport ledger;
  Time max_response_lateness = 0;
  std::vector<TrialResult> per_trial;
  std::string note;
  std::string trace_file;
};

/// Runs every trial. When `trace_csv` is given it receives the trace of the
/// scenario's trace_trial.
RunResult run_scenario(const Scenario& scenario, std::string* trace_csv = nullptr);

nlohmann::json to_json(const RunResult& r);

/// Protocol x strategy table of accept rate and waste fraction.
std::string summarize(const std::vector<nlohmann::json>& results, const std::string& format);

/// CSV rows of a trace whose detail carries the tag round=K.
std::string filter_trace(const std::string& csv, int round);

}  // namespace qpv
