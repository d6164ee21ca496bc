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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qpv/errors.hpp"
#include "qpv/harness.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qpv::ParseError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_result(const fs::path& path) {
  try {
    return nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::exception& e) {
    throw qpv::ParseError(path.string() + ": " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw qpv::InvalidArgument("cannot write " + path.string());
  out << text;
}

int cmd_run(const std::string& scenario_path, std::optional<int> trials, std::optional<std::uint64_t> seed,
            const std::string& out_dir) {
  auto scenario = qpv::load_scenario(scenario_path);
  if (trials) {
    scenario.trials = *trials;
    if (scenario.trace_trial >= scenario.trials) scenario.trace_trial = 0;
  }
  if (seed) scenario.seed = *seed;
  scenario.validate();

  std::string trace;
  auto result = qpv::run_scenario(scenario, &trace);
  fs::create_directories(out_dir);
  const auto trace_name = scenario.name + ".trace.csv";
  result.trace_file = trace_name;
  write_file(fs::path(out_dir) / trace_name, trace);
  const auto json_path = fs::path(out_dir) / (scenario.name + ".results.json");
  write_file(json_path, qpv::to_json(result).dump(2) + "\n");

  std::cout << scenario.name << ": accept_rate " << result.accept_rate << " (" << result.accepted << "/"
            << result.trials << "), waste_fraction " << result.ledger.waste_fraction
            << ", max_response_lateness " << result.max_response_lateness << "\n";
  if (!result.note.empty()) std::cout << "note: " << result.note << "\n";
  std::cout << "wrote " << json_path.string() << "\n";
  return 0;
}

int cmd_summarize(const std::vector<std::string>& paths, const std::string& format) {
  std::vector<nlohmann::json> results;
  for (const auto& p : paths) results.push_back(read_result(p));
  std::cout << qpv::summarize(results, format);
  return 0;
}

int cmd_trace(const std::string& result_path, int round) {
  const auto result = read_result(result_path);
  if (!result.contains("trace_file")) throw qpv::InvalidArgument("result has no trace_file");
  const auto trace_path = fs::path(result_path).parent_path() / result["trace_file"].get<std::string>();
  std::cout << qpv::filter_trace(slurp(trace_path), round);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qpvsim: discrete-event simulator for 1D quantum position verification"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario file");
  std::string scenario_path;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  run->add_option("scenario", scenario_path, "Scenario YAML file")->required();
  run->add_option("--trials", trials, "Override the number of trials");
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--out", out_dir, "Output directory");

  auto* sum = app.add_subcommand("summarize", "Tabulate results files");
  std::vector<std::string> result_paths;
  std::string format = "md";
  sum->add_option("results", result_paths, "Results JSON files")->required();
  sum->add_option("--format", format, "csv or md")->check(CLI::IsMember({"csv", "md"}));

  auto* tr = app.add_subcommand("trace", "Print trace rows of one round");
  std::string trace_result;
  int round = 0;
  tr->add_option("result", trace_result, "Results JSON file")->required();
  tr->add_option("--round", round, "Round index")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(scenario_path, trials, seed, out_dir);
    if (*sum) return cmd_summarize(result_paths, format);
    if (*tr) return cmd_trace(trace_result, round);
  } catch (const qpv::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const qpv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
