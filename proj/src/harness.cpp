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

#include "qpv/harness.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "qpv/errors.hpp"

namespace qpv {

namespace {

void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) throw ParseError(where + " must be a mapping");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!ok.count(key)) throw ParseError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (node[key]) out = node[key].as<T>();
}

template <typename T>
void read_opt(const YAML::Node& node, const char* key, std::optional<T>& out) {
  if (node[key]) out = node[key].as<T>();
}

}  // namespace

void Scenario::validate() const {
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (qubit_cap < 2 || qubit_cap > 30) throw ConfigError("qubit_cap must be in [2, 30]");
  if (trace_trial < 0 || trace_trial >= trials) throw ConfigError("trace_trial out of range");
  geometry.validate();
  protocol.validate();
  adversary.validate(protocol.kind, geometry);
}

Scenario parse_scenario(const std::string& text) {
  Scenario s;
  s.source = text;
  try {
    const YAML::Node root = YAML::Load(text);
    check_keys(root, "scenario",
               {"name", "seed", "trials", "protocol", "geometry", "adversary", "qubit_cap", "trace_trial"});
    read(root, "name", s.name);
    read(root, "seed", s.seed);
    read(root, "trials", s.trials);
    read(root, "qubit_cap", s.qubit_cap);
    read(root, "trace_trial", s.trace_trial);
    if (!root["protocol"]) throw ParseError("missing protocol section");
    const auto p = root["protocol"];
    check_keys(p, "protocol", {"kind", "rounds", "period", "rate", "g_min", "g_adj", "lattice", "first", "epsilon"});
    if (!p["kind"]) throw ParseError("protocol.kind is required");
    s.protocol.kind = protocol_from_string(p["kind"].as<std::string>());
    read(p, "rounds", s.protocol.rounds);
    read(p, "period", s.protocol.period);
    read(p, "rate", s.protocol.rate);
    read(p, "g_min", s.protocol.g_min);
    read(p, "g_adj", s.protocol.g_adj);
    read(p, "lattice", s.protocol.lattice);
    read(p, "first", s.protocol.first);
    read(p, "epsilon", s.protocol.epsilon);
    if (const auto g = root["geometry"]) {
      check_keys(g, "geometry", {"v0", "v1", "p", "e0", "e1", "c", "secure_radius", "l_pp"});
      read(g, "v0", s.geometry.v0);
      read(g, "v1", s.geometry.v1);
      read(g, "p", s.geometry.p);
      read(g, "e0", s.geometry.e0);
      read(g, "e1", s.geometry.e1);
      read(g, "c", s.geometry.c);
      read(g, "secure_radius", s.geometry.secure_radius);
      read(g, "l_pp", s.geometry.l_pp);
    }
    if (const auto a = root["adversary"]) {
      check_keys(a, "adversary",
                 {"strategy", "pbt_mode", "ports", "tick", "tick_start", "tick_end", "naive", "shuffled",
                  "entanglement_supply"});
      if (a["strategy"]) s.adversary.strategy = strategy_from_string(a["strategy"].as<std::string>());
      if (a["pbt_mode"]) {
        const auto m = a["pbt_mode"].as<std::string>();
        if (m == "ideal") s.adversary.mode = PbtMode::Ideal;
        else if (m == "exact") s.adversary.mode = PbtMode::Exact;
        else throw ParseError("pbt_mode must be ideal or exact");
      }
      read(a, "ports", s.adversary.ports);
      read(a, "tick", s.adversary.tick);
      read_opt(a, "tick_start", s.adversary.tick_start);
      read_opt(a, "tick_end", s.adversary.tick_end);
      read(a, "naive", s.adversary.naive);
      read(a, "shuffled", s.adversary.shuffled);
      read_opt(a, "entanglement_supply", s.adversary.supply);
    }
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

TrialRun run_trial(const Scenario& sc, int trial, bool keep_trace) {
  TrialRun tr;
  const std::uint64_t seed = Rng::split(sc.seed, static_cast<std::uint64_t>(trial));
  Rng script_rng(Rng::split(seed, 0));
  tr.script = generate_script(sc.protocol, sc.geometry, script_rng);

  Engine engine(Rng::split(seed, 1), sc.qubit_cap, sc.geometry.c, sc.adversary.supply);
  ProtocolRun run(engine, tr.script, uses_honest_prover(sc.adversary.strategy));
  auto adv = install_adversary(engine, run, sc.adversary);
  tr.note = adv->note();
  engine.run(0);

  tr.verdict = run.verdict();
  auto& r = tr.result;
  r.trial = trial;
  r.seed = seed;
  r.accept = tr.verdict.accept;
  r.reason = tr.verdict.reason;
  for (const auto& rv : tr.verdict.rounds) {
    r.correct_rounds += rv.correct;
    r.timely_rounds += rv.timely;
    r.answered_rounds += rv.answered;
  }
  r.max_lateness = tr.verdict.max_lateness;
  r.consumed = engine.ledger().consumed();
  r.useful = engine.ledger().useful();
  if (keep_trace) {
    tr.trace_csv = engine.trace_csv();
    tr.trace = engine.trace();
  }
  return tr;
}

RunResult run_scenario(const Scenario& sc, std::string* trace_csv) {
  RunResult out;
  out.name = sc.name;
  out.scenario_hash = fnv1a_hex(sc.source);
  out.protocol = to_string(sc.protocol.kind);
  out.strategy = to_string(sc.adversary.strategy);
  if (sc.adversary.naive) out.strategy += "+naive";
  if (sc.adversary.shuffled) out.strategy += "+shuffled";
  out.adversary = sc.adversary;
  out.seed = sc.seed;
  out.trials = sc.trials;
  std::uint64_t consumed = 0, useful = 0;
  for (int t = 0; t < sc.trials; ++t) {
    const bool keep = trace_csv && t == sc.trace_trial;
    auto tr = run_trial(sc, t, keep);
    if (keep) *trace_csv = std::move(tr.trace_csv);
    if (out.note.empty()) out.note = tr.note;
    out.accepted += tr.result.accept;
    consumed += tr.result.consumed;
    useful += tr.result.useful;
    out.max_response_lateness = std::max(out.max_response_lateness, tr.result.max_lateness);
    out.per_trial.push_back(tr.result);
  }
  out.accept_rate = static_cast<double>(out.accepted) / sc.trials;
  out.ledger.consumed = consumed;
  out.ledger.useful = useful;
  out.ledger.waste_fraction = consumed == 0 ? 0.0 : 1.0 - static_cast<double>(useful) / consumed;
  return out;
}

nlohmann::json to_json(const RunResult& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = r.name;
  j["scenario_hash"] = r.scenario_hash;
  j["protocol"] = r.protocol;
  j["strategy"] = r.strategy;
  nlohmann::ordered_json adv;
  adv["pbt_mode"] = r.adversary.mode == PbtMode::Exact ? "exact" : "ideal";
  adv["ports"] = r.adversary.ports;
  adv["tick"] = r.adversary.tick;
  adv["naive"] = r.adversary.naive;
  adv["shuffled"] = r.adversary.shuffled;
  if (r.adversary.supply) adv["entanglement_supply"] = *r.adversary.supply;
  j["adversary"] = adv;
  j["seed"] = r.seed;
  j["trials"] = r.trials;
  j["accepted"] = r.accepted;
  j["accept_rate"] = r.accept_rate;
  j["ledger"] = {{"consumed", r.ledger.consumed},
                 {"useful", r.ledger.useful},
                 {"waste_fraction", r.ledger.waste_fraction}};
  j["timing_summary"] = {{"max_response_lateness", r.max_response_lateness}};
  if (!r.note.empty()) j["note"] = r.note;
  if (!r.trace_file.empty()) j["trace_file"] = r.trace_file;
  auto& pt = j["per_trial"] = nlohmann::ordered_json::array();
  for (const auto& t : r.per_trial) {
    nlohmann::ordered_json e;
    e["trial"] = t.trial;
    e["seed"] = t.seed;
    e["accept"] = t.accept;
    e["reason"] = t.reason;
    e["correct_rounds"] = t.correct_rounds;
    e["timely_rounds"] = t.timely_rounds;
    e["answered_rounds"] = t.answered_rounds;
    e["max_lateness"] = t.max_lateness;
    e["consumed"] = t.consumed;
    e["useful"] = t.useful;
    pt.push_back(std::move(e));
  }
  return nlohmann::json::parse(j.dump());
}

std::string summarize(const std::vector<nlohmann::json>& results, const std::string& format) {
  if (results.empty()) throw InvalidArgument("nothing to summarize");
  if (format != "csv" && format != "md") throw InvalidArgument("format must be csv or md");
  std::map<std::pair<std::string, std::string>, std::pair<double, double>> cells;
  std::set<std::string> protocols, strategies;
  for (const auto& r : results) {
    if (!r.contains("schema_version") || r["schema_version"].get<int>() != kSchemaVersion)
      throw InvalidArgument("incompatible schema version in results");
    const auto p = r["protocol"].get<std::string>();
    const auto s = r["strategy"].get<std::string>();
    protocols.insert(p);
    strategies.insert(s);
    cells[{p, s}] = {r["accept_rate"].get<double>(), r["ledger"]["waste_fraction"].get<double>()};
  }
  std::ostringstream os;
  auto cell = [&](const std::string& p, const std::string& s) {
    auto it = cells.find({p, s});
    if (it == cells.end()) return std::string("-");
    std::ostringstream c;
    c.precision(4);
    c << it->second.first << " (waste " << it->second.second << ")";
    return c.str();
  };
  if (format == "csv") {
    os << "protocol,strategy,accept_rate,waste_fraction\n";
    for (const auto& [k, v] : cells) os << k.first << ',' << k.second << ',' << v.first << ',' << v.second << '\n';
    return os.str();
  }
  os << "| protocol |";
  for (const auto& s : strategies) os << ' ' << s << " |";
  os << "\n|---|";
  for (std::size_t i = 0; i < strategies.size(); ++i) os << "---|";
  os << '\n';
  for (const auto& p : protocols) {
    os << "| " << p << " |";
    for (const auto& s : strategies) os << ' ' << cell(p, s) << " |";
    os << '\n';
  }
  return os.str();
}

std::string filter_trace(const std::string& csv, int round) {
  std::istringstream in(csv);
  std::string line, out;
  const std::string tag = "round=" + std::to_string(round);
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      out += line + '\n';
      header = false;
      continue;
    }
    for (auto pos = line.find(tag); pos != std::string::npos; pos = line.find(tag, pos + 1)) {
      const auto end = pos + tag.size();
      const bool left_ok = pos == 0 || line[pos - 1] == ' ' || line[pos - 1] == ',' || line[pos - 1] == '"';
      const bool right_ok = end == line.size() || line[end] == ' ' || line[end] == '"' || line[end] == ',';
      if (left_ok && right_ok) {
        out += line + '\n';
        break;
      }
    }
  }
  return out;
}

}  // namespace qpv
