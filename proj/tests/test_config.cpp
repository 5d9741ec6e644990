#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "holesim/config.hpp"
#include "holesim/results.hpp"

using namespace holesim;
using nlohmann::json;

namespace {

const char* kBase = R"(
# key-coverage base scenario
[scenario]
id = "kc"
seed = 3
duration_s = 300

[protocol]
kind = "proposed"
round_s = 10

[grid]
width = 300
height = 300
cell_side = 10
subregion_side = 100

[nodes]
count = 40
mobile_fraction = 0.25
initial_energy_j = 0.2
r_l = 30
r_s = 50

[mobility]
target_count = 2

[failures]
percent = 30
time_s = 150
)";

std::string problems_of(const json& doc) {
  try {
    scenario_from_document(doc);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

// Everything a key could influence: the result row, message counts, the
// per-node energy split, the trace, and the sweep axes.
std::string fingerprint(const json& doc) {
  ScenarioFile f = scenario_from_document(doc);
  f.scenario.record_trace = true;
  const RunResult r = run(f.scenario);
  std::string out = csv_row(make_row(r));
  for (auto n : r.messages.sent) out += " " + std::to_string(n);
  char buf[64];
  for (const NodeReport& n : r.nodes)
    for (std::size_t c = 0; c < kEnergyCategoryCount; ++c) {
      std::snprintf(buf, sizeof buf, " %.17g", n.ledger.consumed(static_cast<EnergyCategory>(c)));
      out += buf;
    }
  for (const TraceEntry& t : r.trace) {
    std::snprintf(buf, sizeof buf, "|%.17g %d %d %.17g", t.time, t.node, t.hole, t.value);
    out += t.event + buf + t.detail;
  }
  for (const Point& p : r.target_track) {
    std::snprintf(buf, sizeof buf, ";%.17g,%.17g", p.x, p.y);
    out += buf;
  }
  out += json(f.sweep_nodes).dump() + json(f.sweep_failures).dump();
  return out;
}

json with(json doc, const std::string& key, const json& value) {
  const auto dot = key.find('.');
  doc[key.substr(0, dot)][key.substr(dot + 1)] = value;
  return doc;
}

struct Toggle {
  json value;
  std::vector<std::pair<std::string, json>> context;
};

}  // namespace

TEST_CASE("parser accepts the supported subset") {
  const json doc = parse_config_text(R"(
# comment
[a]
int = 42          # trailing comment
neg = -7
float = 1.5e-3
under = 1_000
yes = true
no = false
text = "say \"hi\"\t!"
list = [1, 2.5,
        3]
nested = [[1, 2], [3, 4]]
empty = []
[b-c]
k_1 = "x"
)");
  CHECK(doc["a"]["int"] == 42);
  CHECK(doc["a"]["neg"] == -7);
  CHECK(doc["a"]["float"].get<double>() == 1.5e-3);
  CHECK(doc["a"]["under"] == 1000);
  CHECK(doc["a"]["yes"] == true);
  CHECK(doc["a"]["no"] == false);
  CHECK(doc["a"]["text"] == "say \"hi\"\t!");
  CHECK(doc["a"]["list"] == json::array({1, 2.5, 3}));
  CHECK(doc["a"]["nested"][1][0] == 3);
  CHECK(doc["a"]["empty"].empty());
  CHECK(doc["b-c"]["k_1"] == "x");
}

TEST_CASE("parser errors carry line numbers") {
  auto message = [](const char* text) {
    try {
      parse_config_text(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("[a]\nx = 1\nx = 2\n").find("line 3") != std::string::npos);
  CHECK(message("[a]\nx = 1\n[a]\n").find("duplicate section") != std::string::npos);
  CHECK(message("x = 1\n").find("line 1") != std::string::npos);
  CHECK(message("[a]\nx 1\n").find("line 2") != std::string::npos);
  CHECK(message("[a]\nx = \"open\n").find("unterminated") != std::string::npos);
  CHECK(message("[a]\nx = [1, 2\n").find("line") != std::string::npos);
  CHECK(message("[a]\nx = 1 2\n").find("trailing") != std::string::npos);
  CHECK(message("[a]\nx = maybe\n").find("line 2") != std::string::npos);
  CHECK(message("[a]\nx = 1.2.3\n").find("bad number") != std::string::npos);
}

TEST_CASE("mapping collects every problem") {
  json doc = parse_config_text(kBase);
  doc["nodes"]["colour"] = "blue";
  doc["nodes"]["count"] = "many";
  doc["grid"].erase("width");
  doc["energy"]["model"] = "quantum";
  const std::string what = problems_of(doc);
  CHECK(what.find("unknown key nodes.colour") != std::string::npos);
  CHECK(what.find("nodes.count") != std::string::npos);
  CHECK(what.find("missing required key grid.width") != std::string::npos);
  CHECK(what.find("energy.model") != std::string::npos);

  json bad = parse_config_text(kBase);
  bad["nodes"]["r_l"] = 60;
  bad["grid"]["subregion_side"] = 75;
  bad["sink"]["pos"] = json::array({-5, 10});
  const std::string v = problems_of(bad);
  CHECK(v.find("r_l") != std::string::npos);
  CHECK(v.find("subregion_side") != std::string::npos);
  CHECK(v.find("sink.pos") != std::string::npos);
}

TEST_CASE("failure keys") {
  const ScenarioFile f = scenario_from_document(parse_config_text(kBase));
  REQUIRE(f.scenario.failure_plan.size() == 1);
  CHECK(f.scenario.failure_plan[0].time_s == 150);
  CHECK(f.scenario.failure_plan[0].percent == 30);

  json defaults = parse_config_text(kBase);
  defaults["failures"].erase("time_s");
  defaults["scenario"]["duration_s"] = 500;
  CHECK(scenario_from_document(defaults).scenario.failure_plan[0].time_s == 250);

  json plan = parse_config_text(kBase);
  plan["failures"] = {{"plan", {{100, 10}, {200, 20}}}};
  CHECK(scenario_from_document(plan).scenario.failure_plan.size() == 2);

  json clash = plan;
  clash["failures"]["percent"] = 5;
  CHECK(problems_of(clash).find("failures.plan") != std::string::npos);
}

TEST_CASE("sink defaults to the area center") {
  const ScenarioFile f = scenario_from_document(parse_config_text(kBase));
  CHECK(f.scenario.protocol.sink_pos == Point{150, 150});
}

TEST_CASE("echo lists every key and reloads to the same scenario") {
  for (const char* extra : {"", "plan"}) {
    json doc = parse_config_text(kBase);
    if (std::string(extra) == "plan") doc["failures"] = {{"plan", {{100, 10}, {200, 20}}}};
    const ScenarioFile f = scenario_from_document(doc);
    const json echo = config_echo(f);
    CHECK(echo["meta"]["prng"] == std::string(Rng::kAlgorithm));
    std::set<std::string> echoed;
    for (const auto& [section, body] : echo.items())
      if (section != "meta")
        for (const auto& [key, value] : body.items()) echoed.insert(section + "." + key);
    const auto keys = config_keys();
    CHECK(echoed == std::set<std::string>(keys.begin(), keys.end()));

    const ScenarioFile g = scenario_from_document(echo);
    CHECK(config_echo(g) == echo);
    CHECK(fingerprint(echo) == fingerprint(doc));
  }
  json foreign = config_echo(scenario_from_document(parse_config_text(kBase)));
  foreign["meta"]["prng"] = "pcg64";
  CHECK_THROWS_AS(scenario_from_document(foreign), ValidationError);
}

TEST_CASE("every key changes behaviour") {
  const std::map<std::string, Toggle> toggles = {
      {"scenario.id", {"other", {}}},
      {"scenario.seed", {4, {}}},
      {"scenario.duration_s", {250, {}}},
      {"protocol.kind", {"baseline", {}}},
      {"protocol.round_s", {7, {}}},
      {"grid.width", {400, {}}},
      {"grid.height", {400, {}}},
      {"grid.cell_side", {5, {}}},
      {"grid.subregion_side", {150, {}}},
      {"nodes.count", {41, {}}},
      {"nodes.mobile_fraction", {0.1, {}}},
      {"nodes.initial_energy_j", {0.3, {}}},
      {"nodes.r_l", {25, {}}},
      {"nodes.r_s", {60, {}}},
      {"energy.model", {"simple", {{"energy.e_trans", 1e-8}, {"energy.e_recv", 1e-8}, {"energy.e_amp", 1e-9}}}},
      {"energy.e_elec", {60e-9, {}}},
      {"energy.eps_fs", {20e-12, {}}},
      {"energy.eps_mp", {0.002e-12, {{"energy.d0", 40}}}},
      {"energy.d0", {40, {}}},
      {"energy.e_trans", {2e-8, {{"energy.model", "simple"}, {"energy.e_trans", 1e-8}, {"energy.e_recv", 1e-8}, {"energy.e_amp", 1e-9}}}},
      {"energy.e_amp", {2e-9, {{"energy.model", "simple"}, {"energy.e_trans", 1e-8}, {"energy.e_recv", 1e-8}, {"energy.e_amp", 1e-9}}}},
      {"energy.e_recv", {2e-8, {{"energy.model", "simple"}, {"energy.e_trans", 1e-8}, {"energy.e_recv", 1e-8}, {"energy.e_amp", 1e-9}}}},
      {"energy.amp_per_bit", {true, {{"energy.model", "simple"}, {"energy.e_trans", 1e-8}, {"energy.e_recv", 1e-8}, {"energy.e_amp", 1e-12}}}},
      {"energy.idle_w", {2e-4, {}}},
      {"energy.sleep_w", {2e-5, {{"prevention.threshold", 0}}}},
      {"energy.move_j_per_m", {1e-4, {}}},
      {"energy.sense_j_per_event", {1e-4, {}}},
      {"energy.range_power_exp", {1.0, {}}},
      {"prevention.zones_per_side", {3, {}}},
      {"prevention.threshold", {0.2, {}}},
      {"cover.t_base_s", {2.0, {}}},
      {"mobile.selection", {"farthest", {}}},
      {"mobile.speed_mps", {2.0, {}}},
      {"sink.pos", {json::array({0, 0}), {}}},
      {"sink.update_period_s", {40, {}}},
      {"mobility.sample_s", {2.0, {}}},
      {"mobility.speed_min", {2.0, {}}},
      {"mobility.speed_max", {20.0, {}}},
      {"mobility.pause_s", {5.0, {}}},
      {"mobility.target_count", {1, {}}},
      {"failures.percent", {40, {}}},
      {"failures.time_s", {100, {}}},
      {"failures.plan", {json::array({json::array({100, 10})}), {{"failures.percent", 0}}}},
      {"messages.hello", {100, {{"protocol.kind", "baseline"}}}},
      {"messages.head_announce", {100, {}}},
      {"messages.ql_base", {100, {}}},
      {"messages.ql_per_cell", {3, {}}},
      {"messages.energy_report", {100, {}}},
      {"messages.crisis_alert", {100, {}}},
      {"messages.hole_detected", {100, {}}},
      {"messages.help_request", {100, {}}},
      {"messages.mobile_dispatch", {100, {}}},
      {"messages.sink_report", {100, {}}},
      {"messages.data", {100, {}}},
      {"sweep.nodes", {json::array({10, 20}), {}}},
      {"sweep.failures", {json::array({25}), {}}},
  };
  const json base = parse_config_text(kBase);
  for (const std::string& key : config_keys()) {
    CAPTURE(key);
    const auto it = toggles.find(key);
    REQUIRE_MESSAGE(it != toggles.end(), "no toggle for " << key);
    json ctx = base;
    for (const auto& [k, v] : it->second.context) ctx = with(ctx, k, v);
    if (key == "failures.plan") {
      ctx["failures"].erase("time_s");
    }
    json alt = with(ctx, key, it->second.value);
    if (key == "failures.plan") alt["failures"].erase("percent");
    CHECK(fingerprint(ctx) != fingerprint(alt));
  }
}

TEST_CASE("shipped presets load") {
  for (const char* name : {"desk.toml", "table1.toml", "table2.toml"}) {
    CAPTURE(name);
    const ScenarioFile f = load_scenario_file(std::string(HOLESIM_SOURCE_DIR) + "/configs/" + name);
    CHECK(f.scenario.violations().empty());
  }
  CHECK_THROWS_AS(load_scenario_file("/nonexistent/holesim.toml"), ConfigError);
}
