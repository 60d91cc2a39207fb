#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "edgeward/demo.hpp"
#include "edgeward/error.hpp"
#include "edgeward/scenario.hpp"
#include "edgeward/simulation.hpp"

using namespace edgeward;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = EDGEWARD_TEST_SCENARIO_DIR;

Scenario load(const std::string& name) { return parse_scenario(kScenarios / (name + ".json")); }

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

const char* kTiny = R"({
  "name": "tiny",
  "sim": {"durationS": 5, "seed": 3},
  "nodes": [
    {"id": "gw", "tier": "Gateway"},
    {"id": "edge", "tier": "EdgeNode", "trustLevel": 3, "ramMB": 2048, "powerIdleW": 10, "powerMaxW": 20}
  ],
  "links": [{"a": "gw", "b": "edge", "latencyMs": 2, "bandwidthMbps": 100}],
  "apps": [{
    "id": "a", "sourceNode": "gw",
    "modules": [{"id": "m", "taskLengthMI": 50, "ramMB": 64}],
    "edges": [{"src": "@source", "dst": "m", "tupleSizeKb": 4, "emitRateHz": 2}]
  }]
})";

}  // namespace

TEST_CASE("every bundled scenario parses and validates") {
  int n = 0;
  for (const auto& e : fs::directory_iterator(kScenarios)) {
    if (e.path().extension() != ".json") continue;
    CAPTURE(e.path());
    const Scenario s = parse_scenario(e.path());
    CHECK(validate_scenario(s).empty());
    ++n;
  }
  CHECK(n >= 10);
  CHECK(load("demo-diabetes").apps.size() == 2);
}

TEST_CASE("validation names the offending app and node") {
  std::string text = kTiny;
  text.replace(text.find("\"sourceNode\": \"gw\""), 18, "\"sourceNode\": \"ghost\"");
  try {
    parse_scenario_text(text);
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ValidationError);
    const std::string msg = e.what();
    CHECK(msg.find("app a:") != std::string::npos);
    CHECK(msg.find("ghost") != std::string::npos);
  }
}

TEST_CASE("duplicate node ids and malformed JSON") {
  std::string dup = kTiny;
  dup.replace(dup.find("{\"id\": \"gw\", \"tier\": \"Gateway\"}"), 0, "{\"id\": \"edge\", \"tier\": \"EdgeNode\"},");
  try {
    parse_scenario_text(dup);
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ValidationError);
  }
  try {
    parse_scenario_text("{ nope");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
  }
}

TEST_CASE("metrics layout: one row per app and node plus a global row") {
  const SimResult r = run_scenario(parse_scenario_text(kTiny));
  const auto rows = lines(metrics_csv(r));
  REQUIRE(rows.size() == 1 + 4);
  const std::size_t width = cells(rows[0]).size();
  for (const auto& row : rows) CHECK(cells(row).size() == width);
  CHECK(rows[1].rfind("app,a,", 0) == 0);
  CHECK(rows[4].rfind("global,", 0) == 0);
  // 2 Hz over [0, 5] with both ends inclusive.
  CHECK(r.apps.at("a").emitted == 11);
  CHECK(metrics_csv(r) == metrics_csv(r));
}

TEST_CASE("tuples.csv leaves the completion time empty for dropped tuples") {
  const SimResult r = run_scenario(load("resilience-noreplica"));
  int dropped = 0;
  for (const auto& row : lines(tuples_csv(r))) {
    const auto c = cells(row);
    if (c[8] != "Dropped") continue;
    ++dropped;
    CHECK(c[6].empty());
  }
  CHECK(dropped > 0);
}

TEST_CASE("zero apps: energy is the idle baseline") {
  const SimResult r = run_scenario(load("zero-apps"));
  CHECK(r.apps.empty());
  CHECK(r.global.emitted == 0);
  CHECK(r.totalEnergyJ == doctest::Approx((3 + 30 + 250) * 3600.0));
  CHECK(r.nodes.at("edge").energyJ == doctest::Approx(30 * 3600.0));
}

TEST_CASE("percentiles") {
  CHECK(percentile({}, 50) == 0.0);
  CHECK(percentile({5, 1, 3}, 50) == 3);
  CHECK(percentile({1, 2, 3, 4}, 100) == 4);
  for (const char* name : {"edge-vs-cloud-edge", "sched-mixed", "autoscale", "mobility"}) {
    CAPTURE(name);
    const SimResult r = run_scenario(load(name));
    for (const auto& [id, m] : r.apps) {
      CHECK(m.p50Ms <= m.p95Ms);
      CHECK(m.p95Ms <= m.p99Ms);
      CHECK(m.deadlineMissRate >= 0.0);
      CHECK(m.deadlineMissRate <= 1.0);
    }
  }
}

TEST_CASE("global cost equals the billed agreements") {
  const SimResult r = run_scenario(load("autoscale"));
  REQUIRE_FALSE(r.agreements.empty());
  double sum = 0;
  for (const auto& b : r.agreements) sum += b.agreement.agreedPricePerHour * (b.endS - b.startS) / 3600.0;
  CHECK(r.totalCost == doctest::Approx(sum));
  CHECK(r.scaleUps >= 1);
}

TEST_CASE("seed override and determinism") {
  const Scenario s = load("autoscale");
  const SimResult a = run_scenario(s);
  const SimResult b = run_scenario(s);
  CHECK(metrics_csv(a) == metrics_csv(b));
  CHECK(tuples_csv(a) == tuples_csv(b));
  CHECK(a.trace == b.trace);
  const SimResult c = run_scenario(s, {.seed = 999});
  CHECK(c.seed == 999);
  CHECK(tuples_csv(c) != tuples_csv(a));  // Poisson arrivals depend on the seed
  const SimResult d = run_scenario(s, {.untilS = 10});
  CHECK(d.durationS == 10);
}

TEST_CASE("emit_metrics writes the three artifacts") {
  const SimResult r = run_scenario(parse_scenario_text(kTiny));
  const fs::path dir = fs::temp_directory_path() / "edgeward-test-emit";
  fs::remove_all(dir);
  emit_metrics(r, dir);
  emit_metrics(r, dir);
  for (const char* f : {"metrics.csv", "tuples.csv", "trace.log"}) CHECK(fs::exists(dir / f));
  std::ifstream in(dir / "metrics.csv");
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == metrics_csv(r));
  fs::remove_all(dir);
}

TEST_CASE("diabetes demo") {
  DemoOptions o;
  o.dataPath = fs::path(EDGEWARD_TEST_DATA_DIR);
  o.scenarioPath = kScenarios / "demo-diabetes.json";
  const DemoResult d = demo_diabetes(o);
  CHECK(d.summary.kept == 537);
  CHECK(d.eval.nValidation == 161);

  const double edgeMs = mean_latency_to_module_ms(d.edge, d.modelUpdate.appId, d.modelUpdate.moduleId);
  const double cloudMs = mean_latency_to_module_ms(d.cloud, d.modelUpdate.appId, d.modelUpdate.moduleId);
  CHECK(edgeMs > 0);
  CHECK(edgeMs < d.gatewayCloudRoundTripMs);
  CHECK(edgeMs < cloudMs);

  REQUIRE_FALSE(d.edge.modelUpdateTimes.empty());
  for (std::size_t k = 0; k < d.edge.modelUpdateTimes.size(); ++k)
    CHECK(d.edge.modelUpdateTimes[k] == d.modelUpdate.periodS * static_cast<double>(k + 1));
  CHECK(demo_report(d).find("537") != std::string::npos);

  CHECK_THROWS_AS(resolve_dataset(fs::path("/nonexistent/dir")), Error);
}
