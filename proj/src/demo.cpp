#include "edgeward/demo.hpp"

#include <cstdlib>

#include <fmt/format.h>

#include "edgeward/error.hpp"

#ifndef EDGEWARD_DEFAULT_DATA_DIR
#define EDGEWARD_DEFAULT_DATA_DIR "data"
#endif
#ifndef EDGEWARD_SCENARIO_DIR
#define EDGEWARD_SCENARIO_DIR "scenarios"
#endif

namespace edgeward {

namespace fs = std::filesystem;

namespace {

fs::path in_dir(const fs::path& p) { return fs::is_directory(p) ? p / kPimaFileName : p; }

double gateway_cloud_rtt(const Topology& topo) {
  double best = -1.0;
  for (const auto& g : topo.nodes()) {
    if (g.tier != Tier::Gateway) continue;
    for (const auto& c : topo.nodes()) {
      if (c.tier != Tier::CloudDC) continue;
      try {
        const double rtt = 2.0 * topo.route(g.id, c.id).baseLatencyMs;
        if (best < 0 || rtt < best) best = rtt;
      } catch (const Error&) {
      }
    }
  }
  return std::max(best, 0.0);
}

}  // namespace

fs::path resolve_dataset(const std::optional<fs::path>& explicitPath) {
  if (explicitPath) {
    const fs::path p = in_dir(*explicitPath);
    if (!fs::is_regular_file(p)) throw Error(ErrorKind::DatasetMissing, "no dataset at " + p.string());
    return p;
  }
  if (const char* env = std::getenv("EDGEWARD_DATA_DIR"); env && *env) {
    const fs::path p = in_dir(env);
    if (!fs::is_regular_file(p))
      throw Error(ErrorKind::DatasetMissing, "EDGEWARD_DATA_DIR is set but " + p.string() + " does not exist");
    return p;
  }
  const fs::path p = fs::path(EDGEWARD_DEFAULT_DATA_DIR) / kPimaFileName;
  if (!fs::is_regular_file(p))
    throw Error(ErrorKind::DatasetMissing,
                "no dataset found; pass --data or set EDGEWARD_DATA_DIR (looked for " + p.string() + ")");
  return p;
}

fs::path scenario_dir() { return EDGEWARD_SCENARIO_DIR; }

DemoResult demo_diabetes(const DemoOptions& opts) {
  DemoResult r;
  r.dataFile = resolve_dataset(opts.dataPath);
  r.dataSha256 = ml::file_sha256(r.dataFile);
  const auto pre = ml::preprocess(ml::load_csv(r.dataFile));
  r.summary = pre.summary;
  const auto parts = ml::split(pre.records, opts.trainFraction, opts.seed);
  r.model = ml::train_forest(parts.train, {}, opts.seed);
  r.eval = ml::evaluate(r.model, parts.validation, parts.train.size());
  r.modelText = ml::serialize(r.model);

  Scenario sc = parse_scenario(opts.scenarioPath.value_or(scenario_dir() / "demo-diabetes.json"));
  sc.config.modelUpdate.sizeKb = static_cast<double>(r.modelText.size()) / 1024.0;
  r.modelUpdate = sc.config.modelUpdate;
  r.edge = run_scenario(sc);
  r.gatewayCloudRoundTripMs = gateway_cloud_rtt(Topology(sc.nodes, sc.links));

  sc.config.forceTier = Tier::CloudDC;
  r.cloud = run_scenario(sc);
  return r;
}

double mean_latency_to_module_ms(const SimResult& r, const AppId& app, const ModuleId& module) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& t : r.tuples) {
    if (t.appId != app) continue;
    for (const auto& h : t.hops)
      if (h.module == module) {
        sum += (h.departS - t.emitTimeS) * 1000.0;
        ++n;
        break;
      }
  }
  return n ? sum / n : 0.0;
}

std::string demo_report(const DemoResult& r) {
  const auto& s = r.summary;
  auto pct = [](std::size_t a, std::size_t b) { return b ? 100.0 * a / b : 0.0; };
  std::string out;
  out += fmt::format("dataset  {} (sha256 {})\n", r.dataFile.string(), r.dataSha256);
  out += fmt::format("records  {} total, {} diabetic ({:.1f}%), {} non-diabetic ({:.1f}%)\n", s.total, s.totalDiabetic,
                     pct(s.totalDiabetic, s.total), s.totalNonDiabetic, pct(s.totalNonDiabetic, s.total));
  out += fmt::format("filtered {} kept, {} diabetic ({:.1f}%), {} non-diabetic ({:.1f}%)\n", s.kept, s.diabetic,
                     pct(s.diabetic, s.kept), s.nonDiabetic, pct(s.nonDiabetic, s.kept));
  out += fmt::format("model    {} trees, max depth {}, {} bytes serialized\n", r.model.trees.size(),
                     r.model.params.maxDepth, r.modelText.size());
  out += ml::report_text(r.eval);
  out += "\nsimulation\n";
  for (const auto& [id, m] : r.edge.apps) {
    const auto& c = r.cloud.apps.at(id);
    out += fmt::format("  {:<12} edge mean {:.3f} ms  p95 {:.3f} ms | forced cloud mean {:.3f} ms  p95 {:.3f} ms\n", id,
                       m.meanMs, m.p95Ms, c.meanMs, c.p95Ms);
  }
  const auto& mu = r.modelUpdate;
  out += fmt::format("  prediction ready after {:.3f} ms at the edge, {:.3f} ms in the cloud\n",
                     mean_latency_to_module_ms(r.edge, mu.appId, mu.moduleId),
                     mean_latency_to_module_ms(r.cloud, mu.appId, mu.moduleId));
  out += fmt::format("  gateway-cloud round trip (base) {:.3f} ms\n", r.gatewayCloudRoundTripMs);
  out += fmt::format("  model updates at");
  for (double t : r.edge.modelUpdateTimes) out += fmt::format(" {:g}", t);
  out += fmt::format("\n  energy {:.3f} J, cost {:.6f}\n", r.edge.totalEnergyJ, r.edge.totalCost);
  return out;
}

}  // namespace edgeward
