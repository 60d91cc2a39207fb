// edgeward: command-line front end for the simulator and the ML pipeline.
//
// Exit codes: 0 ok, 1 usage, 2 invalid input (parse or validation), 3 runtime.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "edgeward/demo.hpp"
#include "edgeward/error.hpp"
#include "edgeward/ml.hpp"
#include "edgeward/simulation.hpp"

namespace fs = std::filesystem;
using namespace edgeward;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInvalid = 2, kRuntime = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) throw UsageError("--seeds expects a..b, got '" + s + "'");
  std::uint64_t a = 0, b = 0;
  const char* p = s.data();
  auto r1 = std::from_chars(p, p + dots, a);
  auto r2 = std::from_chars(p + dots + 2, p + s.size(), b);
  if (r1.ec != std::errc{} || r1.ptr != p + dots || r2.ec != std::errc{} || r2.ptr != p + s.size() || b < a)
    throw UsageError("--seeds expects a..b with a <= b, got '" + s + "'");
  return {a, b};
}

void write_file(const fs::path& path, const std::string& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  f << body;
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void print_summary(const SimResult& r) {
  fmt::print("scenario {} seed {} duration {:g}s events {}\n", r.scenarioName, r.seed, r.durationS, r.processedEvents);
  for (const auto& [id, m] : r.apps)
    fmt::print("  app {:<16} {:<10} emitted {:>6} completed {:>6} dropped {:>5} mean {:>10.3f} ms p95 {:>10.3f} ms miss {:.4f}\n",
               id, m.status, m.emitted, m.completed, m.dropped + m.preempted, m.meanMs, m.p95Ms, m.deadlineMissRate);
  for (const auto& [id, why] : r.appErrors) fmt::print("  app {} not running: {}\n", id, why);
  for (const auto& e : r.provisioningErrors) fmt::print("  provisioning: {}\n", e);
  fmt::print("  energy {:.3f} J, cost {:.6f}, migrations {}, failovers {}, preemptions {}, delegations {}\n",
             r.totalEnergyJ, r.totalCost, r.migrations, r.failovers, r.preemptions, r.delegations);
}

int cmd_validate(const std::string& file) {
  const Scenario s = parse_scenario(file);
  fmt::print("{}: ok ({} nodes, {} links, {} apps)\n", file, s.nodes.size(), s.links.size(), s.apps.size());
  return kOk;
}

int cmd_run(const std::string& file, std::optional<std::uint64_t> seed, std::optional<double> until,
            const std::string& outDir, const std::string& seeds) {
  const Scenario s = parse_scenario(file);
  if (until && !(*until > 0)) throw UsageError("--until must be > 0");
  if (seeds.empty()) {
    const SimResult r = run_scenario(s, {seed, until});
    emit_metrics(r, outDir);
    print_summary(r);
    fmt::print("  wrote {}\n", outDir);
    return kOk;
  }
  if (seed) throw UsageError("--seed and --seeds are mutually exclusive");
  const auto [a, b] = parse_seed_range(seeds);
  const std::size_t n = b - a + 1;
  std::vector<std::optional<SimResult>> results(n);
  std::vector<std::string> errors(n);
  std::vector<std::thread> pool;
  const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < n; start += width) {
    for (std::size_t i = start; i < std::min(n, start + width); ++i)
      pool.emplace_back([&, i] {
        try {
          SimResult r = run_scenario(s, {a + i, until});
          emit_metrics(r, fs::path(outDir) / fmt::format("seed-{}", a + i));
          results[i] = std::move(r);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      });
    for (auto& t : pool) t.join();
    pool.clear();
  }
  int rc = kOk;
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i]) print_summary(*results[i]);
    else {
      fmt::print(stderr, "seed {}: {}\n", a + i, errors[i]);
      rc = kRuntime;
    }
  }
  return rc;
}

int cmd_ml_preprocess(const std::optional<std::string>& data, const std::string& out) {
  const fs::path file = resolve_dataset(data ? std::optional<fs::path>(*data) : std::nullopt);
  const auto pre = ml::preprocess(ml::load_csv(file));
  const auto& s = pre.summary;
  fmt::print("total {}\ndiabetic {}\nnon_diabetic {}\nkept {}\nkept_diabetic {}\nkept_non_diabetic {}\nsha256 {}\n",
             s.total, s.totalDiabetic, s.totalNonDiabetic, s.kept, s.diabetic, s.nonDiabetic, ml::file_sha256(file));
  if (!out.empty()) {
    std::string csv(ml::kColumnNames[0]);
    for (std::size_t i = 1; i <= ml::kFeatureCount; ++i) csv += "," + std::string(ml::kColumnNames[i]);
    csv += "\n";
    for (const auto& r : pre.records) {
      for (double v : r.features) csv += fmt::format("{},", v);
      csv += fmt::format("{}\n", r.outcome);
    }
    write_file(out, csv);
  }
  return kOk;
}

ml::Split prepared_split(const std::optional<std::string>& data, std::uint64_t seed, double fraction) {
  const fs::path file = resolve_dataset(data ? std::optional<fs::path>(*data) : std::nullopt);
  return ml::split(ml::preprocess(ml::load_csv(file)).records, fraction, seed);
}

int cmd_ml_train(const std::optional<std::string>& data, std::uint64_t seed, double fraction, const std::string& model) {
  const auto parts = prepared_split(data, seed, fraction);
  const auto m = ml::train_forest(parts.train, {}, seed);
  write_file(model, ml::serialize(m));
  fmt::print("trained {} trees on {} records, wrote {}\n", m.trees.size(), parts.train.size(), model);
  return kOk;
}

int cmd_ml_evaluate(const std::optional<std::string>& data, const std::string& model, double fraction,
                    const std::string& reportCsv) {
  const auto m = ml::deserialize(read_file(model));
  const auto parts = prepared_split(data, m.trainSeed, fraction);
  const auto rep = ml::evaluate(m, parts.validation, parts.train.size());
  fmt::print("{}", ml::report_text(rep));
  if (!reportCsv.empty()) write_file(reportCsv, ml::report_csv(rep));
  return kOk;
}

int cmd_ml_predict(const std::string& model, const std::string& input) {
  const auto m = ml::deserialize(read_file(model));
  const auto records = ml::parse_csv(read_file(input));
  fmt::print("row,class,vote_fraction\n");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto p = ml::predict(m, records[i]);
    fmt::print("{},{},{:.2f}\n", i + 1, p.cls, p.voteFraction);
  }
  return kOk;
}

int cmd_demo(const std::optional<std::string>& data, const std::optional<std::string>& scenario, std::uint64_t seed,
             const std::string& out) {
  DemoOptions o;
  if (data) o.dataPath = *data;
  if (scenario) o.scenarioPath = *scenario;
  o.seed = seed;
  const DemoResult r = demo_diabetes(o);
  fmt::print("{}", demo_report(r));
  if (!out.empty()) {
    emit_metrics(r.edge, fs::path(out) / "edge");
    emit_metrics(r.cloud, fs::path(out) / "cloud");
    write_file(fs::path(out) / "model.txt", r.modelText);
    write_file(fs::path(out) / "evaluation.csv", ml::report_csv(r.eval));
    fmt::print("wrote {}\n", out);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edgeward: edge/cloud resource management simulator"};
  app.require_subcommand(1);

  std::string file, outDir = "out", seeds, model, input, reportCsv, preprocessOut;
  std::optional<std::uint64_t> seed;
  std::optional<double> until;
  std::optional<std::string> data, scenario;
  std::uint64_t mlSeed = 42;
  double fraction = 0.7;

  auto* validate = app.add_subcommand("validate", "Parse and validate a scenario file");
  validate->add_option("file", file, "Scenario JSON")->required();

  auto* run = app.add_subcommand("run", "Run a scenario and write metrics.csv, tuples.csv, trace.log");
  run->add_option("file", file, "Scenario JSON")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--until", until, "Override the simulated duration (s)");
  run->add_option("--out", outDir, "Output directory")->capture_default_str();
  run->add_option("--seeds", seeds, "Seed sweep a..b, one engine per seed, outputs in seed-N/");

  auto* mlCmd = app.add_subcommand("ml", "Diabetes dataset and random forest");
  mlCmd->require_subcommand(1);
  auto* pre = mlCmd->add_subcommand("preprocess", "Filter records with missing values and print counts");
  pre->add_option("--data", data, "CSV file or directory");
  pre->add_option("--out", preprocessOut, "Write the cleaned records here");
  auto* train = mlCmd->add_subcommand("train", "Split 70/30 and train the forest");
  train->add_option("--data", data, "CSV file or directory");
  train->add_option("--seed", mlSeed, "Split and training seed")->capture_default_str();
  train->add_option("--train-fraction", fraction)->capture_default_str();
  train->add_option("--model", model, "Model output path")->required();
  auto* evalCmd = mlCmd->add_subcommand("evaluate", "Evaluate a model on its validation split");
  evalCmd->add_option("--data", data, "CSV file or directory");
  evalCmd->add_option("--model", model, "Model file")->required();
  evalCmd->add_option("--train-fraction", fraction)->capture_default_str();
  evalCmd->add_option("--report", reportCsv, "Write the evaluation report as CSV");
  auto* predictCmd = mlCmd->add_subcommand("predict", "Classify every row of a CSV");
  predictCmd->add_option("--model", model, "Model file")->required();
  predictCmd->add_option("--input", input, "CSV in dataset column order (Outcome column required)")->required();

  auto* demo = app.add_subcommand("demo", "Bundled demonstrators");
  demo->require_subcommand(1);
  auto* diabetes = demo->add_subcommand("diabetes", "Train in the cloud, predict at the edge, simulate both placements");
  diabetes->add_option("--data", data, "CSV file or directory");
  diabetes->add_option("--scenario", scenario, "Scenario to use instead of the bundled one");
  diabetes->add_option("--seed", mlSeed, "Split and training seed")->capture_default_str();
  diabetes->add_option("--out", preprocessOut, "Write metrics, model and report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return cmd_validate(file);
    if (*run) return cmd_run(file, seed, until, outDir, seeds);
    if (*pre) return cmd_ml_preprocess(data, preprocessOut);
    if (*train) return cmd_ml_train(data, mlSeed, fraction, model);
    if (*evalCmd) return cmd_ml_evaluate(data, model, fraction, reportCsv);
    if (*predictCmd) return cmd_ml_predict(model, input);
    if (*diabetes) return cmd_demo(data, scenario, mlSeed, preprocessOut);
  } catch (const UsageError& e) {
    fmt::print(stderr, "usage error: {}\n", e.what());
    return kUsage;
  } catch (const Error& e) {
    fmt::print(stderr, "{}\n", e.what());
    return e.kind() == ErrorKind::ParseError || e.kind() == ErrorKind::ValidationError ? kInvalid : kRuntime;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kRuntime;
  }
  return kUsage;
}
