#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "edgeward/ml.hpp"
#include "edgeward/simulation.hpp"

namespace edgeward {

struct DemoOptions {
  std::optional<std::filesystem::path> dataPath;  // CSV file or a directory holding it
  std::optional<std::filesystem::path> scenarioPath;
  std::uint64_t seed = 42;
  double trainFraction = 0.7;
};

struct DemoResult {
  std::filesystem::path dataFile;
  std::string dataSha256;
  ml::PreprocessSummary summary;
  ml::EvalReport eval;
  ml::ForestModel model;
  std::string modelText;
  SimResult edge;   // the scenario as shipped
  SimResult cloud;  // same scenario with every module forced onto the cloud
  double gatewayCloudRoundTripMs = 0.0;
  ModelUpdateConfig modelUpdate;  // names the predictor module
};

inline constexpr const char* kPimaFileName = "pima-indians-diabetes.csv";

// Resolution order: explicit path, $EDGEWARD_DATA_DIR, the data directory
// of the source tree. Throws DatasetMissing when nothing exists.
std::filesystem::path resolve_dataset(const std::optional<std::filesystem::path>& explicitPath);

// Directory of the bundled scenarios.
std::filesystem::path scenario_dir();

// Trains the forest "in the cloud", then simulates the deployment with the
// model size feeding the periodic update transfer.
DemoResult demo_diabetes(const DemoOptions& opts = {});

// Mean time from emission until `module` finished with the tuple, over
// tuples that reached it. 0 when none did.
double mean_latency_to_module_ms(const SimResult& r, const AppId& app, const ModuleId& module);

std::string demo_report(const DemoResult& r);

}  // namespace edgeward
