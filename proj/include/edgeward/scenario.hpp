#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgeward/data_manager.hpp"
#include "edgeward/domain.hpp"
#include "edgeward/erm.hpp"
#include "edgeward/mobility.hpp"
#include "edgeward/placement.hpp"
#include "edgeward/provisioner.hpp"
#include "edgeward/scheduler.hpp"

namespace edgeward {

// Threshold autoscaling for one cluster: extra instances come from a
// provider offer and hang off `attachTo` with the given link.
struct ScalingPolicy {
  double thresholdS = 3.0;
  double cooldownS = 10.0;
  std::string providerId;
  std::string offerId;
  double budgetPerHour = 0.0;
  int maxExtraInstances = 2;
  NodeId attachTo;
  double linkLatencyMs = 1.0;
  double linkBandwidthMbps = 1000.0;
  int trustLevel = 1;
};

struct ClusterDecl {
  std::string id;
  double utilizationCap = 0.8;
  std::optional<ScalingPolicy> scaling;
};

// Capacity bought up front. With a demand history the MIPS target becomes
// forecast instances x mipsPerInstance.
struct ProvisioningRequest {
  std::string clusterId;
  std::string providerId;
  std::vector<std::string> offerIds;
  double budgetPerHour = 0.0;
  InstanceRequirement requirement;
  std::vector<DemandObservation> demandHistory;
  double mipsPerInstance = 0.0;
  int maxUnitsPerOffer = 4;
  NodeId attachTo;
  double linkLatencyMs = 1.0;
  double linkBandwidthMbps = 1000.0;
  int trustLevel = 1;
};

struct ScheduledFailure {
  NodeId nodeId;
  double atS = 0.0;
  std::optional<double> recoverAtS;
};

struct ModelUpdateConfig {
  double periodS = 0.0;  // 0 disables
  double sizeKb = 0.0;
  NodeId fromNode;
  AppId appId;
  ModuleId moduleId;
};

struct ScenarioConfig {
  QoSWeights weights;
  Normalization norm;
  double imageAmortizationS = 0.0;
  bool enforceDeadline = true;
  // Restrict every module to nodes of this tier (forced-cloud variants).
  std::optional<Tier> forceTier;

  CategorizationThresholds workload;

  double monitorPeriodS = 1.0;
  double detectionS = 1.0;  // failure detection interval
  bool replication = true;
  int maxReplicaDegree = 2;

  QueuePolicy queuePolicy = QueuePolicy::PriorityEdf;
  bool appPreemption = true;

  MobilityConfig mobility;

  int negotiationRounds = 5;
  double forecastAlpha = 0.5;
  double forecastLeadS = 60.0;
  SelectionWeights selection;
  std::size_t profileMinSamples = 5;

  ModelUpdateConfig modelUpdate;
};

enum class ArrivalProcess { Periodic, Poisson };

struct SimSettings {
  double durationS = 60.0;
  std::uint64_t seed = 1;
};

struct Scenario {
  std::string name;
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  std::vector<AppSpec> apps;
  std::map<AppId, ArrivalProcess> arrivals;  // absent = Periodic
  std::vector<UserSpec> users;
  std::vector<ProviderSpec> providers;
  std::vector<ClusterDecl> clusters;
  std::vector<CatalogueEntry> catalogue;
  std::vector<DeviceProfile> devices;
  std::vector<ProvisioningRequest> provisioning;
  std::vector<ScheduledFailure> failures;
  ScenarioConfig config;
  SimSettings sim;
};

// Parses JSON text. Malformed JSON raises ParseError. Everything else (wrong
// types, unknown keys, dangling references, failed structural checks) is
// collected and raised together as one ValidationError, one problem per line,
// each naming its location.
Scenario parse_scenario_text(const std::string& text, const std::string& origin = "<input>");
Scenario parse_scenario(const std::filesystem::path& path);

// Structural and cross-reference checks over an already-built scenario.
std::vector<std::string> validate_scenario(const Scenario& s);

}  // namespace edgeward
