#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgeward/erm.hpp"
#include "edgeward/kernel.hpp"
#include "edgeward/mobility.hpp"
#include "edgeward/placement.hpp"
#include "edgeward/provisioner.hpp"
#include "edgeward/resilience.hpp"
#include "edgeward/scenario.hpp"

namespace edgeward {

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> untilS;
};

struct AppMetrics {
  AppId id;
  std::string status;  // placed, infeasible, suspended
  std::size_t emitted = 0;
  std::size_t completed = 0;
  std::size_t dropped = 0;
  std::size_t preempted = 0;
  std::size_t inFlight = 0;
  std::vector<double> latenciesMs;  // completed tuples, emission order
  double meanMs = 0.0;
  double p50Ms = 0.0;
  double p95Ms = 0.0;
  double p99Ms = 0.0;
  double deadlineMissRate = 0.0;
  std::string workload;  // category label, "-" with fewer than three tuples
  std::size_t delegations = 0;
};

struct NodeMetrics {
  NodeId id;
  double energyJ = 0.0;
  double utilization = 0.0;
};

struct AdmissionRecord {
  double timeS = 0.0;
  AppId appId;
  ModuleId moduleId;
  double mips = 0.0;
  std::string homeCluster;
  AdmissionDecision decision;
  NodeId finalNode;
};

struct BilledAgreement {
  Agreement agreement;
  NodeId nodeId;
  double startS = 0.0;
  double endS = 0.0;
  double cost() const { return agreement.agreedPricePerHour * (endS - startS) / 3600.0; }
};

struct RecoveryRecord {
  double timeS = 0.0;
  RecoveryAction action;
};

struct MigrationRecord {
  double startS = 0.0;
  double completeS = 0.0;
  MigrationPlan plan;
};

struct SimResult {
  std::string scenarioName;
  std::uint64_t seed = 0;
  double durationS = 0.0;

  std::vector<TupleRecord> tuples;
  std::map<AppId, AppMetrics> apps;
  std::map<NodeId, NodeMetrics> nodes;
  AppMetrics global;  // counts and latency over every app

  double totalEnergyJ = 0.0;
  double totalCost = 0.0;
  std::size_t migrations = 0;
  std::size_t handovers = 0;
  std::size_t failovers = 0;
  std::size_t replacements = 0;
  std::size_t preemptions = 0;  // task level
  std::size_t suspensions = 0;  // application level
  std::size_t delegations = 0;
  std::size_t scaleUps = 0;
  std::size_t scaleDowns = 0;

  std::map<AppId, Placement> placements;  // final state
  std::map<AppId, std::string> appErrors;
  std::vector<std::string> provisioningErrors;
  std::vector<AdmissionRecord> admissions;
  std::map<std::string, double> peakReservedMips;
  std::map<std::string, double> clusterCapMips;  // cap * totalMips at the end of the run
  std::vector<BilledAgreement> agreements;
  std::vector<FailureEventRecord> failures;
  std::vector<RecoveryRecord> recoveries;
  std::vector<MigrationRecord> migrationLog;
  std::vector<double> modelUpdateTimes;
  std::vector<double> modelArrivalTimes;
  std::uint64_t processedEvents = 0;

  std::string trace;  // trace.log contents
};

// Runs one scenario to completion. Apps that cannot be placed are reported
// in appErrors and the run continues with the others.
SimResult run_scenario(const Scenario& scenario, const RunOverrides& overrides = {});

// Column order is fixed:
//   scope,id,status,emitted,completed,dropped,preempted,in_flight,
//   latency_mean_ms,latency_p50_ms,latency_p95_ms,latency_p99_ms,
//   deadline_miss_rate,workload,energy_j,utilization,cost,migrations,
//   failovers,preemptions,suspensions,delegations
// One row per app (id order), one per node (id order), then one global row.
std::string metrics_csv(const SimResult& r);
// tuple_id,app,src_module,dst_module,size_kb,emit_s,complete_s,deadline_s,status,path
std::string tuples_csv(const SimResult& r);
// Writes metrics.csv, tuples.csv and trace.log into outDir (created if needed).
void emit_metrics(const SimResult& r, const std::filesystem::path& outDir);

// Nearest-rank percentile over an unsorted sample; 0 for an empty sample.
double percentile(std::vector<double> values, double p);

}  // namespace edgeward
