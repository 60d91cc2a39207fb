#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgeward/domain.hpp"
#include "edgeward/placement.hpp"

namespace edgeward {

struct ReplicationPlan {
  AppId appId;
  std::map<ModuleId, std::vector<NodeId>> replicaAssignments;
  double addedCostPerHour = 0.0;
  std::map<ModuleId, int> degree;
};

struct ReplicationOptions {
  int maxDegree = 2;
  // Hourly node price overrides; nodes absent here use NodeSpec::pricePerHour.
  std::map<NodeId, double> nodeCosts;
};

// Hourly cost of one copy of the module on the node (RAM share of the price).
double replica_cost(const ModuleSpec& m, const NodeSpec& n, const ReplicationOptions& opts);

// Modules ordered by (critical first, DAG out-degree desc, id) receive one
// replica each on the cheapest feasible node other than their primary while
// the cumulative cost stays within the slack; further rounds add second
// replicas up to maxDegree. ctx.residual must already reflect the primaries.
ReplicationPlan plan_replication(const AppSpec& app, const Placement& placement, double budgetSlackPerHour,
                                 const PlacementContext& ctx, const ReplicationOptions& opts = {});

struct FailureEventRecord {
  NodeId nodeId;
  double failedAtS = 0.0;
  double detectedAtS = 0.0;
  std::optional<double> recoveredAtS;
  std::vector<std::pair<AppId, ModuleId>> affectedModules;
};

struct RecoveryAction {
  enum class Kind { FailoverToReplica, Replace, DropTuples };
  Kind kind = Kind::DropTuples;
  AppId appId;
  ModuleId moduleId;
  NodeId fromNode;
  NodeId toNode;  // empty for DropTuples
};

std::string_view to_string(RecoveryAction::Kind k);

// For every module whose primary sits on the failed node: promote the first
// live replica, else re-place it on residual capacity, else drop its tuples
// until the node recovers. ctx.residual must mark the failed node down.
std::vector<RecoveryAction> handle_failure(const FailureEventRecord& failure, const std::vector<AppSpec>& apps,
                                           const std::map<AppId, Placement>& placements, const QoSWeights& weights,
                                           const PlacementContext& ctx);

struct InFlightTuple {
  double deadlineAtS = 0.0;
  double remainingPredictedS = 0.0;
};

struct RunningApp {
  AppId appId;
  PriorityClass priorityClass = PriorityClass::Normal;
  std::vector<InFlightTuple> inFlight;
};

// Non-Emergency app with the largest QoS slack (min over its in-flight
// tuples of deadline - now - remaining; an app with nothing in flight has
// unbounded slack). Ties go to the smaller id. nullopt if all are Emergency.
std::optional<AppId> select_preemption_victim(const std::vector<RunningApp>& runningApps, double nowS);

}  // namespace edgeward
