#pragma once

#include <optional>
#include <string>
#include <vector>

#include "edgeward/domain.hpp"
#include "edgeward/placement.hpp"

namespace edgeward {

// Piecewise-linear interpolation over Known waypoints, clamped at both ends.
Point position_at(const TrajectorySpec& trajectory, double timeS);

// Constant-velocity extrapolation from the last two samples; a single sample
// is treated as stationary.
Point predict_position(const std::vector<Waypoint>& samples, double horizonS);

// Gateway closest to p (Euclidean), ties to the smaller id. nullptr if none.
const NodeSpec* nearest_gateway(const Topology& topo, Point p);

struct MigrationPlan {
  std::string userId;
  AppId appId;
  std::vector<ModuleId> affectedModules;
  NodeId fromNode;
  NodeId toNode;
  double stateTransferS = 0.0;
  std::string triggerReason;
  double currentLatencyMs = 0.0;
  double targetLatencyMs = 0.0;
};

struct MigrationDecision {
  enum class Kind { Keep, Migrate, NoFeasibleTarget };
  Kind kind = Kind::Keep;
  std::optional<MigrationPlan> plan;
  NodeId predictedGateway;
};

struct MobilityConfig {
  double toleranceMs = 10.0;
  double horizonS = 5.0;
  // A target must reach at most margin * current latency; this stops
  // ping-ponging between nodes with near-equal latency.
  double hysteresisMargin = 0.8;
};

// Evaluates the Sensitive modules of one app owned by a user. Migrates the
// group on the node whose gateway-to-node latency from the predicted gateway
// exceeds the tolerance to the feasible edge node minimising that latency.
MigrationDecision migration_decision(const std::string& userId, Point predictedPos, const AppSpec& app,
                                     const Placement& placement, const PlacementContext& ctx,
                                     const MobilityConfig& cfg);

}  // namespace edgeward
