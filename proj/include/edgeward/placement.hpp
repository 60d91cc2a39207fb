#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "edgeward/domain.hpp"
#include "edgeward/erm.hpp"

namespace edgeward {

struct QoSWeights {
  double wLatency = 1.0 / 3.0;
  double wCost = 1.0 / 3.0;
  double wEnergy = 1.0 / 3.0;

  // Scaled copy summing to 1. Throws InvalidArgument on negative or all-zero.
  QoSWeights normalized() const;
};

// Divisors that bring the three objective terms onto a common scale.
struct Normalization {
  double latencyMs = 100.0;
  double costPerHour = 1.0;
  double energyJPerHour = 100000.0;
};

// Free RAM and liveness per node, as seen by the planner.
class ResidualCapacity {
 public:
  ResidualCapacity() = default;
  explicit ResidualCapacity(const Topology& topo);

  double free_ram(const NodeId& node) const;
  bool up(const NodeId& node) const;
  void reserve(const NodeId& node, double ramMB);
  void release(const NodeId& node, double ramMB);
  void set_up(const NodeId& node, bool up);
  void add_node(const NodeSpec& node, bool up);

 private:
  std::map<NodeId, double> freeRam_;
  std::set<NodeId> down_;
};

struct PlacementContext {
  const Topology* topology = nullptr;
  const Catalogue* catalogue = nullptr;
  const ProfileStore* profiles = nullptr;
  const ResidualCapacity* residual = nullptr;
  Normalization norm;
  // One-time image/data transfer is spread over this many seconds of tuples;
  // 0 counts the full transfer against every placement.
  double imageAmortizationS = 0.0;
  // Where source tuples enter the wired network; defaults to app.sourceNode.
  std::optional<NodeId> sourceAttachment;
  // Optional per-module whitelist (admission delegation, forced variants).
  std::map<ModuleId, std::set<NodeId>> allowed;
  std::set<NodeId> excluded;
  // Reject assignments whose projected critical path exceeds the deadline.
  bool enforceDeadline = true;
};

struct ScoreBreakdown {
  double latencyMs = 0.0;      // Σ per-module transfer + service + image time
  double costPerHour = 0.0;    // Σ RAM-share of node price
  double energyJPerHour = 0.0; // Σ dynamic energy at the source rate
  double criticalPathMs = 0.0; // longest source-to-sink chain, no image time
};

struct Placement {
  AppId appId;
  std::map<ModuleId, NodeId> assignment;
  std::map<ModuleId, std::vector<NodeId>> replicas;
  double score = 0.0;
  bool feasible = false;
  ScoreBreakdown terms;
};

// Compute nodes that satisfy trust, free RAM, liveness and any whitelist.
std::vector<NodeId> feasible_nodes(const ModuleSpec& module, const PlacementContext& ctx);

// Evaluates a complete assignment. Returns nullopt when a route is missing.
std::optional<ScoreBreakdown> evaluate_assignment(const AppSpec& app, const std::map<ModuleId, NodeId>& assignment,
                                                  const PlacementContext& ctx);

double weighted_score(const ScoreBreakdown& terms, const QoSWeights& weights, const Normalization& norm);

// Greedy in topological order with one level of backtracking; each module
// goes to the feasible node with the lowest incremental weighted score, ties
// broken by node id. Throws Infeasible.
Placement place_application(const AppSpec& app, const QoSWeights& weights, const PlacementContext& ctx);

// Enumerates every assignment (lexicographic in topological module order)
// and keeps the first minimum-score feasible one. Throws TooLarge beyond
// 10^6 assignments and Infeasible when nothing satisfies the constraints.
Placement brute_force_placement(const AppSpec& app, const QoSWeights& weights, const PlacementContext& ctx);

// Best node for one module with every other module held fixed. Used to
// replace a module lost to a failure. nullopt when no node fits.
std::optional<NodeId> replace_module(const AppSpec& app, const ModuleId& module,
                                     const std::map<ModuleId, NodeId>& assignment, const QoSWeights& weights,
                                     const PlacementContext& ctx);

struct ViolationReportQoS {
  double latencyMissRate = 0.0;
  double budgetOverrun = 0.0;
  double energyOverrun = 0.0;
};

// w_x <- w_x * (1 + eta * violation_x), then renormalised. Violations are
// clamped to [0, 1]. Throws InvalidArgument unless eta > 0.
QoSWeights retune_weights(const QoSWeights& weights, const ViolationReportQoS& violations, double eta);

// Post-hoc invariant check: trust, RAM (primaries + replicas vs. the given
// capacity view), replica distinctness. Empty result means valid.
std::vector<std::string> check_placement(const AppSpec& app, const Placement& placement, const Topology& topo,
                                         const ResidualCapacity& before);

}  // namespace edgeward
