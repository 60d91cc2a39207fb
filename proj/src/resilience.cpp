#include "edgeward/resilience.hpp"

#include <algorithm>
#include <limits>

#include "edgeward/error.hpp"

namespace edgeward {

std::string_view to_string(RecoveryAction::Kind k) {
  switch (k) {
    case RecoveryAction::Kind::FailoverToReplica: return "FailoverToReplica";
    case RecoveryAction::Kind::Replace: return "Replace";
    case RecoveryAction::Kind::DropTuples: return "DropTuples";
  }
  return "?";
}

double replica_cost(const ModuleSpec& m, const NodeSpec& n, const ReplicationOptions& opts) {
  auto it = opts.nodeCosts.find(n.id);
  const double price = it == opts.nodeCosts.end() ? n.pricePerHour : it->second;
  return n.ramMB > 0 ? price * m.ramMB / n.ramMB : 0.0;
}

ReplicationPlan plan_replication(const AppSpec& app, const Placement& placement, double budgetSlackPerHour,
                                 const PlacementContext& ctx, const ReplicationOptions& opts) {
  ReplicationPlan plan;
  plan.appId = app.id;
  if (!(budgetSlackPerHour > 0) || opts.maxDegree < 1) return plan;

  std::map<ModuleId, int> outDegree;
  for (const auto& e : app.edges)
    if (e.src != kSourceEndpoint) ++outDegree[e.src];

  std::vector<const ModuleSpec*> order;
  for (const auto& m : app.modules)
    if (placement.assignment.count(m.id)) order.push_back(&m);
  std::sort(order.begin(), order.end(), [&](const ModuleSpec* a, const ModuleSpec* b) {
    if (a->critical != b->critical) return a->critical;
    if (outDegree[a->id] != outDegree[b->id]) return outDegree[a->id] > outDegree[b->id];
    return a->id < b->id;
  });

  // Local view of RAM so replicas within this plan do not overcommit.
  ResidualCapacity local = ctx.residual ? *ctx.residual : ResidualCapacity(*ctx.topology);
  PlacementContext view = ctx;
  view.residual = &local;

  for (int round = 1; round <= opts.maxDegree; ++round) {
    bool added = false;
    for (const ModuleSpec* m : order) {
      const NodeId& primary = placement.assignment.at(m->id);
      auto& replicas = plan.replicaAssignments[m->id];
      if (static_cast<int>(replicas.size()) >= round) continue;

      const NodeSpec* cheapest = nullptr;
      double cheapestCost = std::numeric_limits<double>::infinity();
      for (const auto& id : feasible_nodes(*m, view)) {  // id order
        if (id == primary || std::find(replicas.begin(), replicas.end(), id) != replicas.end()) continue;
        const NodeSpec& n = ctx.topology->node(id);
        const double c = replica_cost(*m, n, opts);
        if (c < cheapestCost) {
          cheapestCost = c;
          cheapest = &n;
        }
      }
      if (!cheapest || plan.addedCostPerHour + cheapestCost > budgetSlackPerHour) continue;
      replicas.push_back(cheapest->id);
      local.reserve(cheapest->id, m->ramMB);
      plan.addedCostPerHour += cheapestCost;
      plan.degree[m->id] = static_cast<int>(replicas.size());
      added = true;
    }
    if (!added) break;
  }
  for (auto it = plan.replicaAssignments.begin(); it != plan.replicaAssignments.end();)
    it = it->second.empty() ? plan.replicaAssignments.erase(it) : std::next(it);
  return plan;
}

std::vector<RecoveryAction> handle_failure(const FailureEventRecord& failure, const std::vector<AppSpec>& apps,
                                           const std::map<AppId, Placement>& placements, const QoSWeights& weights,
                                           const PlacementContext& ctx) {
  std::vector<RecoveryAction> actions;
  PlacementContext view = ctx;
  view.excluded.insert(failure.nodeId);
  ResidualCapacity local = ctx.residual ? *ctx.residual : ResidualCapacity(*ctx.topology);
  local.set_up(failure.nodeId, false);
  view.residual = &local;

  for (const auto& app : apps) {
    auto pit = placements.find(app.id);
    if (pit == placements.end()) continue;
    const Placement& p = pit->second;
    std::map<ModuleId, NodeId> assignment = p.assignment;
    for (const auto& mid : topological_order(app)) {
      auto ait = assignment.find(mid);
      if (ait == assignment.end() || ait->second != failure.nodeId) continue;

      RecoveryAction a;
      a.appId = app.id;
      a.moduleId = mid;
      a.fromNode = failure.nodeId;

      std::optional<NodeId> replica;
      if (auto rit = p.replicas.find(mid); rit != p.replicas.end())
        for (const auto& r : rit->second)
          if (r != failure.nodeId && local.up(r)) {
            replica = r;
            break;
          }

      if (replica) {
        a.kind = RecoveryAction::Kind::FailoverToReplica;
        a.toNode = *replica;
      } else if (auto target = replace_module(app, mid, assignment, weights, view)) {
        a.kind = RecoveryAction::Kind::Replace;
        a.toNode = *target;
        local.reserve(*target, app.module(mid)->ramMB);
      } else {
        a.kind = RecoveryAction::Kind::DropTuples;
      }
      if (!a.toNode.empty()) assignment[mid] = a.toNode;
      actions.push_back(std::move(a));
    }
  }
  return actions;
}

std::optional<AppId> select_preemption_victim(const std::vector<RunningApp>& runningApps, double nowS) {
  std::optional<AppId> best;
  double bestSlack = -std::numeric_limits<double>::infinity();
  for (const auto& app : runningApps) {
    if (app.priorityClass == PriorityClass::Emergency) continue;
    double slack = std::numeric_limits<double>::infinity();
    for (const auto& t : app.inFlight) slack = std::min(slack, t.deadlineAtS - nowS - t.remainingPredictedS);
    if (!best || slack > bestSlack || (slack == bestSlack && app.appId < *best)) {
      best = app.appId;
      bestSlack = slack;
    }
  }
  return best;
}

}  // namespace edgeward
