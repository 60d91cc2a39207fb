#include "edgeward/mobility.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "edgeward/error.hpp"
#include "edgeward/kernel.hpp"

namespace edgeward {

Point position_at(const TrajectorySpec& trajectory, double timeS) {
  const auto& pts = trajectory.points;
  if (pts.empty()) throw Error(ErrorKind::InvalidArgument, "trajectory has no waypoints");
  if (timeS <= pts.front().timeS) return pts.front().pos;
  if (timeS >= pts.back().timeS) return pts.back().pos;
  auto hi = std::upper_bound(pts.begin(), pts.end(), timeS, [](double t, const Waypoint& w) { return t < w.timeS; });
  auto lo = hi - 1;
  const double f = (timeS - lo->timeS) / (hi->timeS - lo->timeS);
  return {lo->pos.x + f * (hi->pos.x - lo->pos.x), lo->pos.y + f * (hi->pos.y - lo->pos.y)};
}

Point predict_position(const std::vector<Waypoint>& samples, double horizonS) {
  if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "no position samples");
  const Waypoint& last = samples.back();
  if (samples.size() == 1) return last.pos;
  const Waypoint& prev = samples[samples.size() - 2];
  const double dt = last.timeS - prev.timeS;
  if (!(dt > 0)) return last.pos;
  const double vx = (last.pos.x - prev.pos.x) / dt;
  const double vy = (last.pos.y - prev.pos.y) / dt;
  return {last.pos.x + vx * horizonS, last.pos.y + vy * horizonS};
}

const NodeSpec* nearest_gateway(const Topology& topo, Point p) {
  const NodeSpec* best = nullptr;
  double bestD = std::numeric_limits<double>::infinity();
  for (const NodeSpec* g : topo.gateways()) {  // id order, so strict < keeps the smaller id
    const double d = distance(g->position, p);
    if (d < bestD) {
      bestD = d;
      best = g;
    }
  }
  return best;
}

MigrationDecision migration_decision(const std::string& userId, Point predictedPos, const AppSpec& app,
                                     const Placement& placement, const PlacementContext& ctx,
                                     const MobilityConfig& cfg) {
  const Topology& topo = *ctx.topology;
  MigrationDecision out;
  const NodeSpec* gw = nearest_gateway(topo, predictedPos);
  if (!gw) return out;
  out.predictedGateway = gw->id;

  std::map<NodeId, std::vector<const ModuleSpec*>> groups;
  for (const auto& m : app.modules) {
    if (m.latencyClass != LatencyClass::Sensitive) continue;
    if (auto it = placement.assignment.find(m.id); it != placement.assignment.end()) groups[it->second].push_back(&m);
  }

  auto latency = [&](const NodeId& node) {
    try {
      return topo.base_latency_ms(gw->id, node);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  for (const auto& [current, modules] : groups) {
    const double currentMs = latency(current);
    if (currentMs <= cfg.toleranceMs) continue;

    double ramNeeded = 0.0, stateKb = 0.0;
    int privacy = 0;
    for (const ModuleSpec* m : modules) {
      ramNeeded += m->ramMB;
      stateKb += m->stateSizeKb;
      privacy = std::max(privacy, m->privacyLevel);
    }

    const NodeSpec* target = nullptr;
    double targetMs = std::numeric_limits<double>::infinity();
    std::vector<const NodeSpec*> edges;
    for (const auto& n : topo.nodes())
      if (n.tier == Tier::EdgeNode && n.id != current) edges.push_back(&n);
    std::sort(edges.begin(), edges.end(), [](auto* a, auto* b) { return a->id < b->id; });
    for (const NodeSpec* n : edges) {
      if (n->trustLevel < privacy || ctx.excluded.count(n->id)) continue;
      if (ctx.residual && (!ctx.residual->up(n->id) || ctx.residual->free_ram(n->id) < ramNeeded)) continue;
      const double ms = latency(n->id);
      if (ms < targetMs) {
        targetMs = ms;
        target = n;
      }
    }

    if (!target || !(targetMs <= cfg.hysteresisMargin * currentMs)) {
      out.kind = MigrationDecision::Kind::NoFeasibleTarget;
      continue;
    }

    MigrationPlan plan;
    plan.userId = userId;
    plan.appId = app.id;
    for (const ModuleSpec* m : modules) plan.affectedModules.push_back(m->id);
    plan.fromNode = current;
    plan.toNode = target->id;
    plan.stateTransferS = transfer_time(stateKb, topo.route(current, target->id));
    plan.currentLatencyMs = currentMs;
    plan.targetLatencyMs = targetMs;
    plan.triggerReason = "predicted gateway " + gw->id + " is " + std::to_string(currentMs) + " ms from " + current;
    out.kind = MigrationDecision::Kind::Migrate;
    out.plan = std::move(plan);
    return out;
  }
  return out;
}

}  // namespace edgeward
