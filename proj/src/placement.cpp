#include "edgeward/placement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "edgeward/error.hpp"
#include "edgeward/kernel.hpp"

namespace edgeward {

QoSWeights QoSWeights::normalized() const {
  if (wLatency < 0 || wCost < 0 || wEnergy < 0) throw Error(ErrorKind::InvalidArgument, "negative QoS weight");
  const double sum = wLatency + wCost + wEnergy;
  if (!(sum > 0)) throw Error(ErrorKind::InvalidArgument, "QoS weights sum to zero");
  return {wLatency / sum, wCost / sum, wEnergy / sum};
}

ResidualCapacity::ResidualCapacity(const Topology& topo) {
  for (const auto& n : topo.nodes()) freeRam_[n.id] = n.ramMB;
}

double ResidualCapacity::free_ram(const NodeId& node) const {
  auto it = freeRam_.find(node);
  return it == freeRam_.end() ? 0.0 : it->second;
}

bool ResidualCapacity::up(const NodeId& node) const { return !down_.count(node); }

void ResidualCapacity::reserve(const NodeId& node, double ramMB) { freeRam_[node] -= ramMB; }

void ResidualCapacity::release(const NodeId& node, double ramMB) { freeRam_[node] += ramMB; }

void ResidualCapacity::set_up(const NodeId& node, bool isUp) {
  if (isUp)
    down_.erase(node);
  else
    down_.insert(node);
}

void ResidualCapacity::add_node(const NodeSpec& node, bool isUp) {
  freeRam_[node.id] = node.ramMB;
  set_up(node.id, isUp);
}

namespace {

constexpr double kRamSlack = 1e-9;

struct AppShape {
  std::vector<ModuleId> order;
  std::map<ModuleId, std::vector<const AppEdge*>> incoming;
};

AppShape shape_of(const AppSpec& app) {
  AppShape s;
  s.order = topological_order(app);
  for (const auto& e : app.edges) s.incoming[e.dst].push_back(&e);
  return s;
}

const NodeId& source_of(const AppSpec& app, const PlacementContext& ctx) {
  return ctx.sourceAttachment ? *ctx.sourceAttachment : app.sourceNode;
}

bool node_admissible(const ModuleSpec& m, const NodeSpec& n, const PlacementContext& ctx) {
  if (!n.computes() || n.trustLevel < m.privacyLevel) return false;
  if (ctx.residual && !ctx.residual->up(n.id)) return false;
  if (ctx.excluded.count(n.id)) return false;
  if (auto it = ctx.allowed.find(m.id); it != ctx.allowed.end() && !it->second.count(n.id)) return false;
  return true;
}

double free_ram(const NodeSpec& n, const PlacementContext& ctx) {
  return ctx.residual ? ctx.residual->free_ram(n.id) : n.ramMB;
}

struct ModuleTerms {
  double latencyMs = 0.0;
  double costPerHour = 0.0;
  double energyJPerHour = 0.0;
  double finishMs = 0.0;  // critical-path finish time of this module
};

// Terms for module m on node n given the nodes and finish times of every
// upstream module. nullopt when some inbound route does not exist.
std::optional<ModuleTerms> module_terms(const AppSpec& app, const AppShape& shape, const ModuleSpec& m,
                                        const NodeSpec& n, const std::map<ModuleId, NodeId>& assignment,
                                        const std::map<ModuleId, double>& finish, const PlacementContext& ctx) {
  const Topology& topo = *ctx.topology;
  ModuleTerms t;
  double ready = 0.0;
  if (auto it = shape.incoming.find(m.id); it != shape.incoming.end()) {
    for (const AppEdge* e : it->second) {
      const bool fromSource = e->src == kSourceEndpoint;
      const NodeId& from = fromSource ? source_of(app, ctx) : assignment.at(e->src);
      double ms;
      try {
        ms = transfer_time(e->tupleSizeKb, topo.route(from, n.id)) * 1000.0;
      } catch (const Error&) {
        return std::nullopt;
      }
      t.latencyMs += ms;
      const double upstream = fromSource ? 0.0 : finish.at(e->src);
      ready = std::max(ready, upstream + ms);
    }
  }

  const ProfileKey key{m.imageId.empty() ? m.id : m.imageId, n.profile_type()};
  const double serviceS =
      ctx.profiles ? ctx.profiles->predict_service_time(key, m.taskLengthMI, n) : service_time(m.taskLengthMI, n);
  t.latencyMs += serviceS * 1000.0;
  t.finishMs = ready + serviceS * 1000.0;

  if (ctx.catalogue) {
    double oneOffS = image_transfer_cost(*ctx.catalogue, m.imageId, n.id, topo);
    if (!m.datasetId.empty() && ctx.catalogue->find(CatalogueKind::Data, m.datasetId))
      oneOffS += data_movement_cost(*ctx.catalogue, m.datasetId, n.id, topo);
    if (ctx.imageAmortizationS > 0) oneOffS /= std::max(1.0, ctx.imageAmortizationS * app.source_rate_hz());
    t.latencyMs += oneOffS * 1000.0;
  }

  t.costPerHour = n.ramMB > 0 ? n.pricePerHour * m.ramMB / n.ramMB : 0.0;
  t.energyJPerHour = app.source_rate_hz() * serviceS * (n.powerMaxW - n.powerIdleW) / n.cores * 3600.0;
  return t;
}

double term_score(const ModuleTerms& t, const QoSWeights& w, const Normalization& norm) {
  return w.wLatency * t.latencyMs / norm.latencyMs + w.wCost * t.costPerHour / norm.costPerHour +
         w.wEnergy * t.energyJPerHour / norm.energyJPerHour;
}

std::vector<const NodeSpec*> compute_nodes_by_id(const Topology& topo) {
  std::vector<const NodeSpec*> out;
  for (const auto& n : topo.nodes())
    if (n.computes()) out.push_back(&n);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->id < b->id; });
  return out;
}

struct Candidate {
  const NodeSpec* node;
  double score;
  ModuleTerms terms;
};

// Feasible nodes for module index k given the current partial assignment,
// ranked by (incremental score, node id).
std::vector<Candidate> rank_candidates(const AppSpec& app, const AppShape& shape, std::size_t k,
                                       const std::map<ModuleId, NodeId>& assignment,
                                       const std::map<ModuleId, double>& finish,
                                       const std::map<NodeId, double>& ramUsed, const QoSWeights& w,
                                       const PlacementContext& ctx, const std::vector<const NodeSpec*>& nodes) {
  const ModuleSpec& m = *app.module(shape.order[k]);
  std::vector<Candidate> out;
  for (const NodeSpec* n : nodes) {
    if (!node_admissible(m, *n, ctx)) continue;
    const double used = ramUsed.count(n->id) ? ramUsed.at(n->id) : 0.0;
    if (used + m.ramMB > free_ram(*n, ctx) + kRamSlack) continue;
    auto terms = module_terms(app, shape, m, *n, assignment, finish, ctx);
    if (!terms) continue;
    if (ctx.enforceDeadline && terms->finishMs > app.qos.deadlineMs) continue;
    out.push_back({n, term_score(*terms, w, ctx.norm), *terms});
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.score < b.score; });
  return out;
}

Placement finish_placement(const AppSpec& app, std::map<ModuleId, NodeId> assignment, const QoSWeights& w,
                           const PlacementContext& ctx) {
  Placement p;
  p.appId = app.id;
  p.assignment = std::move(assignment);
  auto terms = evaluate_assignment(app, p.assignment, ctx);
  p.terms = *terms;
  p.score = weighted_score(p.terms, w, ctx.norm);
  p.feasible = true;
  return p;
}

}  // namespace

std::vector<NodeId> feasible_nodes(const ModuleSpec& module, const PlacementContext& ctx) {
  std::vector<NodeId> out;
  for (const NodeSpec* n : compute_nodes_by_id(*ctx.topology))
    if (node_admissible(module, *n, ctx) && module.ramMB <= free_ram(*n, ctx) + kRamSlack) out.push_back(n->id);
  return out;
}

std::optional<ScoreBreakdown> evaluate_assignment(const AppSpec& app, const std::map<ModuleId, NodeId>& assignment,
                                                  const PlacementContext& ctx) {
  const AppShape shape = shape_of(app);
  std::map<ModuleId, double> finish;
  ScoreBreakdown b;
  for (const auto& mid : shape.order) {
    const ModuleSpec& m = *app.module(mid);
    const NodeSpec& n = ctx.topology->node(assignment.at(mid));
    auto t = module_terms(app, shape, m, n, assignment, finish, ctx);
    if (!t) return std::nullopt;
    finish[mid] = t->finishMs;
    b.latencyMs += t->latencyMs;
    b.costPerHour += t->costPerHour;
    b.energyJPerHour += t->energyJPerHour;
    b.criticalPathMs = std::max(b.criticalPathMs, t->finishMs);
  }
  return b;
}

double weighted_score(const ScoreBreakdown& terms, const QoSWeights& w, const Normalization& norm) {
  return w.wLatency * terms.latencyMs / norm.latencyMs + w.wCost * terms.costPerHour / norm.costPerHour +
         w.wEnergy * terms.energyJPerHour / norm.energyJPerHour;
}

Placement place_application(const AppSpec& app, const QoSWeights& weights, const PlacementContext& ctx) {
  const QoSWeights w = weights.normalized();
  const AppShape shape = shape_of(app);
  const auto nodes = compute_nodes_by_id(*ctx.topology);
  const std::size_t count = shape.order.size();

  std::map<ModuleId, NodeId> assignment;
  std::map<ModuleId, double> finish;
  std::map<NodeId, double> ramUsed;
  std::vector<std::vector<Candidate>> ranked(count);
  std::vector<std::size_t> choice(count, 0);

  auto assign = [&](std::size_t k, std::size_t c) {
    const Candidate& cand = ranked[k][c];
    const ModuleSpec& m = *app.module(shape.order[k]);
    assignment[m.id] = cand.node->id;
    finish[m.id] = cand.terms.finishMs;
    ramUsed[cand.node->id] += m.ramMB;
    choice[k] = c;
  };
  auto unassign = [&](std::size_t k) {
    const ModuleSpec& m = *app.module(shape.order[k]);
    ramUsed[assignment[m.id]] -= m.ramMB;
    assignment.erase(m.id);
    finish.erase(m.id);
  };
  auto infeasible = [&](std::size_t k) {
    return Error(ErrorKind::Infeasible, "app '" + app.id + "': no feasible node for module '" + shape.order[k] + "'");
  };

  for (std::size_t k = 0; k < count; ++k) {
    ranked[k] = rank_candidates(app, shape, k, assignment, finish, ramUsed, w, ctx, nodes);
    if (!ranked[k].empty()) {
      assign(k, 0);
      continue;
    }
    if (k == 0) throw infeasible(k);
    // One level of backtracking: walk the previous module down its ranking.
    bool recovered = false;
    for (std::size_t alt = choice[k - 1] + 1; alt < ranked[k - 1].size() && !recovered; ++alt) {
      unassign(k - 1);
      assign(k - 1, alt);
      ranked[k] = rank_candidates(app, shape, k, assignment, finish, ramUsed, w, ctx, nodes);
      if (!ranked[k].empty()) {
        assign(k, 0);
        recovered = true;
      }
    }
    if (!recovered) throw infeasible(k);
  }
  return finish_placement(app, std::move(assignment), w, ctx);
}

Placement brute_force_placement(const AppSpec& app, const QoSWeights& weights, const PlacementContext& ctx) {
  const QoSWeights w = weights.normalized();
  const AppShape shape = shape_of(app);
  const auto nodes = compute_nodes_by_id(*ctx.topology);
  const std::size_t count = shape.order.size();

  double total = 1.0;
  for (std::size_t i = 0; i < count; ++i) total *= static_cast<double>(nodes.size());
  if (total > 1e6) throw Error(ErrorKind::TooLarge, "app '" + app.id + "': more than 10^6 assignments");
  if (nodes.empty()) throw Error(ErrorKind::Infeasible, "no compute nodes");

  const auto combos = static_cast<std::uint64_t>(total);
  std::vector<std::size_t> digits(count, 0);
  std::optional<Placement> best;
  for (std::uint64_t code = 0; code < combos; ++code) {
    // Decode with the first module as the most significant digit so the
    // enumeration runs in lexicographic order of node ids.
    std::uint64_t rest = code;
    for (std::size_t k = count; k-- > 0;) {
      digits[k] = rest % nodes.size();
      rest /= nodes.size();
    }
    std::map<ModuleId, NodeId> assignment;
    std::map<NodeId, double> ramUsed;
    bool ok = true;
    for (std::size_t k = 0; k < count && ok; ++k) {
      const ModuleSpec& m = *app.module(shape.order[k]);
      const NodeSpec& n = *nodes[digits[k]];
      ramUsed[n.id] += m.ramMB;
      ok = node_admissible(m, n, ctx) && ramUsed[n.id] <= free_ram(n, ctx) + kRamSlack;
      assignment[m.id] = n.id;
    }
    if (!ok) continue;
    auto terms = evaluate_assignment(app, assignment, ctx);
    if (!terms || (ctx.enforceDeadline && terms->criticalPathMs > app.qos.deadlineMs)) continue;
    const double s = weighted_score(*terms, w, ctx.norm);
    if (!best || s < best->score) best = Placement{app.id, assignment, {}, s, true, *terms};
  }
  if (!best) throw Error(ErrorKind::Infeasible, "app '" + app.id + "': no assignment satisfies the constraints");
  return *best;
}

std::optional<NodeId> replace_module(const AppSpec& app, const ModuleId& module,
                                     const std::map<ModuleId, NodeId>& assignment, const QoSWeights& weights,
                                     const PlacementContext& ctx) {
  const QoSWeights w = weights.normalized();
  const ModuleSpec* m = app.module(module);
  if (!m) throw Error(ErrorKind::NotFound, app.id + "/" + module);
  std::optional<NodeId> best;
  double bestScore = std::numeric_limits<double>::infinity();
  for (const auto& id : feasible_nodes(*m, ctx)) {
    auto trial = assignment;
    trial[module] = id;
    auto terms = evaluate_assignment(app, trial, ctx);
    if (!terms) continue;
    const double s = weighted_score(*terms, w, ctx.norm);
    if (s < bestScore) {
      bestScore = s;
      best = id;
    }
  }
  return best;
}

QoSWeights retune_weights(const QoSWeights& weights, const ViolationReportQoS& v, double eta) {
  if (!(eta > 0)) throw Error(ErrorKind::InvalidArgument, "eta must be > 0");
  auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };
  QoSWeights out{weights.wLatency * (1.0 + eta * clamp01(v.latencyMissRate)),
                 weights.wCost * (1.0 + eta * clamp01(v.budgetOverrun)),
                 weights.wEnergy * (1.0 + eta * clamp01(v.energyOverrun))};
  return out.normalized();
}

std::vector<std::string> check_placement(const AppSpec& app, const Placement& placement, const Topology& topo,
                                         const ResidualCapacity& before) {
  std::vector<std::string> problems;
  std::map<NodeId, double> ram;
  auto check_node = [&](const ModuleSpec& m, const NodeId& id, const char* role) {
    const NodeSpec* n = topo.find(id);
    if (!n) {
      problems.push_back(std::string(role) + " of " + m.id + " on unknown node " + id);
      return;
    }
    if (n->trustLevel < m.privacyLevel)
      problems.push_back(std::string(role) + " of " + m.id + " on " + id + " violates privacy");
    if (!n->computes()) problems.push_back(std::string(role) + " of " + m.id + " on non-compute node " + id);
    ram[id] += m.ramMB;
  };
  for (const auto& [mid, node] : placement.assignment) {
    const ModuleSpec* m = app.module(mid);
    if (!m) {
      problems.push_back("unknown module " + mid);
      continue;
    }
    check_node(*m, node, "primary");
    if (auto it = placement.replicas.find(mid); it != placement.replicas.end()) {
      std::set<NodeId> seen{node};
      for (const auto& r : it->second) {
        if (!seen.insert(r).second) problems.push_back("replica of " + mid + " duplicates node " + r);
        check_node(*m, r, "replica");
      }
    }
  }
  for (const auto& [id, used] : ram)
    if (used > before.free_ram(id) + kRamSlack) problems.push_back("ram exceeded on " + id);
  return problems;
}

}  // namespace edgeward
