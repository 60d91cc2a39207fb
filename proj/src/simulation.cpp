#include "edgeward/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "edgeward/data_manager.hpp"
#include "edgeward/error.hpp"
#include "edgeward/scheduler.hpp"

namespace edgeward {

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * values.size()));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

namespace {

constexpr double kNever = -std::numeric_limits<double>::infinity();

struct AppRt {
  const AppSpec* spec = nullptr;
  std::size_t index = 0;
  std::string status = "pending";
  bool active = false;  // placed and emitting
  double rateHz = 0.0;
  ArrivalProcess arrival = ArrivalProcess::Periodic;
  Rng rng{0};
  std::uint64_t emitCount = 0;
  std::uint64_t generation = 0;  // bumps on suspension so stale emissions stop

  std::vector<ModuleId> order;
  std::map<ModuleId, std::vector<const AppEdge*>> out;
  std::map<ModuleId, int> inDegree;
  std::vector<ModuleId> sinks;
  double tupleMI = 0.0;

  std::map<ModuleId, std::string> reservedCluster;
  std::map<ModuleId, double> reservedMips;
  std::map<ModuleId, std::vector<NodeId>> extra;  // autoscaled instances
  std::map<ModuleId, double> readyAt;
  std::map<ModuleId, NodeId> dead;  // module -> failed node, tuples dropped until recovery
  bool migrating = false;
  std::size_t delegations = 0;
};

struct TupleRt {
  std::size_t pendingSinks = 0;
  std::map<ModuleId, int> arrived;
};

struct TransferInfo {
  NodeId from;
  double sizeKb = 0.0;
  bool asTask = false;
};

struct TaskInfo {
  NodeId node;
  double arriveS = 0.0;
  double startS = 0.0;
  NodeId from;
  double sizeKb = 0.0;
};

struct Stranded {
  AppId app;
  ModuleId module;
  std::uint64_t tuple = 0;
  NodeId from;
  double sizeKb = 0.0;
  bool asTask = false;
};

struct NodeState {
  NodeRuntime rt;
  NodeQueue queue;
  double createdS = 0.0;
  bool retired = false;
  double retiredS = 0.0;
};

struct UserRt {
  const UserSpec* spec = nullptr;
  NodeId serving;
  std::deque<Waypoint> window;
};

struct ClusterRt {
  const ClusterDecl* decl = nullptr;
  std::vector<NodeId> base;
  std::vector<NodeId> scaled;  // active autoscaled nodes
  int pending = 0;
  int created = 0;
  double lastActionS = kNever;
  std::optional<double> idleSince;
};

struct PendingNode {
  NodeSpec spec;
  NodeId attachTo;
  double latencyMs = 1.0;
  double bandwidthMbps = 1000.0;
  bool scaleOut = false;
  std::size_t agreementIndex = 0;
};

class Engine {
 public:
  Engine(const Scenario& s, const RunOverrides& o)
      : sc_(s),
        seed_(o.seed.value_or(s.sim.seed)),
        duration_(o.untilS.value_or(s.sim.durationS)),
        profiles_(s.config.profileMinSamples) {
    res_.scenarioName = s.name;
    res_.seed = seed_;
    res_.durationS = duration_;
  }

  SimResult run() {
    std::ostringstream trace;
    kernel_.set_trace(&trace);
    setup();
    const KernelStats st = kernel_.run_until(duration_, [this](Kernel&, const SimEvent& e) { handle(e); });
    res_.processedEvents = st.processedEvents;
    finish();
    res_.trace = trace.str();
    return std::move(res_);
  }

 private:
  // ------------------------------------------------------------------ setup

  void setup() {
    nodes_ = sc_.nodes;
    links_ = sc_.links;
    topo_ = Topology(nodes_, links_);
    residual_ = ResidualCapacity(topo_);
    for (const auto& n : nodes_) add_runtime(n, 0.0);
    for (const auto& e : sc_.catalogue) catalogue_.register_entry(e);

    std::vector<ClusterState> clusters;
    for (const auto& c : sc_.clusters) {
      ClusterState cs;
      cs.clusterId = c.id;
      cs.utilizationCap = c.utilizationCap;
      ClusterRt& crt = clusters_[c.id];
      crt.decl = &c;
      for (const auto& n : nodes_)
        if (n.clusterId == c.id && n.computes()) {
          cs.memberNodes.push_back(n.id);
          cs.totalMips += n.cores * n.mipsPerCore;
          crt.base.push_back(n.id);
        }
      std::sort(cs.memberNodes.begin(), cs.memberNodes.end());
      for (const auto& other : sc_.clusters)
        if (other.id != c.id) cs.peerClusters.push_back(other.id);
      clusters.push_back(std::move(cs));
    }
    std::vector<ClusterState> withMembers, empty;
    for (auto& c : clusters) (c.memberNodes.empty() ? empty : withMembers).push_back(std::move(c));
    if (!withMembers.empty()) order_peers_by_latency(withMembers, topo_);
    for (auto& c : empty) withMembers.push_back(std::move(c));
    admission_ = AdmissionController(std::move(withMembers));

    for (const auto& u : sc_.users) {
      UserRt& ur = users_[u.id];
      ur.spec = &u;
      ur.serving = u.servingGatewayId;
      if (!u.trajectory.points.empty()) {
        const Point p0 = u.trajectory.points.front().pos;
        if (ur.serving.empty())
          if (const NodeSpec* g = nearest_gateway(topo_, p0)) ur.serving = g->id;
        for (const auto& w : u.trajectory.points)
          if (w.timeS > 0 && w.timeS <= duration_) kernel_.schedule(w.timeS, EventKind::UserMoved, {.user = u.id});
        if (u.trajectory.points.front().timeS <= 0) ur.window.push_back(u.trajectory.points.front());
      }
    }

    provision_initial();

    for (std::size_t i = 0; i < sc_.apps.size(); ++i) init_app(sc_.apps[i], i);
    std::vector<AppRt*> order;
    for (auto& [id, a] : apps_) order.push_back(&a);
    std::stable_sort(order.begin(), order.end(), [](const AppRt* a, const AppRt* b) {
      if (a->spec->qos.priorityClass != b->spec->qos.priorityClass)
        return a->spec->qos.priorityClass < b->spec->qos.priorityClass;
      return a->index < b->index;
    });
    for (AppRt* a : order) {
      if (a->status != "pending") continue;
      if (a->spec->startS <= 0) start_app(*a);
      else if (a->spec->startS <= duration_)
        kernel_.schedule(a->spec->startS, EventKind::MonitorTick, {.app = a->spec->id, .detail = "start"});
    }

    Rng failureRng(mix_seed(seed_, 0xFA11));
    std::vector<FailureEvent> fails = inject_failures(nodes_, failureRng, duration_);
    for (const auto& f : sc_.failures) {
      fails.push_back({f.atS, EventKind::NodeFailed, f.nodeId});
      if (f.recoverAtS) fails.push_back({*f.recoverAtS, EventKind::NodeRecovered, f.nodeId});
    }
    std::stable_sort(fails.begin(), fails.end(), [](const auto& a, const auto& b) { return a.timeS < b.timeS; });
    for (const auto& f : fails)
      if (f.timeS <= duration_) kernel_.schedule(f.timeS, f.kind, {.node = f.nodeId});

    const auto& mu = sc_.config.modelUpdate;
    if (mu.periodS > 0)
      for (std::uint64_t k = 1; k * mu.periodS <= duration_; ++k)
        kernel_.schedule(k * mu.periodS, EventKind::ModelUpdated,
                         {.app = mu.appId, .module = mu.moduleId, .detail = std::to_string(k), .value = mu.sizeKb});

    schedule_tick(1);
  }

  void add_runtime(const NodeSpec& n, double now) {
    NodeRuntime rt;
    rt.nodeId = n.id;
    rt.lastAccrualS = now;
    nodeState_.emplace(n.id, NodeState{rt, NodeQueue(std::max(1, n.cores), n.mipsPerCore > 0 ? n.mipsPerCore : 1.0,
                                                     sc_.config.queuePolicy),
                                       now});
  }

  void schedule_tick(std::uint64_t k) {
    const double t = k * sc_.config.monitorPeriodS;
    if (t <= duration_) kernel_.schedule(t, EventKind::MonitorTick, {.detail = "tick", .task = k});
  }

  void init_app(const AppSpec& spec, std::size_t index) {
    AppRt& a = apps_[spec.id];
    a.spec = &spec;
    a.index = index;
    a.rng = Rng(mix_seed(seed_, 1000 + index));
    if (auto it = sc_.arrivals.find(spec.id); it != sc_.arrivals.end()) a.arrival = it->second;
    a.order = topological_order(spec);
    for (const auto& e : spec.edges) {
      if (e.src != kSourceEndpoint) a.out[e.src].push_back(&e);
      a.inDegree[e.dst]++;
    }
    for (const auto& m : a.order)
      if (!a.out.count(m)) a.sinks.push_back(m);
    for (const auto& m : spec.modules) a.tupleMI += m.taskLengthMI;
    a.rateHz = spec.source_rate_hz();
    if (spec.calibration) {
      for (const auto& d : sc_.devices)
        if (d.deviceId == spec.sourceNode) {
          try {
            a.rateHz = calibrate_frequency(d, spec.calibration->requiredAccuracy, spec.calibration->freshnessMs).rateHz;
          } catch (const Error& e) {
            fail_app(a, e.what());
          }
        }
    }
  }

  void fail_app(AppRt& a, const std::string& why) {
    a.status = "infeasible";
    a.active = false;
    res_.appErrors[a.spec->id] = why;
  }

  // ------------------------------------------------------ provisioning

  const ProviderSpec* provider(const std::string& id) const {
    for (const auto& p : sc_.providers)
      if (p.id == id) return &p;
    return nullptr;
  }

  NodeSpec node_from_offer(const InstanceOffer& off, const ProviderSpec& prov, const std::string& cluster,
                           const NodeId& id, const NodeId& attachTo, int trust, double price) {
    NodeSpec n;
    n.id = id;
    n.tier = Tier::EdgeNode;
    n.cores = off.cores;
    n.mipsPerCore = off.mipsPerCore;
    n.ramMB = off.ramMB;
    n.storageGB = off.storageGB;
    const PowerPair pw = energy_class_power(off.energyClass);
    n.powerIdleW = pw.idleW;
    n.powerMaxW = pw.maxW;
    n.trustLevel = trust;
    n.clusterId = cluster;
    n.providerId = prov.id;
    n.position = topo_.node(attachTo).position;
    n.pricePerHour = price;
    n.typeId = prov.id + "/" + off.offerId;
    return n;
  }

  void provision_initial() {
    for (std::size_t r = 0; r < sc_.provisioning.size(); ++r) {
      const ProvisioningRequest& req = sc_.provisioning[r];
      const ProviderSpec* prov = provider(req.providerId);
      InstanceRequirement need = req.requirement;
      try {
        if (!req.demandHistory.empty()) {
          const DemandForecast f = forecast_demand(req.demandHistory, sc_.config.forecastAlpha, sc_.config.forecastLeadS);
          need.mipsNeeded = std::ceil(f.expectedInstances) * req.mipsPerInstance;
        }
        std::vector<CandidateUnit> candidates;
        std::vector<Agreement> deals;
        for (const auto& offerId : req.offerIds) {
          try {
            Agreement a = negotiate(*prov, offerId, req.budgetPerHour, sc_.config.negotiationRounds, 0.0);
            for (int k = 0; k < req.maxUnitsPerOffer; ++k) {
              candidates.push_back({*prov->offer(offerId), a.agreedPricePerHour});
              deals.push_back(a);
            }
          } catch (const Error& e) {
            res_.provisioningErrors.push_back(fmt::format("provisioning[{}] {}: {}", r, offerId, e.what()));
          }
        }
        if (candidates.empty()) continue;
        const InstanceSelection sel = select_instances(need, candidates, sc_.config.selection);
        const double delay = provisioning_delay(*prov, static_cast<int>(sel.chosen.size()), 0.0);
        for (std::size_t idx : sel.chosen) {
          const CandidateUnit& u = candidates[idx];
          Agreement a = deals[idx];
          a.availableAtS = delay;
          const NodeId id = fmt::format("{}-{}-{}", req.clusterId, u.offer.offerId, ++provisionSeq_);
          PendingNode pn{node_from_offer(u.offer, *prov, req.clusterId, id, req.attachTo, req.trustLevel, u.pricePerHour),
                         req.attachTo, req.linkLatencyMs, req.linkBandwidthMbps, false, res_.agreements.size()};
          res_.agreements.push_back({a, id, delay, duration_});
          pending_[id] = std::move(pn);
          if (delay <= duration_) kernel_.schedule(delay, EventKind::ProvisionComplete, {.node = id, .detail = req.clusterId});
        }
      } catch (const Error& e) {
        res_.provisioningErrors.push_back(fmt::format("provisioning[{}]: {}", r, e.what()));
      }
    }
  }

  void on_provision_complete(const SimEvent& e) {
    auto it = pending_.find(e.payload.node);
    if (it == pending_.end()) return;
    PendingNode pn = std::move(it->second);
    pending_.erase(it);
    const double now = kernel_.now();
    nodes_.push_back(pn.spec);
    links_.push_back({pn.spec.id, pn.attachTo, pn.latencyMs, pn.bandwidthMbps});
    topo_ = Topology(nodes_, links_);
    residual_.add_node(pn.spec, true);
    add_runtime(pn.spec, now);
    res_.agreements[pn.agreementIndex].startS = now;
    if (!pn.spec.clusterId.empty() && admission_.cluster(pn.spec.clusterId))
      admission_.add_member(pn.spec.clusterId, pn.spec.id, pn.spec.cores * pn.spec.mipsPerCore);

    if (!pn.scaleOut) return;
    ClusterRt& c = clusters_[pn.spec.clusterId];
    c.pending--;
    c.scaled.push_back(pn.spec.id);
    // Scale out every module already running in the cluster that fits.
    for (auto& [appId, a] : apps_) {
      if (!a.active) continue;
      Placement& p = placements_[appId];
      for (const auto& mid : a.order) {
        const NodeSpec& host = topo_.node(p.assignment[mid]);
        if (host.clusterId != pn.spec.clusterId) continue;
        const ModuleSpec& m = *a.spec->module(mid);
        if (pn.spec.trustLevel < m.privacyLevel || residual_.free_ram(pn.spec.id) < m.ramMB) continue;
        residual_.reserve(pn.spec.id, m.ramMB);
        a.extra[mid].push_back(pn.spec.id);
        a.readyAt[mid] = std::max(a.readyAt[mid], 0.0);
      }
    }
  }

  // ------------------------------------------------------ placement

  PlacementContext make_ctx(const AppRt& a) const {
    PlacementContext ctx;
    ctx.topology = &topo_;
    ctx.catalogue = &catalogue_;
    ctx.profiles = &profiles_;
    ctx.residual = &residual_;
    ctx.norm = sc_.config.norm;
    ctx.imageAmortizationS = sc_.config.imageAmortizationS;
    ctx.enforceDeadline = sc_.config.enforceDeadline;
    if (!a.spec->userId.empty())
      if (auto it = users_.find(a.spec->userId); it != users_.end() && !it->second.serving.empty())
        ctx.sourceAttachment = it->second.serving;
    if (sc_.config.forceTier) {
      std::set<NodeId> tierNodes;
      for (const auto& n : nodes_)
        if (n.tier == *sc_.config.forceTier) tierNodes.insert(n.id);
      for (const auto& m : a.spec->modules) ctx.allowed[m.id] = tierNodes;
    }
    for (const auto& [id, st] : nodeState_)
      if (st.retired) ctx.excluded.insert(id);
    return ctx;
  }

  std::set<NodeId> cluster_members(const std::string& cluster) const {
    std::set<NodeId> out;
    if (const ClusterState* c = admission_.cluster(cluster)) out.insert(c->memberNodes.begin(), c->memberNodes.end());
    return out;
  }

  std::set<NodeId> cloud_nodes() const {
    std::set<NodeId> out;
    for (const auto& n : nodes_)
      if (n.tier == Tier::CloudDC) out.insert(n.id);
    return out;
  }

  static std::set<NodeId> intersect(const std::set<NodeId>& a, const PlacementContext& ctx, const ModuleId& m) {
    auto it = ctx.allowed.find(m);
    if (it == ctx.allowed.end()) return a;
    std::set<NodeId> out;
    std::set_intersection(a.begin(), a.end(), it->second.begin(), it->second.end(), std::inserter(out, out.end()));
    return out;
  }

  void release_admission(AppRt& a) {
    for (const auto& [mid, cluster] : a.reservedCluster) admission_.release(cluster, a.reservedMips[mid]);
    a.reservedCluster.clear();
    a.reservedMips.clear();
  }

  // Places the app, runs admission control on the clusters it lands in and,
  // if any module is delegated, places once more with every module pinned
  // to where its reservation lives. Returns false when the app cannot run.
  bool try_place(AppRt& a, std::string& why) {
    const QoSWeights w = sc_.config.weights.normalized();
    PlacementContext ctx = make_ctx(a);
    Placement p;
    try {
      p = place_application(*a.spec, w, ctx);
    } catch (const Error& e) {
      why = e.what();
      return false;
    }

    std::vector<AdmissionRecord> records;
    bool delegated = false;
    for (const auto& mid : a.order) {
      const NodeSpec& host = topo_.node(p.assignment[mid]);
      if (host.clusterId.empty() || !admission_.cluster(host.clusterId)) continue;
      const ModuleSpec& m = *a.spec->module(mid);
      AdmissionRecord rec;
      rec.timeS = kernel_.now();
      rec.appId = a.spec->id;
      rec.moduleId = mid;
      rec.mips = m.taskLengthMI * a.rateHz;
      rec.homeCluster = host.clusterId;
      if (!(rec.mips > 0)) continue;
      rec.decision = admission_.admit({rec.mips, m.latencyClass}, host.clusterId);
      using K = AdmissionDecision::Kind;
      if (rec.decision.kind == K::Rejected) {
        records.push_back(rec);
        release_admission(a);
        why = fmt::format("admission rejected module {} in cluster {}", mid, host.clusterId);
        for (auto& r : records) res_.admissions.push_back(r);
        return false;
      }
      if (rec.decision.kind != K::Accepted) delegated = true;
      if (rec.decision.kind == K::Accepted || rec.decision.kind == K::DelegatedPeer) {
        a.reservedCluster[mid] = rec.decision.clusterId;
        a.reservedMips[mid] = rec.mips;
      }
      records.push_back(rec);
    }

    if (delegated) {
      PlacementContext pinned = ctx;
      for (const auto& rec : records) {
        using K = AdmissionDecision::Kind;
        const std::set<NodeId> where =
            rec.decision.kind == K::DelegatedCloud ? cloud_nodes() : cluster_members(rec.decision.clusterId);
        pinned.allowed[rec.moduleId] = intersect(where, ctx, rec.moduleId);
      }
      try {
        p = place_application(*a.spec, w, pinned);
      } catch (const Error& e) {
        release_admission(a);
        why = std::string("after delegation: ") + e.what();
        for (auto& r : records) res_.admissions.push_back(r);
        return false;
      }
    }
    for (auto& rec : records) {
      rec.finalNode = p.assignment[rec.moduleId];
      if (rec.decision.kind != AdmissionDecision::Kind::Accepted) {
        a.delegations++;
        res_.delegations++;
      }
      res_.admissions.push_back(rec);
    }

    const double now = kernel_.now();
    for (const auto& mid : a.order) {
      const ModuleSpec& m = *a.spec->module(mid);
      const NodeId& n = p.assignment[mid];
      residual_.reserve(n, m.ramMB);
      double ready = now;
      if (!m.imageId.empty()) {
        ready += image_transfer_cost(catalogue_, m.imageId, n, topo_);
        if (catalogue_.find(CatalogueKind::Image, m.imageId)) catalogue_.mark_cached(m.imageId, n);
      }
      a.readyAt[mid] = ready;
    }

    if (sc_.config.replication && a.spec->qos.budgetPerHour > 0) {
      const double slack = a.spec->qos.budgetPerHour - p.terms.costPerHour;
      ReplicationOptions opts;
      opts.maxDegree = sc_.config.maxReplicaDegree;
      const ReplicationPlan plan = plan_replication(*a.spec, p, slack, make_ctx(a), opts);
      p.replicas = plan.replicaAssignments;
      for (const auto& [mid, nodes] : p.replicas)
        for (const auto& n : nodes) residual_.reserve(n, a.spec->module(mid)->ramMB);
    }
    placements_[a.spec->id] = std::move(p);
    return true;
  }

  void start_app(AppRt& a) {
    std::string why;
    bool ok = try_place(a, why);
    if (!ok && a.spec->qos.priorityClass == PriorityClass::Emergency && sc_.config.appPreemption) {
      while (!ok) {
        auto victim = select_preemption_victim(running_apps(), kernel_.now());
        if (!victim) break;
        suspend(apps_.at(*victim));
        ok = try_place(a, why);
      }
    }
    if (!ok) return fail_app(a, why);
    a.status = "placed";
    a.active = true;
    a.generation++;
    schedule_emission(a, kernel_.now());
  }

  std::vector<RunningApp> running_apps() const {
    std::vector<RunningApp> out;
    for (const auto& [id, a] : apps_) {
      if (!a.active) continue;
      RunningApp ra{id, a.spec->qos.priorityClass, {}};
      const double remaining = placements_.at(id).terms.criticalPathMs / 1000.0;
      for (const auto& [tid, t] : tupleRt_) {
        const TupleRecord& r = res_.tuples[tid];
        if (r.appId == id && r.status == TupleStatus::InFlight) ra.inFlight.push_back({r.deadlineAtS, remaining});
      }
      out.push_back(std::move(ra));
    }
    return out;
  }

  void release_resources(AppRt& a) {
    auto it = placements_.find(a.spec->id);
    if (it == placements_.end()) return;
    const Placement& p = it->second;
    for (const auto& [mid, n] : p.assignment) residual_.release(n, a.spec->module(mid)->ramMB);
    for (const auto& [mid, nodes] : p.replicas)
      for (const auto& n : nodes) residual_.release(n, a.spec->module(mid)->ramMB);
    for (const auto& [mid, nodes] : a.extra)
      for (const auto& n : nodes) residual_.release(n, a.spec->module(mid)->ramMB);
    a.extra.clear();
    release_admission(a);
  }

  void suspend(AppRt& a) {
    release_resources(a);
    a.active = false;
    a.status = "suspended";
    a.generation++;
    res_.suspensions++;
    for (auto it = tupleRt_.begin(); it != tupleRt_.end();) {
      TupleRecord& r = res_.tuples[it->first];
      if (r.appId == a.spec->id && r.status == TupleStatus::InFlight) {
        r.status = TupleStatus::Preempted;
        it = tupleRt_.erase(it);
      } else {
        ++it;
      }
    }
  }

  // ------------------------------------------------------ tuples

  void schedule_emission(AppRt& a, double t) {
    if (!(a.rateHz > 0) || t > duration_) return;
    kernel_.schedule(t, EventKind::TupleEmitted, {.app = a.spec->id, .token = a.generation});
  }

  NodeId entry_node(const AppRt& a) const {
    if (!a.spec->userId.empty())
      if (auto it = users_.find(a.spec->userId); it != users_.end() && !it->second.serving.empty())
        return it->second.serving;
    return a.spec->sourceNode;
  }

  void on_emit(const SimEvent& e) {
    AppRt& a = apps_.at(e.payload.app);
    if (!a.active || e.payload.token != a.generation) return;
    const double now = kernel_.now();
    const AppEdge& src = *a.spec->source_edge();

    TupleRecord r;
    r.tupleId = res_.tuples.size();
    r.appId = a.spec->id;
    r.srcModule = src.dst;
    r.dstModule = a.sinks.back();
    r.sizeKb = src.tupleSizeKb;
    r.emitTimeS = now;
    r.deadlineAtS = now + a.spec->qos.deadlineMs / 1000.0;
    res_.tuples.push_back(r);
    tupleRt_[r.tupleId].pendingSinks = a.sinks.size();
    for (const auto& edge : a.spec->edges)
      if (edge.src == kSourceEndpoint) send(a, edge.dst, r.tupleId, entry_node(a), edge.tupleSizeKb, false);

    a.emitCount++;
    double next;
    if (a.arrival == ArrivalProcess::Poisson) next = now + a.rng.exponential(1.0 / a.rateHz);
    else next = a.spec->startS + static_cast<double>(a.emitCount) / a.rateHz;
    if (next < now) next = now;  // resumed apps
    schedule_emission(a, next);
  }

  bool usable(const NodeId& n) const {
    auto it = nodeState_.find(n);
    return it != nodeState_.end() && it->second.rt.up && !it->second.retired;
  }

  std::vector<NodeId> instances(const AppRt& a, const ModuleId& m) const {
    std::vector<NodeId> out;
    out.push_back(placements_.at(a.spec->id).assignment.at(m));
    if (auto it = a.extra.find(m); it != a.extra.end())
      for (const auto& n : it->second) out.push_back(n);
    return out;
  }

  bool is_instance(const AppRt& a, const ModuleId& m, const NodeId& n) const {
    const auto v = instances(a, m);
    return std::find(v.begin(), v.end(), n) != v.end();
  }

  // Least backlog among live instances, the primary winning ties.
  NodeId pick_instance(const AppRt& a, const ModuleId& m) const {
    const auto v = instances(a, m);
    const NodeId* best = nullptr;
    double bestBacklog = 0.0;
    for (const auto& n : v) {
      if (!usable(n)) continue;
      const double b = nodeState_.at(n).queue.backlog_mi(kernel_.now());
      if (!best || b < bestBacklog) {
        best = &n;
        bestBacklog = b;
      }
    }
    return best ? *best : v.front();
  }

  void drop(std::uint64_t tuple) {
    TupleRecord& r = res_.tuples[tuple];
    if (r.status != TupleStatus::InFlight) return;
    r.status = TupleStatus::Dropped;
    tupleRt_.erase(tuple);
  }

  void send(AppRt& a, const ModuleId& m, std::uint64_t tuple, const NodeId& from, double sizeKb, bool asTask) {
    const NodeId to = pick_instance(a, m);
    Path path;
    try {
      path = topo_.route(from, to);
    } catch (const Error&) {
      return drop(tuple);
    }
    double t = kernel_.now() + transfer_time(sizeKb, path);
    t = std::max(t, a.readyAt[m]);
    res_.tuples[tuple].baseLatencyMs += path.baseLatencyMs;
    const std::uint64_t id = nextTransfer_++;
    transfers_[id] = {from, sizeKb, asTask};
    kernel_.schedule(t, EventKind::TransferComplete,
                     {.node = to, .app = a.spec->id, .module = m, .tuple = tuple, .token = id, .value = sizeKb});
  }

  void on_transfer(const SimEvent& e) {
    if (e.payload.detail == "model") {
      res_.modelArrivalTimes.push_back(kernel_.now());
      return;
    }
    auto tit = transfers_.find(e.payload.token);
    if (tit == transfers_.end()) return;
    const TransferInfo info = tit->second;
    transfers_.erase(tit);

    const std::uint64_t tuple = e.payload.tuple;
    if (res_.tuples[tuple].status != TupleStatus::InFlight) return;
    AppRt& a = apps_.at(e.payload.app);
    const ModuleId& m = e.payload.module;
    const NodeId& node = e.payload.node;

    if (!usable(node)) {
      if (a.dead.count(m)) return drop(tuple);
      if (!nodeState_.at(node).rt.up && is_instance(a, m, node)) {
        stranded_[node].push_back({a.spec->id, m, tuple, info.from, info.sizeKb, info.asTask});
        return;
      }
      return send(a, m, tuple, info.from, info.sizeKb, info.asTask);
    }
    if (!is_instance(a, m, node)) return send(a, m, tuple, node, info.sizeKb, info.asTask);

    if (!info.asTask) {
      const int n = ++tupleRt_[tuple].arrived[m];
      if (n < a.inDegree[m]) return;
    }
    const ModuleSpec& spec = *a.spec->module(m);
    Task t;
    t.taskId = nextTask_++;
    t.tupleId = tuple;
    t.appId = a.spec->id;
    t.moduleId = m;
    t.remainingMI = spec.taskLengthMI;
    t.originalMI = spec.taskLengthMI;
    t.absoluteDeadlineS = res_.tuples[tuple].deadlineAtS;
    t.priorityClass = a.spec->qos.priorityClass;
    t.arrivedAtS = kernel_.now();
    taskInfo_[t.taskId] = {node, kernel_.now(), 0.0, info.from, info.sizeKb};
    submit(node, std::move(t));
  }

  // ------------------------------------------------------ node queues

  void accrue(const NodeId& n) {
    NodeState& st = nodeState_.at(n);
    const double now = kernel_.now();
    if (st.rt.up && !st.retired) accrue_energy(topo_.node(n), st.rt, now - st.rt.lastAccrualS);
    st.rt.lastAccrualS = now;
  }

  void submit(const NodeId& n, Task t) {
    NodeState& st = nodeState_.at(n);
    accrue(n);
    const PreemptDecision d = st.queue.preempt_if_needed(t, kernel_.now());
    st.queue.enqueue(std::move(t));
    if (d.kind == PreemptDecision::Kind::Preempt) {
      st.queue.preempt(d.victim, kernel_.now());
      tokens_.erase(d.victim);
      res_.preemptions++;
    }
    dispatch(n);
  }

  void dispatch(const NodeId& n) {
    NodeState& st = nodeState_.at(n);
    const double now = kernel_.now();
    while (auto t = st.queue.dispatch(now)) {
      const std::uint64_t token = nextToken_++;
      tokens_[t->taskId] = token;
      TaskInfo& ti = taskInfo_[t->taskId];
      if (t->preemptCount == 0) ti.startS = now;
      kernel_.schedule(now, EventKind::TaskStarted,
                       {.node = n, .app = t->appId, .module = t->moduleId, .tuple = t->tupleId, .task = t->taskId});
      const double mips = topo_.node(n).mipsPerCore;
      kernel_.schedule(now + t->remainingMI / mips, EventKind::TaskCompleted,
                       {.node = n, .app = t->appId, .module = t->moduleId, .tuple = t->tupleId, .task = t->taskId,
                        .token = token});
    }
    st.rt.busyCores = st.queue.busy_cores();
  }

  void on_task_completed(const SimEvent& e) {
    auto tk = tokens_.find(e.payload.task);
    if (tk == tokens_.end() || tk->second != e.payload.token) return;
    tokens_.erase(tk);
    const NodeId& n = e.payload.node;
    NodeState& st = nodeState_.at(n);
    const double now = kernel_.now();
    accrue(n);
    const Task t = st.queue.complete(e.payload.task, now);
    const TaskInfo ti = taskInfo_.at(t.taskId);
    taskInfo_.erase(t.taskId);
    dispatch(n);

    const NodeSpec& host = topo_.node(n);
    if (t.preemptCount == 0 && now > ti.startS)
      profiles_.update({t.appId + "/" + t.moduleId, host.profile_type()}, now - ti.startS);

    TupleRecord& r = res_.tuples[t.tupleId];
    if (r.status != TupleStatus::InFlight) return;
    r.hops.push_back({n, t.moduleId, ti.arriveS, now});
    AppRt& a = apps_.at(t.appId);
    if (auto it = a.out.find(t.moduleId); it != a.out.end()) {
      for (const AppEdge* edge : it->second) send(a, edge->dst, t.tupleId, n, edge->tupleSizeKb, false);
      return;
    }
    TupleRt& trt = tupleRt_[t.tupleId];
    if (--trt.pendingSinks == 0) {
      r.status = TupleStatus::Completed;
      r.completeTimeS = now;
      tupleRt_.erase(t.tupleId);
    }
  }

  // ------------------------------------------------------ failures

  void on_node_failed(const SimEvent& e) {
    const NodeId& n = e.payload.node;
    auto it = nodeState_.find(n);
    if (it == nodeState_.end() || !it->second.rt.up) return;
    NodeState& st = it->second;
    accrue(n);
    st.rt.up = false;
    residual_.set_up(n, false);
    for (const Task& t : st.queue.drain()) {
      tokens_.erase(t.taskId);
      const TaskInfo ti = taskInfo_[t.taskId];
      taskInfo_.erase(t.taskId);
      stranded_[n].push_back({t.appId, t.moduleId, t.tupleId, ti.from, ti.sizeKb, true});
    }
    st.rt.busyCores = 0;

    FailureEventRecord rec;
    rec.nodeId = n;
    rec.failedAtS = kernel_.now();
    rec.detectedAtS = kernel_.now() + sc_.config.detectionS;
    for (const auto& [appId, p] : placements_)
      for (const auto& [mid, host] : p.assignment)
        if (host == n && apps_.at(appId).active) rec.affectedModules.emplace_back(appId, mid);
    openFailures_[n] = res_.failures.size();
    res_.failures.push_back(rec);
    kernel_.schedule(rec.detectedAtS, EventKind::MonitorTick, {.node = n, .detail = "detect"});
  }

  void resend_stranded(const NodeId& n) {
    auto list = std::move(stranded_[n]);
    stranded_.erase(n);
    for (const auto& s : list) {
      if (res_.tuples[s.tuple].status != TupleStatus::InFlight) continue;
      AppRt& a = apps_.at(s.app);
      if (!a.active || a.dead.count(s.module)) {
        drop(s.tuple);
        continue;
      }
      send(a, s.module, s.tuple, s.from, s.sizeKb, s.asTask);
    }
  }

  void on_detect(const SimEvent& e) {
    const NodeId& n = e.payload.node;
    if (nodeState_.at(n).rt.up) return resend_stranded(n);

    std::vector<AppSpec> active;
    std::map<AppId, Placement> current;
    for (const auto& [id, a] : apps_)
      if (a.active) {
        active.push_back(*a.spec);
        current[id] = placements_.at(id);
      }
    PlacementContext ctx;
    ctx.topology = &topo_;
    ctx.catalogue = &catalogue_;
    ctx.profiles = &profiles_;
    ctx.residual = &residual_;
    ctx.norm = sc_.config.norm;
    ctx.imageAmortizationS = sc_.config.imageAmortizationS;
    ctx.enforceDeadline = false;  // recovery takes any feasible host
    for (const auto& [id, st] : nodeState_)
      if (st.retired) ctx.excluded.insert(id);

    FailureEventRecord rec = res_.failures[openFailures_.at(n)];
    const auto actions = handle_failure(rec, active, current, sc_.config.weights.normalized(), ctx);
    const double now = kernel_.now();
    for (const auto& act : actions) {
      AppRt& a = apps_.at(act.appId);
      Placement& p = placements_.at(act.appId);
      const ModuleSpec& m = *a.spec->module(act.moduleId);
      switch (act.kind) {
        case RecoveryAction::Kind::FailoverToReplica: {
          p.assignment[act.moduleId] = act.toNode;
          auto& reps = p.replicas[act.moduleId];
          reps.erase(std::remove(reps.begin(), reps.end(), act.toNode), reps.end());
          double promotion = 0.0;
          try {
            promotion = transfer_time(m.stateSizeKb, topo_.route(n, act.toNode));
          } catch (const Error&) {
          }
          a.readyAt[act.moduleId] = std::max(a.readyAt[act.moduleId], now + promotion);
          res_.failovers++;
          break;
        }
        case RecoveryAction::Kind::Replace: {
          p.assignment[act.moduleId] = act.toNode;
          residual_.reserve(act.toNode, m.ramMB);
          double ready = now;
          if (!m.imageId.empty()) {
            ready += image_transfer_cost(catalogue_, m.imageId, act.toNode, topo_);
            if (catalogue_.find(CatalogueKind::Image, m.imageId)) catalogue_.mark_cached(m.imageId, act.toNode);
          }
          a.readyAt[act.moduleId] = std::max(a.readyAt[act.moduleId], ready);
          res_.replacements++;
          break;
        }
        case RecoveryAction::Kind::DropTuples:
          a.dead[act.moduleId] = n;
          break;
      }
      res_.recoveries.push_back({now, act});
    }
    for (auto& [id, p] : placements_)
      for (auto& [mid, reps] : p.replicas) reps.erase(std::remove(reps.begin(), reps.end(), n), reps.end());
    resend_stranded(n);
  }

  void on_node_recovered(const SimEvent& e) {
    const NodeId& n = e.payload.node;
    auto it = nodeState_.find(n);
    if (it == nodeState_.end() || it->second.rt.up) return;
    accrue(n);
    it->second.rt.up = true;
    residual_.set_up(n, true);
    if (auto f = openFailures_.find(n); f != openFailures_.end()) {
      res_.failures[f->second].recoveredAtS = kernel_.now();
      openFailures_.erase(f);
    }
    for (auto& [id, a] : apps_)
      for (auto d = a.dead.begin(); d != a.dead.end();) d = d->second == n ? a.dead.erase(d) : std::next(d);
  }

  // ------------------------------------------------------ mobility

  void on_user_moved(const SimEvent& e) {
    UserRt& u = users_.at(e.payload.user);
    const TrajectorySpec& traj = u.spec->trajectory;
    const double now = kernel_.now();
    const auto& mob = sc_.config.mobility;
    Point pos;
    Point predicted;
    if (traj.mode == TrajectorySpec::Mode::Known) {
      pos = position_at(traj, now);
      predicted = position_at(traj, now + mob.horizonS);
    } else {
      for (const auto& w : traj.points)
        if (w.timeS == now) pos = w.pos;
      u.window.push_back({now, pos});
      while (u.window.size() > traj.window) u.window.pop_front();
      predicted = predict_position({u.window.begin(), u.window.end()}, mob.horizonS);
    }
    if (const NodeSpec* g = nearest_gateway(topo_, pos); g && g->id != u.serving) {
      u.serving = g->id;
      res_.handovers++;
    }

    for (auto& [appId, a] : apps_) {
      if (a.spec->userId != u.spec->id || !a.active || a.migrating) continue;
      const PlacementContext ctx = make_ctx(a);
      const MigrationDecision d = migration_decision(u.spec->id, predicted, *a.spec, placements_.at(appId), ctx, mob);
      if (d.kind != MigrationDecision::Kind::Migrate) continue;
      const MigrationPlan& plan = *d.plan;

      double mips = 0.0, ram = 0.0;
      for (const auto& mid : plan.affectedModules) {
        mips += a.spec->module(mid)->taskLengthMI * a.rateHz;
        ram += a.spec->module(mid)->ramMB;
      }
      const std::string& toCluster = topo_.node(plan.toNode).clusterId;
      const std::string& fromCluster = topo_.node(plan.fromNode).clusterId;
      if (!toCluster.empty() && toCluster != fromCluster && admission_.cluster(toCluster) && mips > 0) {
        const AdmissionDecision ad = admission_.admit({mips, LatencyClass::Sensitive}, toCluster);
        if (ad.kind != AdmissionDecision::Kind::Accepted) {
          if (ad.kind == AdmissionDecision::Kind::DelegatedPeer) admission_.release(ad.clusterId, mips);
          continue;
        }
      }
      residual_.reserve(plan.toNode, ram);
      a.migrating = true;
      const std::uint64_t id = nextMigration_++;
      migrations_[id] = {now, 0.0, plan};
      kernel_.schedule(now + plan.stateTransferS, EventKind::MigrationComplete,
                       {.node = plan.toNode, .app = appId, .user = u.spec->id, .detail = plan.fromNode, .token = id});
    }
  }

  void on_migration_complete(const SimEvent& e) {
    auto it = migrations_.find(e.payload.token);
    if (it == migrations_.end()) return;
    MigrationRecord rec = std::move(it->second);
    migrations_.erase(it);
    rec.completeS = kernel_.now();
    AppRt& a = apps_.at(e.payload.app);
    a.migrating = false;
    const MigrationPlan& plan = rec.plan;
    if (!a.active) {
      double ram = 0.0;
      for (const auto& mid : plan.affectedModules) ram += a.spec->module(mid)->ramMB;
      residual_.release(plan.toNode, ram);
      return;
    }
    Placement& p = placements_.at(a.spec->id);
    const std::string& toCluster = topo_.node(plan.toNode).clusterId;
    for (const auto& mid : plan.affectedModules) {
      p.assignment[mid] = plan.toNode;
      residual_.release(plan.fromNode, a.spec->module(mid)->ramMB);
      if (auto rc = a.reservedCluster.find(mid); rc != a.reservedCluster.end() && rc->second != toCluster) {
        admission_.release(rc->second, a.reservedMips[mid]);
        if (!toCluster.empty() && admission_.cluster(toCluster)) rc->second = toCluster;
        else {
          a.reservedCluster.erase(rc);
          a.reservedMips.erase(mid);
        }
      } else if (rc == a.reservedCluster.end() && !toCluster.empty() && admission_.cluster(toCluster)) {
        a.reservedCluster[mid] = toCluster;
        a.reservedMips[mid] = a.spec->module(mid)->taskLengthMI * a.rateHz;
      }
    }
    res_.migrations++;
    res_.migrationLog.push_back(std::move(rec));
  }

  // ------------------------------------------------------ monitor tick

  void on_tick(const SimEvent& e) {
    const double now = kernel_.now();
    for (auto& [id, st] : nodeState_) {
      if (!st.rt.up || st.retired) continue;
      st.rt.record_utilization(static_cast<double>(st.queue.busy_cores()) / st.queue.cores());
    }
    for (auto& [id, a] : apps_)
      if (a.status == "suspended") {
        std::string why;
        if (try_place(a, why)) {
          a.status = "placed";
          a.active = true;
          a.generation++;
          schedule_emission(a, now);
        }
      }
    for (auto& [id, c] : clusters_)
      if (c.decl->scaling) autoscale(c);
    schedule_tick(e.payload.task + 1);
  }

  void autoscale(ClusterRt& c) {
    const ScalingPolicy& pol = *c.decl->scaling;
    const double now = kernel_.now();
    QueueStats stats;
    std::vector<NodeId> members = c.base;
    members.insert(members.end(), c.scaled.begin(), c.scaled.end());
    for (const auto& n : members) {
      if (!usable(n)) continue;
      const NodeSpec& spec = topo_.node(n);
      stats.capacityMIPS += spec.cores * spec.mipsPerCore;
      stats.backlogMI += nodeState_.at(n).queue.backlog_mi(now);
    }
    if (!(stats.capacityMIPS > 0)) return;
    if (stats.backlogMI == 0.0) {
      if (!c.idleSince) c.idleSince = now;
    } else {
      c.idleSince.reset();
    }
    stats.idleSinceS = c.idleSince;
    stats.instances = static_cast<int>(members.size());
    stats.minInstances = static_cast<int>(c.base.size());
    for (const auto& n : c.scaled)
      if (nodeState_.at(n).queue.backlog_mi(now) == 0.0) stats.idleInstanceIds.push_back(n);

    const ScalingDecision d = autoscale_check(stats, pol.thresholdS, pol.cooldownS, c.lastActionS, now);
    if (d.kind == ScalingDecision::Kind::ScaleUp) {
      c.lastActionS = now;
      if (static_cast<int>(c.scaled.size()) + c.pending >= pol.maxExtraInstances) return;
      const ProviderSpec* prov = provider(pol.providerId);
      try {
        Agreement a = negotiate(*prov, pol.offerId, pol.budgetPerHour, sc_.config.negotiationRounds, now);
        const double util = std::min(1.0, stats.backlogMI / stats.capacityMIPS / std::max(pol.thresholdS, 1e-9));
        a.availableAtS = now + provisioning_delay(*prov, 1, util);
        const NodeId id = fmt::format("{}-scale-{}", c.decl->id, ++c.created);
        PendingNode pn{node_from_offer(*prov->offer(pol.offerId), *prov, c.decl->id, id, pol.attachTo, pol.trustLevel,
                                       a.agreedPricePerHour),
                       pol.attachTo, pol.linkLatencyMs, pol.linkBandwidthMbps, true, res_.agreements.size()};
        res_.agreements.push_back({a, id, a.availableAtS, duration_});
        pending_[id] = std::move(pn);
        c.pending++;
        res_.scaleUps++;
        if (a.availableAtS <= duration_)
          kernel_.schedule(a.availableAtS, EventKind::ProvisionComplete, {.node = id, .detail = c.decl->id});
      } catch (const Error& e) {
        res_.provisioningErrors.push_back(fmt::format("scale-up {} at {:.3f}: {}", c.decl->id, now, e.what()));
      }
    } else if (d.kind == ScalingDecision::Kind::ScaleDown) {
      c.lastActionS = now;
      for (const auto& n : d.instanceIds) retire(c, n);
    }
  }

  void retire(ClusterRt& c, const NodeId& n) {
    accrue(n);
    NodeState& st = nodeState_.at(n);
    st.retired = true;
    st.retiredS = kernel_.now();
    c.scaled.erase(std::remove(c.scaled.begin(), c.scaled.end(), n), c.scaled.end());
    for (auto& [id, a] : apps_)
      for (auto& [mid, nodes] : a.extra) {
        if (std::find(nodes.begin(), nodes.end(), n) == nodes.end()) continue;
        nodes.erase(std::remove(nodes.begin(), nodes.end(), n), nodes.end());
        residual_.release(n, a.spec->module(mid)->ramMB);
      }
    for (auto& b : res_.agreements)
      if (b.nodeId == n) b.endS = kernel_.now();
    if (admission_.cluster(c.decl->id)) {
      // Capacity leaves the cluster with the node.
      ClusterState* cs = admission_.cluster(c.decl->id);
      const NodeSpec& spec = topo_.node(n);
      cs->totalMips -= spec.cores * spec.mipsPerCore;
      cs->memberNodes.erase(std::remove(cs->memberNodes.begin(), cs->memberNodes.end(), n), cs->memberNodes.end());
    }
    res_.scaleDowns++;
  }

  // ------------------------------------------------------ model updates

  void on_model_updated(const SimEvent& e) {
    res_.modelUpdateTimes.push_back(kernel_.now());
    auto it = apps_.find(e.payload.app);
    if (it == apps_.end() || !it->second.active) return;
    const NodeId to = pick_instance(it->second, e.payload.module);
    try {
      const Path path = topo_.route(sc_.config.modelUpdate.fromNode, to);
      kernel_.schedule(kernel_.now() + transfer_time(e.payload.value, path), EventKind::TransferComplete,
                       {.node = to, .app = e.payload.app, .module = e.payload.module, .detail = "model",
                        .value = e.payload.value});
    } catch (const Error&) {
    }
  }

  // ------------------------------------------------------ dispatch

  void handle(const SimEvent& e) {
    switch (e.kind) {
      case EventKind::TupleEmitted: return on_emit(e);
      case EventKind::TransferComplete: return on_transfer(e);
      case EventKind::TaskStarted: return;
      case EventKind::TaskCompleted: return on_task_completed(e);
      case EventKind::NodeFailed: return on_node_failed(e);
      case EventKind::NodeRecovered: return on_node_recovered(e);
      case EventKind::UserMoved: return on_user_moved(e);
      case EventKind::ProvisionComplete: return on_provision_complete(e);
      case EventKind::MigrationComplete: return on_migration_complete(e);
      case EventKind::ModelUpdated: return on_model_updated(e);
      case EventKind::MonitorTick:
        if (e.payload.detail == "detect") return on_detect(e);
        if (e.payload.detail == "start") {
          AppRt& a = apps_.at(e.payload.app);
          if (a.status == "pending") start_app(a);
          return;
        }
        return on_tick(e);
    }
  }

  // ------------------------------------------------------ results

  void finish() {
    for (auto& [id, st] : nodeState_) {
      accrue(id);
      NodeMetrics nm;
      nm.id = id;
      nm.energyJ = st.rt.accruedEnergyJ;
      const double end = st.retired ? st.retiredS : duration_;
      const double span = (end - st.createdS) * st.queue.cores();
      nm.utilization = span > 0 ? std::clamp(st.rt.busyCoreSeconds / span, 0.0, 1.0) : 0.0;
      res_.nodes[id] = nm;
      res_.totalEnergyJ += nm.energyJ;
    }
    for (const auto& b : res_.agreements) res_.totalCost += b.cost();
    for (const auto& [id, c] : admission_.clusters()) {
      res_.peakReservedMips[id] = admission_.peak_reserved(id);
      res_.clusterCapMips[id] = c.capacity();
    }
    for (auto& [id, a] : apps_) {
      AppMetrics& m = res_.apps[id];
      m.id = id;
      m.status = a.status;
      m.delegations = a.delegations;
    }
    for (const auto& [id, p] : placements_) res_.placements[id] = p;

    std::map<AppId, std::vector<const TupleRecord*>> byApp;
    for (const auto& t : res_.tuples) byApp[t.appId].push_back(&t);
    res_.global.id = "all";
    res_.global.status = "-";
    res_.global.workload = "-";
    std::size_t globalMisses = 0, globalResolved = 0;
    for (auto& [id, m] : res_.apps) {
      std::size_t misses = 0;
      std::vector<WorkloadSample> samples;
      const AppRt& a = apps_.at(id);
      const std::vector<const TupleRecord*>& ts = byApp[id];
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const TupleRecord& t = *ts[i];
        m.emitted++;
        switch (t.status) {
          case TupleStatus::Completed:
            m.completed++;
            m.latenciesMs.push_back((*t.completeTimeS - t.emitTimeS) * 1000.0);
            if (*t.completeTimeS > t.deadlineAtS) misses++;
            break;
          case TupleStatus::Dropped: m.dropped++, misses++; break;
          case TupleStatus::Preempted: m.preempted++, misses++; break;
          case TupleStatus::InFlight: m.inFlight++; break;
        }
        if (i > 0) samples.push_back({t.sizeKb, t.emitTimeS - ts[i - 1]->emitTimeS, a.tupleMI});
      }
      summarise(m, misses);
      m.workload = "-";
      if (samples.size() >= 2) m.workload = to_string(categorize_workload(samples, sc_.config.workload).category);

      res_.global.emitted += m.emitted;
      res_.global.completed += m.completed;
      res_.global.dropped += m.dropped;
      res_.global.preempted += m.preempted;
      res_.global.inFlight += m.inFlight;
      res_.global.latenciesMs.insert(res_.global.latenciesMs.end(), m.latenciesMs.begin(), m.latenciesMs.end());
      globalMisses += misses;
      globalResolved += m.completed + m.dropped + m.preempted;
    }
    (void)globalResolved;
    summarise(res_.global, globalMisses);
    res_.global.delegations = res_.delegations;
  }

  static void summarise(AppMetrics& m, std::size_t misses) {
    if (!m.latenciesMs.empty()) {
      double sum = 0.0;
      for (double v : m.latenciesMs) sum += v;
      m.meanMs = sum / m.latenciesMs.size();
    }
    m.p50Ms = percentile(m.latenciesMs, 50);
    m.p95Ms = percentile(m.latenciesMs, 95);
    m.p99Ms = percentile(m.latenciesMs, 99);
    const std::size_t resolved = m.completed + m.dropped + m.preempted;
    m.deadlineMissRate = resolved ? static_cast<double>(misses) / resolved : 0.0;
  }

  const Scenario& sc_;
  std::uint64_t seed_;
  double duration_;
  SimResult res_;
  Kernel kernel_;

  std::vector<NodeSpec> nodes_;
  std::vector<LinkSpec> links_;
  Topology topo_;
  ResidualCapacity residual_;
  Catalogue catalogue_;
  ProfileStore profiles_;
  AdmissionController admission_;

  std::map<NodeId, NodeState> nodeState_;
  std::map<std::string, ClusterRt> clusters_;
  std::map<NodeId, PendingNode> pending_;
  std::map<AppId, AppRt> apps_;
  std::map<AppId, Placement> placements_;
  std::map<std::string, UserRt> users_;

  std::map<std::uint64_t, TupleRt> tupleRt_;
  std::map<std::uint64_t, TransferInfo> transfers_;
  std::map<TaskId, TaskInfo> taskInfo_;
  std::map<TaskId, std::uint64_t> tokens_;
  std::map<NodeId, std::vector<Stranded>> stranded_;
  std::map<NodeId, std::size_t> openFailures_;
  std::map<std::uint64_t, MigrationRecord> migrations_;

  std::uint64_t nextTransfer_ = 1;
  std::uint64_t nextTask_ = 1;
  std::uint64_t nextToken_ = 1;
  std::uint64_t nextMigration_ = 1;
  int provisionSeq_ = 0;
};

std::string fixed(double v) { return fmt::format("{:.6f}", v); }

}  // namespace

SimResult run_scenario(const Scenario& scenario, const RunOverrides& overrides) {
  if (overrides.untilS && !(*overrides.untilS > 0))
    throw Error(ErrorKind::InvalidArgument, "--until must be > 0");
  Engine engine(scenario, overrides);
  return engine.run();
}

std::string metrics_csv(const SimResult& r) {
  std::string out =
      "scope,id,status,emitted,completed,dropped,preempted,in_flight,latency_mean_ms,latency_p50_ms,latency_p95_ms,"
      "latency_p99_ms,deadline_miss_rate,workload,energy_j,utilization,cost,migrations,failovers,preemptions,"
      "suspensions,delegations\n";
  auto tuple_cols = [](const AppMetrics& m) {
    return fmt::format("{},{},{},{},{},{},{},{},{},{},{}", m.emitted, m.completed, m.dropped, m.preempted, m.inFlight,
                       fixed(m.meanMs), fixed(m.p50Ms), fixed(m.p95Ms), fixed(m.p99Ms), fixed(m.deadlineMissRate),
                       m.workload);
  };
  for (const auto& [id, m] : r.apps)
    out += fmt::format("app,{},{},{},,,,,,,,{}\n", id, m.status, tuple_cols(m), m.delegations);
  for (const auto& [id, n] : r.nodes)
    out += fmt::format("node,{},-,,,,,,,,,,,-,{},{},,,,,,\n", id, fixed(n.energyJ), fixed(n.utilization));
  out += fmt::format("global,all,-,{},{},,{},{},{},{},{},{}\n", tuple_cols(r.global), fixed(r.totalEnergyJ),
                     fixed(r.totalCost), r.migrations, r.failovers, r.preemptions, r.suspensions, r.delegations);
  return out;
}

std::string tuples_csv(const SimResult& r) {
  std::string out = "tuple_id,app,src_module,dst_module,size_kb,emit_s,complete_s,deadline_s,status,path\n";
  for (const auto& t : r.tuples) {
    std::string path;
    for (const auto& h : t.hops) path += (path.empty() ? "" : ";") + h.node + ":" + h.module;
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", t.tupleId, t.appId, t.srcModule, t.dstModule,
                       fixed(t.sizeKb), fixed(t.emitTimeS), t.completeTimeS ? fixed(*t.completeTimeS) : "",
                       fixed(t.deadlineAtS), to_string(t.status), path);
  }
  return out;
}

void emit_metrics(const SimResult& r, const std::filesystem::path& outDir) {
  std::error_code ec;
  std::filesystem::create_directories(outDir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + outDir.string() + ": " + ec.message());
  auto write = [&](const char* name, const std::string& body) {
    std::ofstream f(outDir / name, std::ios::binary);
    if (!f) throw Error(ErrorKind::IoError, "cannot write " + (outDir / name).string());
    f << body;
    if (!f) throw Error(ErrorKind::IoError, "write failed for " + (outDir / name).string());
  };
  write("metrics.csv", metrics_csv(r));
  write("tuples.csv", tuples_csv(r));
  write("trace.log", r.trace);
}

}  // namespace edgeward
