#include "edgeward/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "edgeward/error.hpp"

namespace edgeward {

using nlohmann::json;

namespace {

// Reads one JSON object, recording type problems and unknown keys against a
// dotted location instead of stopping at the first one.
class Obj {
 public:
  Obj(const json& j, std::string where, std::vector<std::string>& errs) : j_(j), where_(std::move(where)), errs_(errs) {
    if (!j_.is_object()) err("", "expected an object");
  }
  Obj(const Obj&) = delete;
  ~Obj() {
    if (!j_.is_object()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) err(it.key(), "unknown key");
  }

  const std::string& where() const { return where_; }
  std::string at(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }
  void err(const std::string& key, const std::string& msg) const { errs_.push_back(at(key) + ": " + msg); }

  const json* raw(const std::string& key, bool required = false) {
    used_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) {
      if (required) err(key, "missing required field");
      return nullptr;
    }
    return &j_.at(key);
  }

  void num(const std::string& key, double& out, bool required = false) {
    if (const json* v = raw(key, required)) {
      if (v->is_number()) out = v->get<double>();
      else err(key, "expected a number");
    }
  }
  void num(const std::string& key, std::optional<double>& out) {
    if (const json* v = raw(key)) {
      if (v->is_number()) out = v->get<double>();
      else err(key, "expected a number");
    }
  }
  template <class I>
  void integer(const std::string& key, I& out, bool required = false) {
    if (const json* v = raw(key, required)) {
      if (v->is_number_integer()) out = v->get<I>();
      else err(key, "expected an integer");
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const json* v = raw(key)) {
      if (v->is_boolean()) out = v->get<bool>();
      else err(key, "expected true or false");
    }
  }
  void str(const std::string& key, std::string& out, bool required = false) {
    if (const json* v = raw(key, required)) {
      if (v->is_string()) out = v->get<std::string>();
      else err(key, "expected a string");
    }
  }
  void strings(const std::string& key, std::vector<std::string>& out) {
    if (const json* v = raw(key)) {
      if (!v->is_array()) return err(key, "expected an array of strings");
      for (const auto& e : *v) {
        if (e.is_string()) out.push_back(e.get<std::string>());
        else err(key, "expected an array of strings");
      }
    }
  }
  template <class E, class ParseFn>
  void enumeration(const std::string& key, E& out, ParseFn parse, const char* allowed) {
    std::string s;
    if (const json* v = raw(key)) {
      if (!v->is_string()) return err(key, fmt::format("expected one of {}", allowed));
      s = v->get<std::string>();
      if (auto e = parse(s)) out = *e;
      else err(key, fmt::format("'{}' is not one of {}", s, allowed));
    }
  }
  template <class Fn>
  void array(const std::string& key, Fn fn) {
    if (const json* v = raw(key)) {
      if (!v->is_array()) return err(key, "expected an array");
      for (std::size_t i = 0; i < v->size(); ++i) fn((*v)[i], fmt::format("{}[{}]", at(key), i));
    }
  }
  template <class Fn>
  void object(const std::string& key, Fn fn) {
    if (const json* v = raw(key)) {
      Obj o(*v, at(key), errs_);
      fn(o);
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::vector<std::string>& errs_;
  std::set<std::string> used_;
};

void read_point(Obj& o, const std::string& key, Point& p) {
  if (const json* v = o.raw(key)) {
    if (v->is_array() && v->size() == 2 && (*v)[0].is_number() && (*v)[1].is_number())
      p = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    else
      o.err(key, "expected [x, y]");
  }
}

NodeSpec read_node(const json& j, const std::string& where, std::vector<std::string>& errs) {
  Obj o(j, where, errs);
  NodeSpec n;
  o.str("id", n.id, true);
  o.enumeration("tier", n.tier, parse_tier, "IoTDevice, Gateway, EdgeNode, CloudDC");
  o.integer("cores", n.cores);
  o.num("mipsPerCore", n.mipsPerCore);
  o.num("ramMB", n.ramMB);
  o.num("storageGB", n.storageGB);
  o.num("powerIdleW", n.powerIdleW);
  o.num("powerMaxW", n.powerMaxW);
  o.integer("trustLevel", n.trustLevel);
  o.str("cluster", n.clusterId);
  o.str("provider", n.providerId);
  o.num("mtbfS", n.mtbfS);
  o.num("mttrS", n.mttrS);
  read_point(o, "position", n.position);
  o.num("pricePerHour", n.pricePerHour);
  o.str("type", n.typeId);
  return n;
}

LinkSpec read_link(const json& j, const std::string& where, std::vector<std::string>& errs) {
  Obj o(j, where, errs);
  LinkSpec l;
  o.str("a", l.a, true);
  o.str("b", l.b, true);
  o.num("latencyMs", l.latencyMs, true);
  o.num("bandwidthMbps", l.bandwidthMbps, true);
  return l;
}

void read_app(const json& j, const std::string& where, std::vector<std::string>& errs, Scenario& s) {
  Obj o(j, where, errs);
  AppSpec a;
  o.str("id", a.id, true);
  o.enumeration("executionModel", a.executionModel, parse_execution_model, "Stream, Workflow, BagOfTasks, Graph");
  o.str("sourceNode", a.sourceNode, true);
  o.str("user", a.userId);
  o.num("startS", a.startS);
  std::string arrival = "periodic";
  o.str("arrival", arrival);
  if (arrival == "poisson") s.arrivals[a.id] = ArrivalProcess::Poisson;
  else if (arrival != "periodic") o.err("arrival", "expected 'periodic' or 'poisson'");

  o.object("qos", [&](Obj& q) {
    q.num("deadlineMs", a.qos.deadlineMs);
    q.enumeration("priority", a.qos.priorityClass, parse_priority_class, "Emergency, High, Normal");
    q.num("budgetPerHour", a.qos.budgetPerHour);
    q.num("maxEnergyJPerTuple", a.qos.maxEnergyJPerTuple);
  });
  o.object("calibration", [&](Obj& c) {
    CalibrationRequest r;
    c.num("requiredAccuracy", r.requiredAccuracy);
    c.num("freshnessMs", r.freshnessMs);
    a.calibration = r;
  });
  o.array("modules", [&](const json& mj, const std::string& w) {
    Obj m(mj, w, errs);
    ModuleSpec ms;
    m.str("id", ms.id, true);
    m.num("taskLengthMI", ms.taskLengthMI, true);
    m.num("ramMB", ms.ramMB);
    m.integer("privacyLevel", ms.privacyLevel);
    m.boolean("critical", ms.critical);
    m.enumeration("latencyClass", ms.latencyClass, parse_latency_class, "Sensitive, Tolerant");
    m.str("image", ms.imageId);
    m.num("stateSizeKb", ms.stateSizeKb);
    m.str("dataset", ms.datasetId);
    a.modules.push_back(std::move(ms));
  });
  o.array("edges", [&](const json& ej, const std::string& w) {
    Obj e(ej, w, errs);
    AppEdge ed;
    e.str("src", ed.src, true);
    e.str("dst", ed.dst, true);
    e.num("tupleSizeKb", ed.tupleSizeKb);
    e.num("emitRateHz", ed.emitRateHz);
    a.edges.push_back(std::move(ed));
  });
  s.apps.push_back(std::move(a));
}

UserSpec read_user(const json& j, const std::string& where, std::vector<std::string>& errs) {
  Obj o(j, where, errs);
  UserSpec u;
  o.str("id", u.id, true);
  o.strings("devices", u.attachedDeviceIds);
  o.str("servingGateway", u.servingGatewayId);
  o.object("trajectory", [&](Obj& t) {
    std::string mode = "known";
    t.str("mode", mode);
    if (mode == "unknown") u.trajectory.mode = TrajectorySpec::Mode::Unknown;
    else if (mode != "known") t.err("mode", "expected 'known' or 'unknown'");
    t.integer("window", u.trajectory.window);
    if (const json* pts = t.raw("points")) {
      bool ok = pts->is_array();
      if (ok)
        for (const auto& p : *pts) {
          if (!(p.is_array() && p.size() == 3 && p[0].is_number() && p[1].is_number() && p[2].is_number())) {
            ok = false;
            break;
          }
          u.trajectory.points.push_back({p[0].get<double>(), {p[1].get<double>(), p[2].get<double>()}});
        }
      if (!ok) t.err("points", "expected an array of [timeS, x, y]");
    }
  });
  return u;
}

ProviderSpec read_provider(const json& j, const std::string& where, std::vector<std::string>& errs) {
  Obj o(j, where, errs);
  ProviderSpec p;
  o.str("id", p.id, true);
  o.num("baseProvisionDelayS", p.baseProvisionDelayS);
  o.num("perInstanceDelayS", p.perInstanceDelayS);
  o.num("reservePriceFactor", p.reservePriceFactor);
  o.array("offers", [&](const json& oj, const std::string& w) {
    Obj f(oj, w, errs);
    InstanceOffer off;
    f.str("id", off.offerId, true);
    f.integer("cores", off.cores);
    f.num("mipsPerCore", off.mipsPerCore);
    f.num("ramMB", off.ramMB);
    f.num("storageGB", off.storageGB);
    f.num("pricePerHour", off.pricePerHour);
    f.integer("energyClass", off.energyClass);
    p.offers.push_back(off);
  });
  return p;
}

template <class T>
void read_attachment(Obj& o, T& t) {
  o.str("attachTo", t.attachTo);
  o.num("linkLatencyMs", t.linkLatencyMs);
  o.num("linkBandwidthMbps", t.linkBandwidthMbps);
  o.integer("trustLevel", t.trustLevel);
}

ClusterDecl read_cluster(const json& j, const std::string& where, std::vector<std::string>& errs) {
  Obj o(j, where, errs);
  ClusterDecl c;
  o.str("id", c.id, true);
  o.num("utilizationCap", c.utilizationCap);
  o.object("scaling", [&](Obj& sc) {
    ScalingPolicy p;
    sc.num("thresholdS", p.thresholdS);
    sc.num("cooldownS", p.cooldownS);
    sc.str("provider", p.providerId, true);
    sc.str("offer", p.offerId, true);
    sc.num("budgetPerHour", p.budgetPerHour);
    sc.integer("maxExtraInstances", p.maxExtraInstances);
    read_attachment(sc, p);
    c.scaling = p;
  });
  return c;
}

CatalogueEntry read_catalogue(const json& j, const std::string& where, std::vector<std::string>& errs) {
  Obj o(j, where, errs);
  CatalogueEntry e;
  std::string kind;
  double sizeKb = 0.0;
  std::vector<std::string> nodes;
  o.str("id", e.id, true);
  o.str("kind", kind, true);
  o.num("sizeKb", sizeKb);
  o.strings("nodes", nodes);
  if (const json* m = o.raw("metadata")) {
    if (m->is_object()) {
      for (auto it = m->begin(); it != m->end(); ++it)
        e.metadata[it.key()] = it->is_string() ? it->get<std::string>() : it->dump();
    } else {
      o.err("metadata", "expected an object");
    }
  }
  if (kind == "image") e.info = ImageInfo{sizeKb, nodes};
  else if (kind == "data") e.info = DataInfo{sizeKb, nodes};
  else if (!kind.empty()) o.err("kind", "expected 'image' or 'data'");
  return e;
}

DeviceProfile read_device(const json& j, const std::string& where, std::vector<std::string>& errs) {
  Obj o(j, where, errs);
  DeviceProfile d;
  o.str("id", d.deviceId, true);
  o.num("maxRateHz", d.maxRateHz);
  o.num("energyPerSampleMJ", d.energyPerSampleMJ);
  o.num("batteryBudgetMJPerHour", d.batteryBudgetMJPerHour);
  o.num("refRateHz", d.refRateHz);
  return d;
}

ProvisioningRequest read_provisioning(const json& j, const std::string& where, std::vector<std::string>& errs) {
  Obj o(j, where, errs);
  ProvisioningRequest r;
  o.str("cluster", r.clusterId, true);
  o.str("provider", r.providerId, true);
  o.strings("offers", r.offerIds);
  o.num("budgetPerHour", r.budgetPerHour, true);
  o.num("mipsNeeded", r.requirement.mipsNeeded);
  o.num("ramNeeded", r.requirement.ramNeeded);
  o.num("deadlineMs", r.requirement.deadlineMs);
  o.num("projectedMs", r.requirement.projectedMs);
  o.num("mipsPerInstance", r.mipsPerInstance);
  o.integer("maxUnitsPerOffer", r.maxUnitsPerOffer);
  if (const json* h = o.raw("demandHistory")) {
    bool ok = h->is_array();
    if (ok)
      for (const auto& p : *h) {
        if (!(p.is_array() && p.size() == 2 && p[0].is_number() && p[1].is_number())) {
          ok = false;
          break;
        }
        r.demandHistory.push_back({p[0].get<double>(), p[1].get<double>()});
      }
    if (!ok) o.err("demandHistory", "expected an array of [timeS, instancesInUse]");
  }
  read_attachment(o, r);
  return r;
}

void read_config(Obj& o, ScenarioConfig& c) {
  o.object("placement", [&](Obj& p) {
    p.object("weights", [&](Obj& w) {
      w.num("latency", c.weights.wLatency);
      w.num("cost", c.weights.wCost);
      w.num("energy", c.weights.wEnergy);
    });
    p.object("normalization", [&](Obj& n) {
      n.num("latencyMs", c.norm.latencyMs);
      n.num("costPerHour", c.norm.costPerHour);
      n.num("energyJPerHour", c.norm.energyJPerHour);
    });
    p.num("imageAmortizationS", c.imageAmortizationS);
    p.boolean("enforceDeadline", c.enforceDeadline);
    Tier forced = Tier::CloudDC;
    if (p.raw("forceTier")) {
      p.enumeration("forceTier", forced, parse_tier, "IoTDevice, Gateway, EdgeNode, CloudDC");
      c.forceTier = forced;
    }
  });
  o.object("workload", [&](Obj& w) {
    w.num("cvCut", c.workload.cvCut);
    w.num("computeMiPerKb", c.workload.computeMiPerKb);
  });
  o.object("resilience", [&](Obj& r) {
    r.num("monitorPeriodS", c.monitorPeriodS);
    r.num("detectionS", c.detectionS);
    r.boolean("replication", c.replication);
    r.integer("maxReplicaDegree", c.maxReplicaDegree);
  });
  o.object("scheduler", [&](Obj& s) {
    s.enumeration(
        "policy", c.queuePolicy,
        [](std::string_view v) -> std::optional<QueuePolicy> {
          if (v == "PriorityEdf") return QueuePolicy::PriorityEdf;
          if (v == "Fifo") return QueuePolicy::Fifo;
          return std::nullopt;
        },
        "PriorityEdf, Fifo");
    s.boolean("appPreemption", c.appPreemption);
  });
  o.object("mobility", [&](Obj& m) {
    m.num("toleranceMs", c.mobility.toleranceMs);
    m.num("horizonS", c.mobility.horizonS);
    m.num("hysteresisMargin", c.mobility.hysteresisMargin);
  });
  o.object("provisioning", [&](Obj& p) {
    p.integer("negotiationRounds", c.negotiationRounds);
    p.num("forecastAlpha", c.forecastAlpha);
    p.num("forecastLeadS", c.forecastLeadS);
    p.num("costWeight", c.selection.wCost);
    p.num("energyWeight", c.selection.wEnergy);
  });
  o.object("profiles", [&](Obj& p) { p.integer("minSamples", c.profileMinSamples); });
  o.object("modelUpdate", [&](Obj& m) {
    m.num("periodS", c.modelUpdate.periodS);
    m.num("sizeKb", c.modelUpdate.sizeKb);
    m.str("fromNode", c.modelUpdate.fromNode);
    m.str("app", c.modelUpdate.appId);
    m.str("module", c.modelUpdate.moduleId);
  });
}

std::string join_lines(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : "\n") + s;
  return out;
}

}  // namespace

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> errs;
  auto add = [&](const std::string& where, const std::string& msg) { errs.push_back(where + ": " + msg); };

  for (const auto& v : validate_topology(s.nodes, s.links))
    add("topology " + v.subject, fmt::format("{} ({})", v.message, to_string(v.kind)));

  std::map<std::string, const NodeSpec*> nodes;
  for (const auto& n : s.nodes) nodes.emplace(n.id, &n);
  std::set<std::string> clusterIds, userIds, providerIds, appIds;
  for (const auto& c : s.clusters)
    if (!clusterIds.insert(c.id).second) add("cluster " + c.id, "duplicate id");
  for (const auto& u : s.users)
    if (!userIds.insert(u.id).second) add("user " + u.id, "duplicate id");
  std::map<std::string, const ProviderSpec*> providers;
  for (const auto& p : s.providers)
    if (!providers.emplace(p.id, &p).second) add("provider " + p.id, "duplicate id");

  for (const auto& n : s.nodes)
    if (!n.clusterId.empty() && !clusterIds.count(n.clusterId))
      add("node " + n.id, "cluster '" + n.clusterId + "' is not declared");

  Catalogue catalogue;
  for (const auto& e : s.catalogue) {
    try {
      catalogue.register_entry(e);
    } catch (const Error& ex) {
      add("catalogue " + e.id, ex.what());
    }
    const auto& holders = e.kind() == CatalogueKind::Image ? std::get<ImageInfo>(e.info).cachedOnNodes
                                                           : std::get<DataInfo>(e.info).homeNodes;
    for (const auto& h : holders)
      if (!nodes.count(h)) add("catalogue " + e.id, "undefined node '" + h + "'");
  }

  for (const auto& a : s.apps) {
    const std::string where = "app " + a.id;
    if (!appIds.insert(a.id).second) add(where, "duplicate id");
    for (const auto& v : validate_app(a)) add("app " + v.subject, fmt::format("{} ({})", v.message, to_string(v.kind)));
    if (!a.sourceNode.empty() && !nodes.count(a.sourceNode))
      add(where, "sourceNode references undefined node '" + a.sourceNode + "'");
    if (!a.userId.empty() && !userIds.count(a.userId)) add(where, "user '" + a.userId + "' is not declared");
    if (a.startS < 0) add(where, "startS must be >= 0");
    for (const auto& m : a.modules)
      if (!m.datasetId.empty() && !catalogue.find(CatalogueKind::Data, m.datasetId))
        add(where + "/" + m.id, "dataset '" + m.datasetId + "' is not in the catalogue");
    if (a.calibration) {
      bool found = false;
      for (const auto& d : s.devices) found = found || d.deviceId == a.sourceNode;
      if (!found) add(where, "calibration requested but no device profile for '" + a.sourceNode + "'");
    }
  }

  for (const auto& u : s.users) {
    const std::string where = "user " + u.id;
    for (const auto& d : u.attachedDeviceIds)
      if (!nodes.count(d)) add(where, "undefined device '" + d + "'");
    if (!u.servingGatewayId.empty()) {
      auto it = nodes.find(u.servingGatewayId);
      if (it == nodes.end()) add(where, "undefined serving gateway '" + u.servingGatewayId + "'");
      else if (it->second->tier != Tier::Gateway) add(where, "serving gateway '" + u.servingGatewayId + "' is not a Gateway");
    }
    const auto& pts = u.trajectory.points;
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (!(pts[i].timeS > pts[i - 1].timeS)) add(where, "trajectory timestamps must be strictly increasing");
    if (u.trajectory.window < 2) add(where, "trajectory window must be >= 2");
  }

  for (const auto& d : s.devices) {
    if (!nodes.count(d.deviceId)) add("device " + d.deviceId, "undefined node");
    if (!(d.maxRateHz > 0) || !(d.refRateHz > 0)) add("device " + d.deviceId, "rates must be > 0");
  }

  auto check_offer = [&](const std::string& where, const std::string& provider, const std::string& offer) {
    auto it = providers.find(provider);
    if (it == providers.end()) return add(where, "undefined provider '" + provider + "'");
    if (!it->second->offer(offer)) add(where, "provider '" + provider + "' has no offer '" + offer + "'");
  };
  for (const auto& c : s.clusters) {
    if (!(c.utilizationCap > 0 && c.utilizationCap <= 1)) add("cluster " + c.id, "utilizationCap must be in (0, 1]");
    if (c.scaling) {
      check_offer("cluster " + c.id + " scaling", c.scaling->providerId, c.scaling->offerId);
      if (!nodes.count(c.scaling->attachTo)) add("cluster " + c.id + " scaling", "attachTo must name a node");
    }
  }
  for (std::size_t i = 0; i < s.provisioning.size(); ++i) {
    const auto& r = s.provisioning[i];
    const std::string where = fmt::format("provisioning[{}]", i);
    if (!clusterIds.count(r.clusterId)) add(where, "cluster '" + r.clusterId + "' is not declared");
    if (r.offerIds.empty()) add(where, "offers must not be empty");
    for (const auto& o : r.offerIds) check_offer(where, r.providerId, o);
    if (!nodes.count(r.attachTo)) add(where, "attachTo must name a node");
    if (!r.demandHistory.empty() && !(r.mipsPerInstance > 0))
      add(where, "mipsPerInstance must be > 0 when demandHistory is given");
  }
  for (std::size_t i = 0; i < s.failures.size(); ++i) {
    const auto& f = s.failures[i];
    const std::string where = fmt::format("failures[{}]", i);
    if (!nodes.count(f.nodeId)) add(where, "undefined node '" + f.nodeId + "'");
    if (f.atS < 0) add(where, "atS must be >= 0");
    if (f.recoverAtS && !(*f.recoverAtS > f.atS)) add(where, "recoverAtS must be after atS");
  }

  const auto& c = s.config;
  if (!(s.sim.durationS > 0)) add("sim.durationS", "must be > 0");
  if (!(c.monitorPeriodS > 0)) add("config.resilience.monitorPeriodS", "must be > 0");
  if (c.detectionS < 0) add("config.resilience.detectionS", "must be >= 0");
  if (c.negotiationRounds < 1) add("config.provisioning.negotiationRounds", "must be >= 1");
  if (!(c.forecastAlpha > 0 && c.forecastAlpha <= 1)) add("config.provisioning.forecastAlpha", "must be in (0, 1]");
  try {
    (void)c.weights.normalized();
  } catch (const Error& e) {
    add("config.placement.weights", e.what());
  }
  if (c.modelUpdate.periodS > 0) {
    const auto& m = c.modelUpdate;
    if (!nodes.count(m.fromNode)) add("config.modelUpdate.fromNode", "undefined node '" + m.fromNode + "'");
    bool found = false;
    for (const auto& a : s.apps)
      if (a.id == m.appId) found = a.module(m.moduleId) != nullptr;
    if (!found) add("config.modelUpdate", "unknown module '" + m.appId + "/" + m.moduleId + "'");
  }
  return errs;
}

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, origin + ": " + e.what());
  }

  Scenario s;
  std::vector<std::string> errs;
  {
    Obj o(root, "", errs);
    o.str("name", s.name);
    o.object("sim", [&](Obj& sim) {
      sim.num("durationS", s.sim.durationS);
      sim.integer("seed", s.sim.seed);
    });
    o.object("config", [&](Obj& c) { read_config(c, s.config); });
    o.array("nodes", [&](const json& j, const std::string& w) { s.nodes.push_back(read_node(j, w, errs)); });
    o.array("links", [&](const json& j, const std::string& w) { s.links.push_back(read_link(j, w, errs)); });
    o.array("apps", [&](const json& j, const std::string& w) { read_app(j, w, errs, s); });
    o.array("users", [&](const json& j, const std::string& w) { s.users.push_back(read_user(j, w, errs)); });
    o.array("providers", [&](const json& j, const std::string& w) { s.providers.push_back(read_provider(j, w, errs)); });
    o.array("clusters", [&](const json& j, const std::string& w) { s.clusters.push_back(read_cluster(j, w, errs)); });
    o.array("catalogue", [&](const json& j, const std::string& w) { s.catalogue.push_back(read_catalogue(j, w, errs)); });
    o.array("devices", [&](const json& j, const std::string& w) { s.devices.push_back(read_device(j, w, errs)); });
    o.array("provisioning",
            [&](const json& j, const std::string& w) { s.provisioning.push_back(read_provisioning(j, w, errs)); });
    o.array("failures", [&](const json& j, const std::string& w) {
      Obj f(j, w, errs);
      ScheduledFailure sf;
      f.str("node", sf.nodeId, true);
      f.num("atS", sf.atS, true);
      f.num("recoverAtS", sf.recoverAtS);
      s.failures.push_back(sf);
    });
  }
  for (auto& e : validate_scenario(s)) errs.push_back(std::move(e));
  if (!errs.empty()) throw Error(ErrorKind::ValidationError, origin + ":\n" + join_lines(errs));
  return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), path.string());
}

}  // namespace edgeward
