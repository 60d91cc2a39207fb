#include "edgeward/domain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <set>

#include "edgeward/error.hpp"

namespace edgeward {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NoRoute: return "NoRoute";
    case ErrorKind::PastEvent: return "PastEvent";
    case ErrorKind::NodeDown: return "NodeDown";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::EmptyHistory: return "EmptyHistory";
    case ErrorKind::NegotiationFailed: return "NegotiationFailed";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::AllZero: return "AllZero";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::DatasetMissing: return "DatasetMissing";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::IoTDevice: return "IoTDevice";
    case Tier::Gateway: return "Gateway";
    case Tier::EdgeNode: return "EdgeNode";
    case Tier::CloudDC: return "CloudDC";
  }
  return "?";
}

std::string_view to_string(ExecutionModel m) {
  switch (m) {
    case ExecutionModel::Stream: return "Stream";
    case ExecutionModel::Workflow: return "Workflow";
    case ExecutionModel::BagOfTasks: return "BagOfTasks";
    case ExecutionModel::Graph: return "Graph";
  }
  return "?";
}

std::string_view to_string(PriorityClass p) {
  switch (p) {
    case PriorityClass::Emergency: return "Emergency";
    case PriorityClass::High: return "High";
    case PriorityClass::Normal: return "Normal";
  }
  return "?";
}

std::string_view to_string(LatencyClass c) {
  return c == LatencyClass::Sensitive ? "Sensitive" : "Tolerant";
}

std::optional<Tier> parse_tier(std::string_view s) {
  for (Tier t : {Tier::IoTDevice, Tier::Gateway, Tier::EdgeNode, Tier::CloudDC})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

std::optional<ExecutionModel> parse_execution_model(std::string_view s) {
  for (auto m : {ExecutionModel::Stream, ExecutionModel::Workflow, ExecutionModel::BagOfTasks,
                 ExecutionModel::Graph})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

std::optional<PriorityClass> parse_priority_class(std::string_view s) {
  for (auto p : {PriorityClass::Emergency, PriorityClass::High, PriorityClass::Normal})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

std::optional<LatencyClass> parse_latency_class(std::string_view s) {
  if (s == "Sensitive") return LatencyClass::Sensitive;
  if (s == "Tolerant") return LatencyClass::Tolerant;
  return std::nullopt;
}

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::DuplicateId: return "DuplicateId";
    case ViolationKind::DanglingEndpoint: return "DanglingEndpoint";
    case ViolationKind::SelfLink: return "SelfLink";
    case ViolationKind::DuplicateLink: return "DuplicateLink";
    case ViolationKind::Disconnected: return "Disconnected";
    case ViolationKind::PowerRangeViolation: return "PowerRangeViolation";
    case ViolationKind::CapacityViolation: return "CapacityViolation";
    case ViolationKind::TrustRange: return "TrustRange";
    case ViolationKind::FailureParams: return "FailureParams";
    case ViolationKind::LinkParams: return "LinkParams";
    case ViolationKind::CycleDetected: return "CycleDetected";
    case ViolationKind::MissingEndpoint: return "MissingEndpoint";
    case ViolationKind::RateViolation: return "RateViolation";
    case ViolationKind::PrivacyRange: return "PrivacyRange";
    case ViolationKind::TaskLength: return "TaskLength";
    case ViolationKind::SourceViolation: return "SourceViolation";
    case ViolationKind::QoSViolation: return "QoSViolation";
  }
  return "?";
}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

PowerPair energy_class_power(int energyClass) {
  switch (energyClass) {
    case 1: return {40.0, 90.0};
    case 2: return {70.0, 160.0};
    default: return {110.0, 250.0};
  }
}

const ModuleSpec* AppSpec::module(std::string_view mid) const {
  for (const auto& m : modules)
    if (m.id == mid) return &m;
  return nullptr;
}

const AppEdge* AppSpec::source_edge() const {
  for (const auto& e : edges)
    if (e.src == kSourceEndpoint) return &e;
  return nullptr;
}

double AppSpec::source_rate_hz() const {
  const AppEdge* e = source_edge();
  return e ? e->emitRateHz : 0.0;
}

const InstanceOffer* ProviderSpec::offer(std::string_view offerId) const {
  for (const auto& o : offers)
    if (o.offerId == offerId) return &o;
  return nullptr;
}

// ---------------------------------------------------------------------------

ValidationReport validate_topology(const std::vector<NodeSpec>& nodes, const std::vector<LinkSpec>& links) {
  ValidationReport report;
  auto add = [&](ViolationKind k, const std::string& subject, std::string msg) {
    report.push_back({k, subject, std::move(msg)});
  };

  std::map<std::string, const NodeSpec*> byId;
  for (const auto& n : nodes) {
    if (!byId.emplace(n.id, &n).second) add(ViolationKind::DuplicateId, n.id, "duplicate node id");
    if (n.cores < 1) add(ViolationKind::CapacityViolation, n.id, "cores must be >= 1");
    if (!(n.mipsPerCore > 0)) add(ViolationKind::CapacityViolation, n.id, "mipsPerCore must be > 0");
    if (n.ramMB < 0 || n.storageGB < 0) add(ViolationKind::CapacityViolation, n.id, "negative ram/storage");
    if (!(n.powerIdleW >= 0) || !(n.powerMaxW >= n.powerIdleW))
      add(ViolationKind::PowerRangeViolation, n.id, "require powerMaxW >= powerIdleW >= 0");
    if (n.trustLevel < 0 || n.trustLevel > kMaxTrust) add(ViolationKind::TrustRange, n.id, "trustLevel outside 0..3");
    if (n.mtbfS.has_value() != n.mttrS.has_value() || (n.mtbfS && (*n.mtbfS <= 0 || *n.mttrS <= 0)))
      add(ViolationKind::FailureParams, n.id, "mtbfS and mttrS must both be present and > 0");
  }

  std::set<std::pair<std::string, std::string>> seenPairs;
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& l : links) {
    const std::string subject = l.a + "-" + l.b;
    bool dangling = false;
    for (const auto* end : {&l.a, &l.b}) {
      if (!byId.count(*end)) {
        add(ViolationKind::DanglingEndpoint, subject, "unknown node id '" + *end + "'");
        dangling = true;
      }
    }
    if (l.a == l.b) {
      add(ViolationKind::SelfLink, subject, "self link");
      continue;
    }
    if (!(l.latencyMs >= 0) || !(l.bandwidthMbps > 0))
      add(ViolationKind::LinkParams, subject, "require latencyMs >= 0 and bandwidthMbps > 0");
    auto key = std::minmax(l.a, l.b);
    if (!seenPairs.emplace(key.first, key.second).second)
      add(ViolationKind::DuplicateLink, subject, "more than one link for this pair");
    if (!dangling) {
      adj[l.a].push_back(l.b);
      adj[l.b].push_back(l.a);
    }
  }

  // Gateways and compute nodes must form one connected component. Devices may
  // be mobile and attach through their user's serving gateway instead.
  std::vector<std::string> infra;
  for (const auto& [id, n] : byId)
    if (n->tier != Tier::IoTDevice) infra.push_back(id);
  if (!infra.empty()) {
    std::set<std::string> seen{infra.front()};
    std::vector<std::string> stack{infra.front()};
    while (!stack.empty()) {
      auto cur = stack.back();
      stack.pop_back();
      for (const auto& nb : adj[cur])
        if (seen.insert(nb).second) stack.push_back(nb);
    }
    for (const auto& id : infra)
      if (!seen.count(id)) add(ViolationKind::Disconnected, id, "not connected to " + infra.front());
  }
  return report;
}

namespace {

// Kahn's algorithm; returns fewer ids than modules when a cycle exists.
std::vector<ModuleId> kahn(const AppSpec& app) {
  std::map<std::string, int> indeg;
  std::map<std::string, std::size_t> order;
  for (std::size_t i = 0; i < app.modules.size(); ++i) {
    indeg[app.modules[i].id] = 0;
    order[app.modules[i].id] = i;
  }
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& e : app.edges) {
    if (!indeg.count(e.src) || !indeg.count(e.dst)) continue;
    out[e.src].push_back(e.dst);
    ++indeg[e.dst];
  }
  auto cmp = [&](const std::string& a, const std::string& b) { return order[a] > order[b]; };
  std::priority_queue<std::string, std::vector<std::string>, decltype(cmp)> ready(cmp);
  for (const auto& [id, d] : indeg)
    if (d == 0) ready.push(id);
  std::vector<ModuleId> result;
  while (!ready.empty()) {
    auto id = ready.top();
    ready.pop();
    result.push_back(id);
    for (const auto& nb : out[id])
      if (--indeg[nb] == 0) ready.push(nb);
  }
  return result;
}

}  // namespace

ValidationReport validate_app(const AppSpec& app) {
  ValidationReport report;
  auto add = [&](ViolationKind k, const std::string& subject, std::string msg) {
    report.push_back({k, app.id + "/" + subject, std::move(msg)});
  };

  std::set<std::string> ids;
  for (const auto& m : app.modules) {
    if (!ids.insert(m.id).second) add(ViolationKind::DuplicateId, m.id, "duplicate module id");
    if (!(m.taskLengthMI > 0)) add(ViolationKind::TaskLength, m.id, "taskLengthMI must be > 0");
    if (m.privacyLevel < 0 || m.privacyLevel > kMaxTrust)
      add(ViolationKind::PrivacyRange, m.id, "privacyLevel outside 0..3");
    if (m.ramMB < 0) add(ViolationKind::TaskLength, m.id, "negative ramMB");
  }

  int sourceEdges = 0;
  for (const auto& e : app.edges) {
    const std::string subject = e.src + "->" + e.dst;
    const bool fromSource = e.src == kSourceEndpoint;
    if (fromSource) {
      ++sourceEdges;
      if (!(e.emitRateHz > 0)) add(ViolationKind::RateViolation, subject, "source emitRateHz must be > 0");
    } else if (!ids.count(e.src)) {
      add(ViolationKind::MissingEndpoint, subject, "unknown module '" + e.src + "'");
    }
    if (!ids.count(e.dst)) add(ViolationKind::MissingEndpoint, subject, "unknown module '" + e.dst + "'");
    if (!(e.tupleSizeKb >= 0)) add(ViolationKind::RateViolation, subject, "negative tupleSizeKb");
    if (e.emitRateHz < 0) add(ViolationKind::RateViolation, subject, "negative emitRateHz");
  }
  if (sourceEdges != 1)
    add(ViolationKind::SourceViolation, "source", "exactly one source edge required, found " + std::to_string(sourceEdges));
  if (app.sourceNode.empty()) add(ViolationKind::SourceViolation, "source", "sourceNode not set");

  if (kahn(app).size() != app.modules.size() && ids.size() == app.modules.size())
    add(ViolationKind::CycleDetected, "graph", "module graph contains a cycle");

  if (!(app.qos.deadlineMs > 0)) add(ViolationKind::QoSViolation, "qos", "deadlineMs must be > 0");
  if (!(app.qos.budgetPerHour >= 0)) add(ViolationKind::QoSViolation, "qos", "budgetPerHour must be >= 0");
  return report;
}

std::vector<ModuleId> topological_order(const AppSpec& app) {
  auto order = kahn(app);
  if (order.size() != app.modules.size())
    throw Error(ErrorKind::InvalidArgument, "app '" + app.id + "' has a cyclic module graph");
  return order;
}

// ---------------------------------------------------------------------------

Topology::Topology(std::vector<NodeSpec> nodes, std::vector<LinkSpec> links)
    : nodes_(std::move(nodes)), links_(std::move(links)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i].id, i);
  adjacency_.resize(nodes_.size());
  for (std::size_t li = 0; li < links_.size(); ++li) {
    auto a = index_.find(links_[li].a);
    auto b = index_.find(links_[li].b);
    if (a == index_.end() || b == index_.end() || a->second == b->second) continue;
    adjacency_[a->second].emplace_back(b->second, li);
    adjacency_[b->second].emplace_back(a->second, li);
  }
  for (auto& adj : adjacency_)
    std::sort(adj.begin(), adj.end(),
              [&](const auto& x, const auto& y) { return nodes_[x.first].id < nodes_[y.first].id; });
}

const NodeSpec* Topology::find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &nodes_[it->second];
}

const NodeSpec& Topology::node(std::string_view id) const {
  const NodeSpec* n = find(id);
  if (!n) throw Error(ErrorKind::NotFound, "node '" + std::string(id) + "'");
  return *n;
}

Path Topology::route(std::string_view src, std::string_view dst) const {
  auto si = index_.find(src);
  auto di = index_.find(dst);
  if (si == index_.end() || di == index_.end())
    throw Error(ErrorKind::NoRoute, std::string(src) + " -> " + std::string(dst) + ": unknown node");

  const std::size_t n = nodes_.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<std::vector<std::string_view>> seq(n);  // node-id sequence of best path
  std::vector<std::size_t> viaLink(n, SIZE_MAX), prev(n, SIZE_MAX);
  std::vector<bool> done(n, false);

  dist[si->second] = 0.0;
  seq[si->second] = {nodes_[si->second].id};
  using Entry = std::pair<double, std::size_t>;
  auto cmp = [&](const Entry& x, const Entry& y) {
    if (x.first != y.first) return x.first > y.first;
    return seq[x.second] > seq[y.second];
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> pq(cmp);
  pq.emplace(0.0, si->second);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (done[u] || d != dist[u]) continue;
    done[u] = true;
    if (u == di->second) break;
    for (auto [v, li] : adjacency_[u]) {
      if (done[v]) continue;
      const double nd = d + links_[li].latencyMs;
      auto candidate = seq[u];
      candidate.push_back(nodes_[v].id);
      if (nd < dist[v] || (nd == dist[v] && candidate < seq[v])) {
        dist[v] = nd;
        seq[v] = std::move(candidate);
        prev[v] = u;
        viaLink[v] = li;
        pq.emplace(nd, v);
      }
    }
  }
  if (dist[di->second] == inf)
    throw Error(ErrorKind::NoRoute, std::string(src) + " -> " + std::string(dst));

  Path path;
  path.baseLatencyMs = dist[di->second];
  for (std::size_t v = di->second; v != si->second; v = prev[v]) {
    path.nodes.push_back(nodes_[v].id);
    path.links.push_back(links_[viaLink[v]]);
  }
  path.nodes.push_back(nodes_[si->second].id);
  std::reverse(path.nodes.begin(), path.nodes.end());
  std::reverse(path.links.begin(), path.links.end());
  return path;
}

double Topology::base_latency_ms(std::string_view src, std::string_view dst) const {
  return route(src, dst).baseLatencyMs;
}

std::vector<const NodeSpec*> Topology::gateways() const {
  std::vector<const NodeSpec*> out;
  for (const auto& [id, i] : index_)
    if (nodes_[i].tier == Tier::Gateway) out.push_back(&nodes_[i]);
  return out;
}

}  // namespace edgeward
