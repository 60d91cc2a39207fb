#include "edgeward/erm.hpp"

#include <algorithm>
#include <limits>

#include "edgeward/error.hpp"
#include "edgeward/kernel.hpp"

namespace edgeward {

std::string_view to_string(AdmissionDecision::Kind k) {
  switch (k) {
    case AdmissionDecision::Kind::Accepted: return "Accepted";
    case AdmissionDecision::Kind::DelegatedPeer: return "DelegatedPeer";
    case AdmissionDecision::Kind::DelegatedCloud: return "DelegatedCloud";
    case AdmissionDecision::Kind::Rejected: return "Rejected";
  }
  return "?";
}

AdmissionController::AdmissionController(std::vector<ClusterState> clusters) {
  for (auto& c : clusters) {
    peak_[c.clusterId] = c.reservedMips;
    clusters_.emplace(c.clusterId, std::move(c));
  }
}

bool AdmissionController::try_reserve(ClusterState& c, double mips) {
  if (c.reservedMips + mips > c.capacity()) return false;
  c.reservedMips += mips;
  peak_[c.clusterId] = std::max(peak_[c.clusterId], c.reservedMips);
  return true;
}

AdmissionDecision AdmissionController::admit(const AdmissionRequest& request, const std::string& clusterId) {
  if (!(request.mipsNeeded > 0)) throw Error(ErrorKind::InvalidArgument, "mipsNeeded must be > 0");
  ClusterState* home = cluster(clusterId);
  if (!home) throw Error(ErrorKind::NotFound, "cluster '" + clusterId + "'");

  if (try_reserve(*home, request.mipsNeeded)) return {AdmissionDecision::Kind::Accepted, clusterId};
  if (request.latencyClass == LatencyClass::Tolerant) return {AdmissionDecision::Kind::DelegatedCloud, {}};
  for (const auto& peerId : home->peerClusters) {
    ClusterState* peer = cluster(peerId);
    if (peer && try_reserve(*peer, request.mipsNeeded)) return {AdmissionDecision::Kind::DelegatedPeer, peerId};
  }
  return {AdmissionDecision::Kind::Rejected, {}};
}

void AdmissionController::release(const std::string& clusterId, double mips) {
  if (ClusterState* c = cluster(clusterId)) c->reservedMips = std::max(0.0, c->reservedMips - mips);
}

const ClusterState* AdmissionController::cluster(const std::string& id) const {
  auto it = clusters_.find(id);
  return it == clusters_.end() ? nullptr : &it->second;
}

ClusterState* AdmissionController::cluster(const std::string& id) {
  auto it = clusters_.find(id);
  return it == clusters_.end() ? nullptr : &it->second;
}

void AdmissionController::add_member(const std::string& clusterId, const NodeId& node, double mips) {
  ClusterState* c = cluster(clusterId);
  if (!c) throw Error(ErrorKind::NotFound, "cluster '" + clusterId + "'");
  c->memberNodes.push_back(node);
  c->totalMips += mips;
}

double AdmissionController::peak_reserved(const std::string& clusterId) const {
  auto it = peak_.find(clusterId);
  return it == peak_.end() ? 0.0 : it->second;
}

void order_peers_by_latency(std::vector<ClusterState>& clusters, const Topology& topo) {
  auto anchor = [](const ClusterState& c) -> const NodeId* {
    return c.memberNodes.empty() ? nullptr : &c.memberNodes.front();
  };
  for (auto& c : clusters) {
    const NodeId* from = anchor(c);
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& peerId : c.peerClusters) {
      auto it = std::find_if(clusters.begin(), clusters.end(), [&](auto& x) { return x.clusterId == peerId; });
      double lat = std::numeric_limits<double>::infinity();
      if (it != clusters.end() && from && anchor(*it)) {
        try {
          lat = topo.base_latency_ms(*from, *anchor(*it));
        } catch (const Error&) {
        }
      }
      ranked.emplace_back(lat, peerId);
    }
    std::stable_sort(ranked.begin(), ranked.end());
    c.peerClusters.clear();
    for (auto& [lat, id] : ranked) c.peerClusters.push_back(id);
  }
}

// ---------------------------------------------------------------------------

const PerfProfile& ProfileStore::update(const ProfileKey& key, double observedServiceS) {
  if (!(observedServiceS > 0)) throw Error(ErrorKind::InvalidArgument, "observed service time must be > 0");
  auto& p = profiles_[key];
  p.key = key;
  p.meanServiceS += (observedServiceS - p.meanServiceS) / static_cast<double>(p.sampleCount + 1);
  ++p.sampleCount;
  return p;
}

const PerfProfile* ProfileStore::find(const ProfileKey& key) const {
  auto it = profiles_.find(key);
  return it == profiles_.end() ? nullptr : &it->second;
}

double ProfileStore::predict_service_time(const ProfileKey& key, double taskLengthMI, const NodeSpec& nodeType) const {
  if (const PerfProfile* p = find(key); p && p->sampleCount >= nMin_) return p->meanServiceS;
  return service_time(taskLengthMI, nodeType);
}

// ---------------------------------------------------------------------------

void Catalogue::register_entry(const CatalogueEntry& entry) {
  auto& table = entry.kind() == CatalogueKind::Image ? images_ : data_;
  auto [it, inserted] = table.emplace(entry.id, entry);
  if (!inserted && !(it->second == entry))
    throw Error(ErrorKind::DuplicateId, "catalogue id '" + entry.id + "' already registered with a different payload");
}

const CatalogueEntry* Catalogue::find(CatalogueKind kind, const std::string& id) const {
  const auto& table = kind == CatalogueKind::Image ? images_ : data_;
  auto it = table.find(id);
  return it == table.end() ? nullptr : &it->second;
}

const CatalogueEntry& Catalogue::lookup(CatalogueKind kind, const std::string& id) const {
  const CatalogueEntry* e = find(kind, id);
  if (!e) throw Error(ErrorKind::NotFound, "catalogue entry '" + id + "'");
  return *e;
}

void Catalogue::mark_cached(const std::string& imageId, const NodeId& node) {
  auto it = images_.find(imageId);
  if (it == images_.end()) return;
  auto& nodes = std::get<ImageInfo>(it->second.info).cachedOnNodes;
  if (std::find(nodes.begin(), nodes.end(), node) == nodes.end()) nodes.push_back(node);
}

namespace {

double nearest_copy_cost(double sizeKb, const std::vector<NodeId>& homes, const NodeId& target, const Topology& topo) {
  if (std::find(homes.begin(), homes.end(), target) != homes.end()) return 0.0;
  std::optional<Path> best;
  for (const auto& h : homes) {
    try {
      Path p = topo.route(h, target);
      if (!best || p.baseLatencyMs < best->baseLatencyMs) best = std::move(p);
    } catch (const Error&) {
    }
  }
  if (!best) return 0.0;
  return transfer_time(sizeKb, *best);
}

}  // namespace

double data_movement_cost(const Catalogue& catalogue, const std::string& datasetId, const NodeId& target,
                          const Topology& topo) {
  const auto& entry = catalogue.lookup(CatalogueKind::Data, datasetId);
  const auto& info = std::get<DataInfo>(entry.info);
  return nearest_copy_cost(info.sizeKb, info.homeNodes, target, topo);
}

double image_transfer_cost(const Catalogue& catalogue, const std::string& imageId, const NodeId& target,
                           const Topology& topo) {
  if (imageId.empty()) return 0.0;
  const CatalogueEntry* entry = catalogue.find(CatalogueKind::Image, imageId);
  if (!entry) return 0.0;
  const auto& info = std::get<ImageInfo>(entry->info);
  return nearest_copy_cost(info.sizeKb, info.cachedOnNodes, target, topo);
}

}  // namespace edgeward
