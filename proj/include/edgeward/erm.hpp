#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "edgeward/domain.hpp"

namespace edgeward {

// ---------------------------------------------------------------------------
// Admission control

struct ClusterState {
  std::string clusterId;
  std::vector<NodeId> memberNodes;
  double reservedMips = 0.0;
  double totalMips = 0.0;
  double utilizationCap = 0.8;
  std::vector<std::string> peerClusters;  // ordered by inter-cluster base latency

  double capacity() const { return utilizationCap * totalMips; }
  double headroom() const { return capacity() - reservedMips; }
};

struct AdmissionRequest {
  double mipsNeeded = 0.0;
  LatencyClass latencyClass = LatencyClass::Tolerant;
};

struct AdmissionDecision {
  enum class Kind { Accepted, DelegatedPeer, DelegatedCloud, Rejected };
  Kind kind = Kind::Rejected;
  std::string clusterId;  // cluster holding the reservation (Accepted / DelegatedPeer)
};

std::string_view to_string(AdmissionDecision::Kind k);

// Owns every cluster's reservation ledger. Reservations only grow through
// admit(), which never pushes a cluster past cap * totalMips.
class AdmissionController {
 public:
  AdmissionController() = default;
  explicit AdmissionController(std::vector<ClusterState> clusters);

  // Accepted iff the request fits under the cluster cap (and is reserved);
  // otherwise Sensitive goes to the first peer (in latency order) with
  // headroom, Tolerant goes to the cloud. Rejected only when Sensitive and no
  // peer fits.
  AdmissionDecision admit(const AdmissionRequest& request, const std::string& clusterId);

  void release(const std::string& clusterId, double mips);

  const ClusterState* cluster(const std::string& id) const;
  ClusterState* cluster(const std::string& id);
  const std::map<std::string, ClusterState>& clusters() const { return clusters_; }
  void add_member(const std::string& clusterId, const NodeId& node, double mips);

  // Highest reservedMips each cluster has ever held.
  double peak_reserved(const std::string& clusterId) const;

 private:
  bool try_reserve(ClusterState& c, double mips);

  std::map<std::string, ClusterState> clusters_;
  std::map<std::string, double> peak_;
};

// Orders peers of every cluster by base latency between their first members.
void order_peers_by_latency(std::vector<ClusterState>& clusters, const Topology& topo);

// ---------------------------------------------------------------------------
// Profiling

struct ProfileKey {
  std::string moduleType;
  std::string nodeType;
  friend auto operator<=>(const ProfileKey&, const ProfileKey&) = default;
};

struct PerfProfile {
  ProfileKey key;
  double meanServiceS = 0.0;
  std::size_t sampleCount = 0;
};

class ProfileStore {
 public:
  explicit ProfileStore(std::size_t nMin = 5) : nMin_(nMin) {}

  // Running mean: mean += (obs - mean) / (count + 1). Requires obs > 0.
  const PerfProfile& update(const ProfileKey& key, double observedServiceS);

  const PerfProfile* find(const ProfileKey& key) const;

  // Profile mean once it has nMin samples, else taskLengthMI / mipsPerCore.
  double predict_service_time(const ProfileKey& key, double taskLengthMI, const NodeSpec& nodeType) const;

  std::size_t n_min() const { return nMin_; }
  const std::map<ProfileKey, PerfProfile>& profiles() const { return profiles_; }

 private:
  std::size_t nMin_;
  std::map<ProfileKey, PerfProfile> profiles_;
};

// ---------------------------------------------------------------------------
// Catalogue

struct ImageInfo {
  double sizeKb = 0.0;
  std::vector<NodeId> cachedOnNodes;
  friend bool operator==(const ImageInfo&, const ImageInfo&) = default;
};

struct DataInfo {
  double sizeKb = 0.0;
  std::vector<NodeId> homeNodes;
  friend bool operator==(const DataInfo&, const DataInfo&) = default;
};

enum class CatalogueKind { Image, Data };

struct CatalogueEntry {
  std::string id;
  std::variant<ImageInfo, DataInfo> info;
  std::map<std::string, std::string> metadata;

  CatalogueKind kind() const { return info.index() == 0 ? CatalogueKind::Image : CatalogueKind::Data; }
  friend bool operator==(const CatalogueEntry&, const CatalogueEntry&) = default;
};

class Catalogue {
 public:
  // Idempotent for an identical payload; throws DuplicateId otherwise.
  void register_entry(const CatalogueEntry& entry);
  // Throws NotFound.
  const CatalogueEntry& lookup(CatalogueKind kind, const std::string& id) const;
  const CatalogueEntry* find(CatalogueKind kind, const std::string& id) const;

  // Marks an image as cached on a node (after a deployment pulled it).
  void mark_cached(const std::string& imageId, const NodeId& node);

  std::size_t size() const { return images_.size() + data_.size(); }

 private:
  std::map<std::string, CatalogueEntry> images_;
  std::map<std::string, CatalogueEntry> data_;
};

// 0 when target is a home node, else the transfer time from the home node
// with the lowest base latency. Throws NotFound.
double data_movement_cost(const Catalogue& catalogue, const std::string& datasetId, const NodeId& target,
                          const Topology& topo);

// Same rule for images: 0 if cached on target or not catalogued.
double image_transfer_cost(const Catalogue& catalogue, const std::string& imageId, const NodeId& target,
                           const Topology& topo);

}  // namespace edgeward
