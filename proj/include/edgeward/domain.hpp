#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace edgeward {

using NodeId = std::string;
using ModuleId = std::string;
using AppId = std::string;

enum class Tier { IoTDevice, Gateway, EdgeNode, CloudDC };
enum class ExecutionModel { Stream, Workflow, BagOfTasks, Graph };
// Declaration order is dispatch order: Emergency outranks High outranks Normal.
enum class PriorityClass { Emergency = 0, High = 1, Normal = 2 };
enum class LatencyClass { Sensitive, Tolerant };

std::string_view to_string(Tier t);
std::string_view to_string(ExecutionModel m);
std::string_view to_string(PriorityClass p);
std::string_view to_string(LatencyClass c);
std::optional<Tier> parse_tier(std::string_view s);
std::optional<ExecutionModel> parse_execution_model(std::string_view s);
std::optional<PriorityClass> parse_priority_class(std::string_view s);
std::optional<LatencyClass> parse_latency_class(std::string_view s);

inline constexpr int kMaxTrust = 3;

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

struct NodeSpec {
  NodeId id;
  Tier tier = Tier::EdgeNode;
  int cores = 1;
  double mipsPerCore = 1000.0;
  double ramMB = 1024.0;
  double storageGB = 0.0;
  double powerIdleW = 0.0;
  double powerMaxW = 0.0;
  int trustLevel = 0;  // 3 = on-premises hospital edge, 0 = public cloud
  std::string clusterId;
  std::string providerId;
  std::optional<double> mtbfS;
  std::optional<double> mttrS;
  Point position;
  // Hosting price of the whole node; modules pay a RAM-proportional share.
  double pricePerHour = 0.0;
  // Nodes sharing a type share performance profiles. Empty means the node id.
  std::string typeId;

  bool computes() const { return tier == Tier::EdgeNode || tier == Tier::CloudDC; }
  const std::string& profile_type() const { return typeId.empty() ? id : typeId; }
};

struct LinkSpec {
  NodeId a;
  NodeId b;
  double latencyMs = 0.0;
  double bandwidthMbps = 1.0;
};

struct ModuleSpec {
  ModuleId id;
  double taskLengthMI = 1.0;
  double ramMB = 0.0;
  int privacyLevel = 0;  // minimum trustLevel of a hosting node
  bool critical = false;
  LatencyClass latencyClass = LatencyClass::Tolerant;
  std::string imageId;
  double stateSizeKb = 0.0;
  std::string datasetId;  // optional input dataset from the catalogue
};

// The distinguished endpoint name for the sensor feeding an application; an
// edge with src == kSourceEndpoint is the app's source edge.
inline constexpr std::string_view kSourceEndpoint = "@source";

struct AppEdge {
  std::string src;
  std::string dst;
  double tupleSizeKb = 1.0;
  // Only meaningful on the source edge; internal edges fire once per tuple.
  double emitRateHz = 0.0;
};

struct QoSRequirement {
  double deadlineMs = 1000.0;
  PriorityClass priorityClass = PriorityClass::Normal;
  double budgetPerHour = 0.0;
  std::optional<double> maxEnergyJPerTuple;
};

struct CalibrationRequest {
  double requiredAccuracy = 1.0;
  double freshnessMs = 1.0e9;
};

struct AppSpec {
  AppId id;
  std::vector<ModuleSpec> modules;
  std::vector<AppEdge> edges;
  QoSRequirement qos;
  ExecutionModel executionModel = ExecutionModel::Stream;
  // Device or gateway where the sensor emitting into the source edge lives.
  NodeId sourceNode;
  // Owner of the app, for mobility; empty for static apps.
  std::string userId;
  double startS = 0.0;
  std::optional<CalibrationRequest> calibration;

  const ModuleSpec* module(std::string_view id) const;
  const AppEdge* source_edge() const;
  double source_rate_hz() const;
};

struct Waypoint {
  double timeS = 0.0;
  Point pos;
};

struct TrajectorySpec {
  enum class Mode { Known, Unknown };
  Mode mode = Mode::Known;
  // Known: waypoints. Unknown: observations revealed at their timestamps.
  std::vector<Waypoint> points;
  std::size_t window = 8;
};

struct UserSpec {
  std::string id;
  std::vector<NodeId> attachedDeviceIds;
  TrajectorySpec trajectory;
  NodeId servingGatewayId;
};

struct InstanceOffer {
  std::string offerId;
  int cores = 1;
  double mipsPerCore = 1000.0;
  double ramMB = 1024.0;
  double storageGB = 1.0;
  double pricePerHour = 0.0;
  int energyClass = 1;  // 1..3
};

struct PowerPair {
  double idleW;
  double maxW;
};
PowerPair energy_class_power(int energyClass);

struct ProviderSpec {
  std::string id;
  std::vector<InstanceOffer> offers;
  double baseProvisionDelayS = 0.0;
  double perInstanceDelayS = 0.0;
  double reservePriceFactor = 1.0;

  const InstanceOffer* offer(std::string_view offerId) const;
};

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  DuplicateId,
  DanglingEndpoint,
  SelfLink,
  DuplicateLink,
  Disconnected,
  PowerRangeViolation,
  CapacityViolation,
  TrustRange,
  FailureParams,
  LinkParams,
  CycleDetected,
  MissingEndpoint,
  RateViolation,
  PrivacyRange,
  TaskLength,
  SourceViolation,
  QoSViolation,
};

std::string_view to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  std::string subject;
  std::string message;
  friend bool operator==(const Violation&, const Violation&) = default;
};

using ValidationReport = std::vector<Violation>;

ValidationReport validate_topology(const std::vector<NodeSpec>& nodes, const std::vector<LinkSpec>& links);
ValidationReport validate_app(const AppSpec& app);

// Module ids in dependency order. Ties resolve by declaration order.
// Throws Error(InvalidArgument) on a cycle.
std::vector<ModuleId> topological_order(const AppSpec& app);

// ---------------------------------------------------------------------------
// Topology

struct Path {
  std::vector<NodeId> nodes;  // src .. dst inclusive; {src} when src == dst
  std::vector<LinkSpec> links;
  double baseLatencyMs = 0.0;
};

// Immutable graph view over nodes and symmetric links.
class Topology {
 public:
  Topology() = default;
  Topology(std::vector<NodeSpec> nodes, std::vector<LinkSpec> links);

  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  const std::vector<LinkSpec>& links() const { return links_; }

  const NodeSpec* find(std::string_view id) const;
  const NodeSpec& node(std::string_view id) const;  // throws NotFound
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  // Minimum-latency path (Dijkstra). Among equal-latency paths the one whose
  // node-id sequence is lexicographically smallest wins. Throws NoRoute.
  Path route(std::string_view src, std::string_view dst) const;
  double base_latency_ms(std::string_view src, std::string_view dst) const;

  // Gateways ordered by id.
  std::vector<const NodeSpec*> gateways() const;

 private:
  std::vector<NodeSpec> nodes_;
  std::vector<LinkSpec> links_;
  std::map<std::string, std::size_t, std::less<>> index_;
  // adjacency_[i] = (neighbour index, link index), sorted by neighbour id
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency_;
};

}  // namespace edgeward
