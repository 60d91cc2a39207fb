#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "edgeward/domain.hpp"
#include "edgeward/rng.hpp"

namespace edgeward {

enum class EventKind {
  TupleEmitted,
  TransferComplete,
  TaskStarted,
  TaskCompleted,
  NodeFailed,
  NodeRecovered,
  UserMoved,
  ProvisionComplete,
  MigrationComplete,
  ModelUpdated,
  MonitorTick,
};

std::string_view to_string(EventKind k);

// Kind-specific fields; unused ones stay empty/zero and are left out of the
// trace summary.
struct EventPayload {
  std::string node;
  std::string app;
  std::string module;
  std::string user;
  std::string detail;
  std::uint64_t tuple = 0;
  std::uint64_t task = 0;
  std::uint64_t token = 0;
  double value = 0.0;

  std::string summary() const;
};

struct SimEvent {
  double timeS = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::MonitorTick;
  EventPayload payload;
};

struct KernelStats {
  std::uint64_t processedEvents = 0;
  double clock = 0.0;
};

// Single-threaded discrete-event core. Events leave the queue in (timeS, seq)
// order; seq is assigned at scheduling time so equal timestamps keep FIFO
// order without any epsilon comparison.
class Kernel {
 public:
  using Handler = std::function<void(Kernel&, const SimEvent&)>;

  double now() const { return clock_; }
  std::size_t pending() const { return queue_.size(); }
  std::uint64_t processed() const { return processed_; }

  // Throws Error(PastEvent) when event.timeS < now(). Returns the assigned seq.
  std::uint64_t schedule(SimEvent event);
  std::uint64_t schedule(double timeS, EventKind kind, EventPayload payload = {});

  // Processes every event with timeS <= tEndS, then leaves the clock at tEndS.
  KernelStats run_until(double tEndS, const Handler& handler);

  // When set, one tab-separated line per processed event:
  // timeS<TAB>seq<TAB>kind<TAB>payloadSummary
  void set_trace(std::ostream* out) { trace_ = out; }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.timeS != b.timeS) return a.timeS > b.timeS;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
  double clock_ = 0.0;
  std::uint64_t nextSeq_ = 0;
  std::uint64_t processed_ = 0;
  std::ostream* trace_ = nullptr;
};

std::string format_trace_line(const SimEvent& e);

// ---------------------------------------------------------------------------
// Service models

// Σ over links of latency + serialisation delay. Zero for a same-node path.
double transfer_time(double sizeKb, const Path& path);

// One core per task: taskLengthMI / mipsPerCore.
double service_time(double taskLengthMI, const NodeSpec& node);

struct NodeRuntime {
  NodeId nodeId;
  int busyCores = 0;
  double accruedEnergyJ = 0.0;
  bool up = true;
  double lastAccrualS = 0.0;
  double busyCoreSeconds = 0.0;
  std::deque<double> utilWindow;  // recent utilisation samples in [0,1]
  std::size_t utilWindowSize = 16;

  void record_utilization(double u);
};

// Throws Error(NodeDown) when the node is down.
double service_time(double taskLengthMI, const NodeSpec& node, const NodeRuntime& rt);

// Linear power model: idle + (max - idle) * busy/cores, integrated over the
// interval. Adds to rt.accruedEnergyJ and returns the increment.
double accrue_energy(const NodeSpec& node, NodeRuntime& rt, double intervalS);

// ---------------------------------------------------------------------------
// Failure injection

struct FailureEvent {
  double timeS;
  EventKind kind;  // NodeFailed or NodeRecovered
  NodeId nodeId;
};

// Alternating up/down intervals for every node with mtbfS: up ~ Exp(mtbfS),
// down = mttrS. Nodes are visited in id order and each node draws all of its
// intervals up to horizonS before the next node draws.
std::vector<FailureEvent> inject_failures(const std::vector<NodeSpec>& nodes, Rng& rng, double horizonS);

// ---------------------------------------------------------------------------
// Tuples

enum class TupleStatus { InFlight, Completed, Dropped, Preempted };
std::string_view to_string(TupleStatus s);

struct Hop {
  NodeId node;
  std::string module;
  double arriveS = 0.0;
  double departS = 0.0;
};

struct TupleRecord {
  std::uint64_t tupleId = 0;
  AppId appId;
  ModuleId srcModule;
  ModuleId dstModule;
  double sizeKb = 0.0;
  double emitTimeS = 0.0;
  double deadlineAtS = 0.0;
  std::optional<double> completeTimeS;
  std::vector<Hop> hops;
  TupleStatus status = TupleStatus::InFlight;
  double baseLatencyMs = 0.0;  // Σ base link latency along the realised path
};

}  // namespace edgeward
