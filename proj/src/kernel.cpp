#include "edgeward/kernel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <ostream>

#include "edgeward/error.hpp"

namespace edgeward {

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::TupleEmitted: return "TupleEmitted";
    case EventKind::TransferComplete: return "TransferComplete";
    case EventKind::TaskStarted: return "TaskStarted";
    case EventKind::TaskCompleted: return "TaskCompleted";
    case EventKind::NodeFailed: return "NodeFailed";
    case EventKind::NodeRecovered: return "NodeRecovered";
    case EventKind::UserMoved: return "UserMoved";
    case EventKind::ProvisionComplete: return "ProvisionComplete";
    case EventKind::MigrationComplete: return "MigrationComplete";
    case EventKind::ModelUpdated: return "ModelUpdated";
    case EventKind::MonitorTick: return "MonitorTick";
  }
  return "?";
}

std::string_view to_string(TupleStatus s) {
  switch (s) {
    case TupleStatus::InFlight: return "InFlight";
    case TupleStatus::Completed: return "Completed";
    case TupleStatus::Dropped: return "Dropped";
    case TupleStatus::Preempted: return "Preempted";
  }
  return "?";
}

std::string EventPayload::summary() const {
  std::string out;
  auto add = [&](std::string_view key, const std::string& value) {
    if (value.empty()) return;
    if (!out.empty()) out += ' ';
    out += key;
    out += '=';
    out += value;
  };
  add("node", node);
  add("app", app);
  add("module", module);
  add("user", user);
  if (tuple) add("tuple", std::to_string(tuple));
  if (task) add("task", std::to_string(task));
  if (token) add("token", std::to_string(token));
  if (value != 0.0) add("value", fmt::format("{:.6f}", value));
  add("detail", detail);
  return out.empty() ? "-" : out;
}

std::string format_trace_line(const SimEvent& e) {
  return fmt::format("{:.9f}\t{}\t{}\t{}", e.timeS, e.seq, to_string(e.kind), e.payload.summary());
}

std::uint64_t Kernel::schedule(SimEvent event) {
  if (event.timeS < clock_)
    throw Error(ErrorKind::PastEvent, fmt::format("event at {} scheduled when clock is {}", event.timeS, clock_));
  event.seq = nextSeq_++;
  const auto seq = event.seq;
  queue_.push(std::move(event));
  return seq;
}

std::uint64_t Kernel::schedule(double timeS, EventKind kind, EventPayload payload) {
  SimEvent e;
  e.timeS = timeS;
  e.kind = kind;
  e.payload = std::move(payload);
  return schedule(std::move(e));
}

KernelStats Kernel::run_until(double tEndS, const Handler& handler) {
  KernelStats stats;
  while (!queue_.empty() && queue_.top().timeS <= tEndS) {
    SimEvent e = queue_.top();
    queue_.pop();
    clock_ = e.timeS;
    if (trace_) *trace_ << format_trace_line(e) << '\n';
    ++processed_;
    ++stats.processedEvents;
    if (handler) handler(*this, e);
  }
  clock_ = std::max(clock_, tEndS);
  stats.clock = clock_;
  return stats;
}

// ---------------------------------------------------------------------------

double transfer_time(double sizeKb, const Path& path) {
  double total = 0.0;
  for (const auto& link : path.links) total += link.latencyMs / 1000.0 + sizeKb * 8.0 / 1000.0 / link.bandwidthMbps;
  return total;
}

double service_time(double taskLengthMI, const NodeSpec& node) { return taskLengthMI / node.mipsPerCore; }

double service_time(double taskLengthMI, const NodeSpec& node, const NodeRuntime& rt) {
  if (!rt.up) throw Error(ErrorKind::NodeDown, node.id);
  return service_time(taskLengthMI, node);
}

void NodeRuntime::record_utilization(double u) {
  utilWindow.push_back(u);
  while (utilWindow.size() > utilWindowSize) utilWindow.pop_front();
}

double accrue_energy(const NodeSpec& node, NodeRuntime& rt, double intervalS) {
  if (intervalS < 0) throw Error(ErrorKind::InvalidArgument, "negative accrual interval");
  const double frac = static_cast<double>(rt.busyCores) / node.cores;
  const double joules = (node.powerIdleW + (node.powerMaxW - node.powerIdleW) * frac) * intervalS;
  rt.accruedEnergyJ += joules;
  rt.busyCoreSeconds += rt.busyCores * intervalS;
  return joules;
}

std::vector<FailureEvent> inject_failures(const std::vector<NodeSpec>& nodes, Rng& rng, double horizonS) {
  std::vector<const NodeSpec*> ordered;
  for (const auto& n : nodes)
    if (n.mtbfS && n.mttrS) ordered.push_back(&n);
  std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->id < b->id; });

  std::vector<FailureEvent> out;
  for (const NodeSpec* n : ordered) {
    double t = 0.0;
    for (;;) {
      const double failAt = t + rng.exponential(*n->mtbfS);
      if (failAt > horizonS) break;
      const double recoverAt = failAt + *n->mttrS;
      out.push_back({failAt, EventKind::NodeFailed, n->id});
      out.push_back({recoverAt, EventKind::NodeRecovered, n->id});
      t = recoverAt;
    }
  }
  return out;
}

}  // namespace edgeward
