#include "edgeward/scheduler.hpp"

#include <algorithm>
#include <limits>

#include "edgeward/error.hpp"

namespace edgeward {

NodeQueue::NodeQueue(int cores, double mipsPerCore, QueuePolicy policy)
    : cores_(cores), mipsPerCore_(mipsPerCore), policy_(policy) {
  if (cores < 1 || !(mipsPerCore > 0)) throw Error(ErrorKind::InvalidArgument, "node queue needs cores and mips");
}

NodeQueue::Key NodeQueue::key_for(const Task& t, std::uint64_t seq) const {
  if (policy_ == QueuePolicy::Fifo) return {0, 0.0, seq};
  return {static_cast<int>(t.priorityClass), t.absoluteDeadlineS, seq};
}

void NodeQueue::enqueue(Task task) {
  if (task.remainingMI < 0) throw Error(ErrorKind::InvalidArgument, "negative remainingMI");
  const Key k = key_for(task, nextSeq_++);
  queue_.emplace(k, std::move(task));
}

std::optional<Task> NodeQueue::dispatch(double nowS) {
  if (queue_.empty() || !has_free_core()) return std::nullopt;
  auto it = queue_.begin();
  Task t = std::move(it->second);
  queue_.erase(it);
  running_.emplace(t.taskId, RunningTask{t, nowS});
  return t;
}

double NodeQueue::remaining_now(const RunningTask& rt, double nowS) const {
  return std::max(0.0, rt.task.remainingMI - (nowS - rt.startedAtS) * mipsPerCore_);
}

double NodeQueue::slack(const RunningTask& rt, double nowS) const {
  return rt.task.absoluteDeadlineS - nowS - remaining_now(rt, nowS) / mipsPerCore_;
}

PreemptDecision NodeQueue::preempt_if_needed(const Task& incoming, double nowS) const {
  if (has_free_core()) return {PreemptDecision::Kind::RunOnFreeCore, 0};
  if (policy_ == QueuePolicy::Fifo || incoming.priorityClass != PriorityClass::Emergency)
    return {PreemptDecision::Kind::Queue, 0};

  const RunningTask* victim = nullptr;
  double bestSlack = -std::numeric_limits<double>::infinity();
  for (const auto& [id, rt] : running_) {
    if (rt.task.priorityClass == PriorityClass::Emergency) continue;
    const double s = slack(rt, nowS);
    if (!victim || s > bestSlack) {
      victim = &rt;
      bestSlack = s;
    }
  }
  if (!victim) return {PreemptDecision::Kind::Queue, 0};
  return {PreemptDecision::Kind::Preempt, victim->task.taskId};
}

Task NodeQueue::preempt(TaskId victim, double nowS) {
  auto it = running_.find(victim);
  if (it == running_.end()) throw Error(ErrorKind::NotFound, "running task " + std::to_string(victim));
  Task t = std::move(it->second.task);
  const double remaining = remaining_now(it->second, nowS);
  t.executedMI += t.remainingMI - remaining;
  t.remainingMI = remaining;
  ++t.preemptCount;
  running_.erase(it);
  enqueue(t);
  return t;
}

Task NodeQueue::complete(TaskId id, double nowS) {
  auto it = running_.find(id);
  if (it == running_.end()) throw Error(ErrorKind::NotFound, "running task " + std::to_string(id));
  Task t = std::move(it->second.task);
  (void)nowS;
  t.executedMI += t.remainingMI;
  t.remainingMI = 0.0;
  running_.erase(it);
  return t;
}

std::vector<Task> NodeQueue::drain() {
  std::vector<Task> out;
  for (auto& [id, rt] : running_) out.push_back(std::move(rt.task));
  for (auto& [k, t] : queue_) out.push_back(std::move(t));
  running_.clear();
  queue_.clear();
  return out;
}

double NodeQueue::backlog_mi(double nowS) const {
  double total = 0.0;
  for (const auto& [k, t] : queue_) total += t.remainingMI;
  for (const auto& [id, rt] : running_) total += remaining_now(rt, nowS);
  return total;
}

std::vector<Task> NodeQueue::queued_tasks() const {
  std::vector<Task> out;
  for (const auto& [k, t] : queue_) out.push_back(t);
  return out;
}

void NodeQueue::set_capacity(int cores, double mipsPerCore) {
  cores_ = cores;
  mipsPerCore_ = mipsPerCore;
}

ScalingDecision autoscale_check(const QueueStats& stats, double thresholdS, double cooldownS, double lastActionS,
                                double nowS) {
  if (!(stats.capacityMIPS > 0)) throw Error(ErrorKind::InvalidArgument, "capacityMIPS must be > 0");
  ScalingDecision d;
  if (nowS - lastActionS < cooldownS) {
    d.reason = "cooldown";
    return d;
  }
  const double wait = stats.backlogMI / stats.capacityMIPS;
  if (wait > thresholdS) {
    d.kind = ScalingDecision::Kind::ScaleUp;
    d.nInstances = 1;
    d.reason = "estimated wait " + std::to_string(wait) + " s exceeds threshold";
    return d;
  }
  if (stats.backlogMI == 0.0 && stats.idleSinceS && nowS - *stats.idleSinceS >= cooldownS &&
      stats.instances > stats.minInstances && !stats.idleInstanceIds.empty()) {
    d.kind = ScalingDecision::Kind::ScaleDown;
    const auto surplus = static_cast<std::size_t>(stats.instances - stats.minInstances);
    d.instanceIds.assign(stats.idleInstanceIds.begin(),
                         stats.idleInstanceIds.begin() + std::min(surplus, stats.idleInstanceIds.size()));
    d.reason = "idle for a full cooldown window";
  }
  return d;
}

}  // namespace edgeward
