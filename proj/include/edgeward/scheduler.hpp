#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "edgeward/domain.hpp"

namespace edgeward {

using TaskId = std::uint64_t;

struct Task {
  TaskId taskId = 0;
  std::uint64_t tupleId = 0;
  AppId appId;
  ModuleId moduleId;
  double remainingMI = 0.0;
  double absoluteDeadlineS = 0.0;
  PriorityClass priorityClass = PriorityClass::Normal;
  double arrivedAtS = 0.0;
  int preemptCount = 0;
  double originalMI = 0.0;
  double executedMI = 0.0;
};

enum class QueuePolicy {
  PriorityEdf,  // class, then earliest deadline, then arrival; Emergency pre-empts
  Fifo,         // arrival order only, never pre-empts (reference)
};

struct PreemptDecision {
  enum class Kind { RunOnFreeCore, Preempt, Queue };
  Kind kind = Kind::Queue;
  TaskId victim = 0;
};

struct RunningTask {
  Task task;
  double startedAtS = 0.0;
};

// Per-node run queue plus the set of tasks holding cores.
class NodeQueue {
 public:
  NodeQueue(int cores, double mipsPerCore, QueuePolicy policy = QueuePolicy::PriorityEdf);

  void enqueue(Task task);

  // Pops the highest-order queued task onto a free core; nullopt when the
  // queue is empty or every core is busy.
  std::optional<Task> dispatch(double nowS);

  PreemptDecision preempt_if_needed(const Task& incoming, double nowS) const;

  // Stops a running task, credits the work done since it started and puts it
  // back in the queue. Returns the re-queued task.
  Task preempt(TaskId victim, double nowS);

  // Marks a running task complete and frees its core.
  Task complete(TaskId id, double nowS);

  // Removes everything (node failure). Returns running then queued tasks.
  std::vector<Task> drain();

  int cores() const { return cores_; }
  int busy_cores() const { return static_cast<int>(running_.size()); }
  bool has_free_core() const { return busy_cores() < cores_; }
  std::size_t queued() const { return queue_.size(); }
  double backlog_mi(double nowS) const;
  QueuePolicy policy() const { return policy_; }
  const std::map<TaskId, RunningTask>& running() const { return running_; }
  std::vector<Task> queued_tasks() const;
  void set_capacity(int cores, double mipsPerCore);

  // Slack of a running task at nowS: deadline - now - remaining service time.
  double slack(const RunningTask& rt, double nowS) const;

 private:
  struct Key {
    int cls;
    double deadline;
    std::uint64_t seq;
    bool operator<(const Key& o) const {
      if (cls != o.cls) return cls < o.cls;
      if (deadline != o.deadline) return deadline < o.deadline;
      return seq < o.seq;
    }
  };
  Key key_for(const Task& t, std::uint64_t seq) const;
  double remaining_now(const RunningTask& rt, double nowS) const;

  int cores_;
  double mipsPerCore_;
  QueuePolicy policy_;
  std::uint64_t nextSeq_ = 0;
  std::map<Key, Task> queue_;
  std::map<TaskId, RunningTask> running_;
};

struct ScalingDecision {
  enum class Kind { None, ScaleUp, ScaleDown };
  Kind kind = Kind::None;
  int nInstances = 0;
  std::vector<std::string> instanceIds;
  std::string reason;
};

struct QueueStats {
  double backlogMI = 0.0;
  double capacityMIPS = 0.0;
  // Time since when backlog has been continuously zero, if it is zero now.
  std::optional<double> idleSinceS;
  int instances = 0;
  int minInstances = 0;
  std::vector<std::string> idleInstanceIds;  // scale-down candidates
};

// estimatedWait = backlog / capacity. ScaleUp(1) past the threshold once the
// cooldown since the last action has elapsed; ScaleDown(idle instances) after
// a full cooldown of zero backlog while above the minimum instance count.
ScalingDecision autoscale_check(const QueueStats& stats, double thresholdS, double cooldownS, double lastActionS,
                                double nowS);

}  // namespace edgeward
