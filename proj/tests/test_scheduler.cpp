#include <doctest.h>

#include "edgeward/error.hpp"
#include "edgeward/scheduler.hpp"

using namespace edgeward;

namespace {

Task task(TaskId id, PriorityClass cls, double deadline, double mi = 100) {
  Task t;
  t.taskId = id;
  t.priorityClass = cls;
  t.absoluteDeadlineS = deadline;
  t.remainingMI = mi;
  t.originalMI = mi;
  return t;
}

}  // namespace

TEST_CASE("dispatch order is class, then deadline, then arrival") {
  NodeQueue q(1, 1000);
  q.enqueue(task(1, PriorityClass::Normal, 1.0));
  q.enqueue(task(2, PriorityClass::High, 9.0));
  q.enqueue(task(3, PriorityClass::High, 5.0));
  q.enqueue(task(4, PriorityClass::High, 5.0));
  q.enqueue(task(5, PriorityClass::Emergency, 50.0));
  std::vector<TaskId> order;
  while (auto t = q.dispatch(0)) {
    order.push_back(t->taskId);
    q.complete(t->taskId, 0);
  }
  CHECK(order == std::vector<TaskId>{5, 3, 4, 2, 1});
}

TEST_CASE("fifo ignores class and deadline") {
  NodeQueue q(1, 1000, QueuePolicy::Fifo);
  q.enqueue(task(1, PriorityClass::Normal, 9.0));
  q.enqueue(task(2, PriorityClass::Emergency, 0.1));
  CHECK(q.dispatch(0)->taskId == 1);
  CHECK_FALSE(q.dispatch(0).has_value());  // single core is busy
}

TEST_CASE("emergency arrival pre-empts the running task with the most slack") {
  NodeQueue q(2, 1000);
  q.enqueue(task(1, PriorityClass::Normal, 10.0, 1000));
  q.enqueue(task(2, PriorityClass::High, 3.0, 1000));
  q.dispatch(0);
  q.dispatch(0);
  CHECK_FALSE(q.has_free_core());

  const Task alarm = task(9, PriorityClass::Emergency, 0.5);
  const auto d = q.preempt_if_needed(alarm, 0.25);
  CHECK(d.kind == PreemptDecision::Kind::Preempt);
  CHECK(d.victim == 1);

  const Task back = q.preempt(1, 0.25);
  CHECK(back.remainingMI == doctest::Approx(750));
  CHECK(back.preemptCount == 1);
  CHECK(q.queued() == 1);
  CHECK(q.has_free_core());

  CHECK(q.preempt_if_needed(task(10, PriorityClass::High, 1), 0.3).kind == PreemptDecision::Kind::RunOnFreeCore);
}

TEST_CASE("non-emergency arrivals never pre-empt") {
  NodeQueue q(1, 1000);
  q.enqueue(task(1, PriorityClass::Normal, 10.0));
  q.dispatch(0);
  CHECK(q.preempt_if_needed(task(2, PriorityClass::High, 0.1), 0).kind == PreemptDecision::Kind::Queue);
  NodeQueue f(1, 1000, QueuePolicy::Fifo);
  f.enqueue(task(1, PriorityClass::Normal, 10.0));
  f.dispatch(0);
  CHECK(f.preempt_if_needed(task(2, PriorityClass::Emergency, 0.1), 0).kind == PreemptDecision::Kind::Queue);
}

TEST_CASE("emergency work is never displaced by emergency work") {
  NodeQueue q(1, 1000);
  q.enqueue(task(1, PriorityClass::Emergency, 10.0));
  q.dispatch(0);
  CHECK(q.preempt_if_needed(task(2, PriorityClass::Emergency, 0.1), 0).kind == PreemptDecision::Kind::Queue);
}

TEST_CASE("backlog counts queued work and the unfinished part of running work") {
  NodeQueue q(1, 1000);
  q.enqueue(task(1, PriorityClass::Normal, 10.0, 1000));
  q.enqueue(task(2, PriorityClass::Normal, 10.0, 500));
  q.dispatch(0);
  CHECK(q.backlog_mi(0.4) == doctest::Approx(600 + 500));
  const auto drained = q.drain();
  CHECK(drained.size() == 2);
  CHECK(drained.front().taskId == 1);
  CHECK(q.backlog_mi(0.4) == 0.0);
}

TEST_CASE("autoscale_check") {
  QueueStats s;
  s.capacityMIPS = 1000;
  s.instances = 2;
  s.minInstances = 1;

  SUBCASE("wait above threshold scales up") {
    s.backlogMI = 5000;
    const auto d = autoscale_check(s, 2.0, 30, -100, 0);
    CHECK(d.kind == ScalingDecision::Kind::ScaleUp);
    CHECK(d.nInstances == 1);
  }
  SUBCASE("cooldown blocks any action") {
    s.backlogMI = 5000;
    CHECK(autoscale_check(s, 2.0, 30, -10, 0).kind == ScalingDecision::Kind::None);
  }
  SUBCASE("idle for a cooldown scales down to the minimum") {
    s.idleSinceS = 0;
    s.idleInstanceIds = {"x1", "x2"};
    const auto d = autoscale_check(s, 2.0, 30, -100, 30);
    CHECK(d.kind == ScalingDecision::Kind::ScaleDown);
    CHECK(d.instanceIds == std::vector<std::string>{"x1"});
  }
  SUBCASE("idle but at the minimum") {
    s.instances = 1;
    s.idleSinceS = 0;
    s.idleInstanceIds = {"x1"};
    CHECK(autoscale_check(s, 2.0, 30, -100, 60).kind == ScalingDecision::Kind::None);
  }
  SUBCASE("zero capacity") {
    s.capacityMIPS = 0;
    CHECK_THROWS_AS(autoscale_check(s, 1, 1, 0, 0), Error);
  }
}
