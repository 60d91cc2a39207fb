#include <doctest.h>

#include <sstream>

#include "edgeward/error.hpp"
#include "edgeward/kernel.hpp"
#include "edgeward/rng.hpp"

using namespace edgeward;

TEST_CASE("kernel orders by time then scheduling order") {
  Kernel k;
  k.schedule(5, EventKind::MonitorTick, {.detail = "e1"});
  k.schedule(5, EventKind::MonitorTick, {.detail = "e2"});
  k.schedule(3, EventKind::MonitorTick, {.detail = "t3"});
  k.schedule(2, EventKind::MonitorTick, {.detail = "t2"});
  std::vector<std::string> seen;
  k.run_until(10, [&](Kernel&, const SimEvent& e) { seen.push_back(e.payload.detail); });
  CHECK(seen == std::vector<std::string>{"t2", "t3", "e1", "e2"});
}

TEST_CASE("kernel rejects events in the past") {
  Kernel k;
  k.schedule(2, EventKind::MonitorTick);
  k.run_until(2, [](Kernel&, const SimEvent&) {});
  CHECK_THROWS_AS(k.schedule(1, EventKind::MonitorTick), Error);
}

TEST_CASE("run_until on an empty queue advances the clock") {
  Kernel k;
  const auto st = k.run_until(10, [](Kernel&, const SimEvent&) {});
  CHECK(st.processedEvents == 0);
  CHECK(k.now() == 10.0);
}

TEST_CASE("run_until stops at the horizon") {
  Kernel k;
  for (double t : {1.0, 5.0, 10.0, 11.0}) k.schedule(t, EventKind::MonitorTick);
  const auto st = k.run_until(10, [](Kernel&, const SimEvent&) {});
  CHECK(st.processedEvents == 3);
  CHECK(k.pending() == 1);
}

TEST_CASE("handlers may schedule follow-up events") {
  Kernel k;
  k.schedule(0, EventKind::MonitorTick);
  int n = 0;
  k.run_until(5, [&](Kernel& kk, const SimEvent& e) {
    ++n;
    if (e.timeS + 1 <= 5) kk.schedule(e.timeS + 1, EventKind::MonitorTick);
  });
  CHECK(n == 6);
}

TEST_CASE("trace lines are stable") {
  auto run = [] {
    std::ostringstream out;
    Kernel k;
    k.set_trace(&out);
    k.schedule(0.5, EventKind::TupleEmitted, {.app = "a", .tuple = 3});
    k.schedule(0.25, EventKind::NodeFailed, {.node = "n1"});
    k.run_until(1, [](Kernel&, const SimEvent&) {});
    return out.str();
  };
  const std::string a = run();
  CHECK(a == run());
  CHECK(a.find("0.250000000\t1\tNodeFailed\tnode=n1") == 0);
}

TEST_CASE("transfer_time is latency plus serialisation per link") {
  NodeSpec a{.id = "a"}, b{.id = "b"}, c{.id = "c"};
  Topology t({a, b, c}, {{"a", "b", 2, 100}, {"b", "c", 2, 100}});
  CHECK(transfer_time(125, t.route("a", "a")) == 0.0);
  CHECK(transfer_time(125, t.route("a", "b")) == doctest::Approx(0.012));
  CHECK(transfer_time(125, t.route("a", "c")) == doctest::Approx(0.024));
}

TEST_CASE("service_time") {
  NodeSpec n;
  n.mipsPerCore = 1000;
  CHECK(service_time(1000, n) == doctest::Approx(1.0));
  CHECK(service_time(0.5, n) == doctest::Approx(0.0005));
  n.mipsPerCore = 150;
  CHECK(service_time(300, n) == doctest::Approx(2.0));
  NodeRuntime rt;
  rt.up = false;
  CHECK_THROWS_AS(service_time(300, n, rt), Error);
}

TEST_CASE("accrue_energy follows the linear power model") {
  NodeSpec n;
  n.cores = 4;
  n.powerIdleW = 100;
  n.powerMaxW = 200;
  NodeRuntime rt;
  CHECK(accrue_energy(n, rt, 0) == 0.0);
  CHECK(accrue_energy(n, rt, 10) == doctest::Approx(1000.0));
  rt.busyCores = 2;
  CHECK(accrue_energy(n, rt, 10) == doctest::Approx(1500.0));
  CHECK(rt.accruedEnergyJ == doctest::Approx(2500.0));
}

TEST_CASE("inject_failures") {
  NodeSpec plain{.id = "plain"};
  NodeSpec flaky{.id = "flaky"};
  flaky.mtbfS = 100;
  flaky.mttrS = 30;

  SUBCASE("nodes without mtbf never fail") {
    Rng rng(1);
    CHECK(inject_failures({plain}, rng, 1e6).empty());
  }
  SUBCASE("recoveries follow failures after exactly mttr") {
    Rng rng(7);
    const auto ev = inject_failures({flaky}, rng, 10000);
    REQUIRE(ev.size() > 10);
    for (std::size_t i = 0; i + 1 < ev.size(); i += 2) {
      CHECK(ev[i].kind == EventKind::NodeFailed);
      CHECK(ev[i + 1].kind == EventKind::NodeRecovered);
      CHECK(ev[i + 1].timeS - ev[i].timeS == doctest::Approx(30.0));
    }
  }
  SUBCASE("up intervals average to mtbf") {
    Rng rng(2024);
    const auto ev = inject_failures({flaky}, rng, 1.4e6);
    double sum = 0, last = 0;
    std::size_t n = 0;
    for (const auto& e : ev) {
      if (e.kind == EventKind::NodeFailed) {
        sum += e.timeS - last;
        ++n;
      } else {
        last = e.timeS;
      }
    }
    REQUIRE(n >= 10000);
    CHECK(sum / n == doctest::Approx(100.0).epsilon(0.05));
  }
}

TEST_CASE("rng helpers") {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng r(9);
  double sum = 0;
  for (int i = 0; i < 20000; ++i) {
    const double u = r.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(7) < 7u);
    sum += r.exponential(2.0);
  }
  CHECK(sum / 20000 == doctest::Approx(2.0).epsilon(0.05));
  CHECK(mix_seed(1, 1) != mix_seed(1, 2));
  CHECK(mix_seed(1, 1) == mix_seed(1, 1));
}
