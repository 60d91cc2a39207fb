#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "edgeward/error.hpp"
#include "edgeward/placement.hpp"
#include "placement_suite.hpp"

using namespace edgeward;

namespace {

struct World {
  Topology topo;
  ResidualCapacity residual;
  Catalogue catalogue;
  ProfileStore profiles;
  PlacementContext ctx;

  World(std::vector<NodeSpec> nodes, std::vector<LinkSpec> links)
      : topo(std::move(nodes), std::move(links)), residual(topo) {
    ctx.topology = &topo;
    ctx.catalogue = &catalogue;
    ctx.profiles = &profiles;
    ctx.residual = &residual;
  }
};

NodeSpec compute(const std::string& id, Tier tier, int trust, double ram = 4096, double price = 0.0) {
  NodeSpec n;
  n.id = id;
  n.tier = tier;
  n.trustLevel = trust;
  n.ramMB = ram;
  n.mipsPerCore = 1000;
  n.pricePerHour = price;
  return n;
}

NodeSpec gateway() {
  NodeSpec g;
  g.id = "gw";
  g.tier = Tier::Gateway;
  return g;
}

AppSpec single(double ram = 256, int privacy = 0) {
  AppSpec a;
  a.id = "a";
  a.sourceNode = "gw";
  a.modules.push_back({.id = "m", .taskLengthMI = 100, .ramMB = ram, .privacyLevel = privacy});
  a.edges.push_back({"@source", "m", 1, 1});
  return a;
}

// Independent oracle for small instances: every assignment, RAM summed per
// node, trust checked directly, score recomputed from evaluate_assignment.
double enumerate_min(const AppSpec& app, const QoSWeights& w, const PlacementContext& ctx) {
  std::vector<const NodeSpec*> nodes;
  for (const auto& n : ctx.topology->nodes())
    if (n.computes()) nodes.push_back(&n);
  const auto order = topological_order(app);
  double best = INFINITY;
  std::vector<std::size_t> idx(order.size(), 0);
  while (true) {
    std::map<ModuleId, NodeId> as;
    std::map<NodeId, double> ram;
    bool ok = true;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const ModuleSpec& m = *app.module(order[k]);
      const NodeSpec& n = *nodes[idx[k]];
      as[m.id] = n.id;
      ram[n.id] += m.ramMB;
      if (n.trustLevel < m.privacyLevel || ram[n.id] > n.ramMB + 1e-9) ok = false;
    }
    if (ok)
      if (auto t = evaluate_assignment(app, as, ctx); t && t->criticalPathMs <= app.qos.deadlineMs)
        best = std::min(best, weighted_score(*t, w.normalized(), ctx.norm));
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] == nodes.size()) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  return best;
}

}  // namespace

TEST_CASE("feasible_nodes honours trust and RAM") {
  World w({gateway(), compute("cloud", Tier::CloudDC, 0), compute("e1", Tier::EdgeNode, 3),
           compute("e2", Tier::EdgeNode, 2, 2048)},
          {{"gw", "cloud", 50, 100}, {"gw", "e1", 2, 100}, {"gw", "e2", 2, 100}});
  CHECK(feasible_nodes(single(256, 3).modules[0], w.ctx) == std::vector<NodeId>{"e1"});
  CHECK(feasible_nodes(single(256, 0).modules[0], w.ctx) == std::vector<NodeId>{"cloud", "e1", "e2"});
  w.residual.reserve("e1", 4096 - 2048);
  w.residual.reserve("cloud", 4096 - 2048);
  CHECK(feasible_nodes(single(4096, 0).modules[0], w.ctx).empty());
}

TEST_CASE("one module, one feasible node") {
  World w({gateway(), compute("e1", Tier::EdgeNode, 3)}, {{"gw", "e1", 2, 100}});
  const Placement p = place_application(single(), {}, w.ctx);
  CHECK(p.feasible);
  CHECK(p.assignment.at("m") == "e1");
}

TEST_CASE("privacy pins m1 to the edge and the deadline keeps m2 there") {
  World w({gateway(), compute("edge", Tier::EdgeNode, 3, 4096, 1.0), compute("cloud", Tier::CloudDC, 0, 65536, 0.1)},
          {{"gw", "edge", 2, 1000}, {"edge", "cloud", 80, 1000}});
  AppSpec a;
  a.id = "p";
  a.sourceNode = "gw";
  a.qos.deadlineMs = 100;
  a.modules = {{.id = "m1", .taskLengthMI = 10, .ramMB = 512, .privacyLevel = 3},
               {.id = "m2", .taskLengthMI = 10, .ramMB = 512, .privacyLevel = 0}};
  a.edges = {{"@source", "m1", 1, 1}, {"m1", "m2", 1, 0}};
  QoSWeights costOnly{0.0, 1.0, 0.0};

  // Hand check: m2 on the cloud costs 0.1*512/65536 per hour against
  // 1.0*512/4096 on the edge, but its path is 2 + 10 + 80 + 10 ms > 100 ms.
  const auto cloudTerms = evaluate_assignment(a, {{"m1", "edge"}, {"m2", "cloud"}}, w.ctx);
  const auto edgeTerms = evaluate_assignment(a, {{"m1", "edge"}, {"m2", "edge"}}, w.ctx);
  REQUIRE(cloudTerms);
  REQUIRE(edgeTerms);
  CHECK(cloudTerms->costPerHour < edgeTerms->costPerHour);
  CHECK(cloudTerms->criticalPathMs > a.qos.deadlineMs);
  CHECK(edgeTerms->criticalPathMs <= a.qos.deadlineMs);

  const Placement p = place_application(a, costOnly, w.ctx);
  CHECK(p.assignment.at("m1") == "edge");
  CHECK(p.assignment.at("m2") == "edge");
  CHECK(brute_force_placement(a, costOnly, w.ctx).assignment == p.assignment);
}

TEST_CASE("brute force ties go to the smaller node id") {
  World w({gateway(), compute("n2", Tier::EdgeNode, 3), compute("n1", Tier::EdgeNode, 3)},
          {{"gw", "n1", 2, 100}, {"gw", "n2", 2, 100}});
  CHECK(brute_force_placement(single(), {}, w.ctx).assignment.at("m") == "n1");
  CHECK(place_application(single(), {}, w.ctx).assignment.at("m") == "n1");
}

TEST_CASE("brute force finds the only privacy-feasible assignment") {
  World w({gateway(), compute("cloud", Tier::CloudDC, 0), compute("edge", Tier::EdgeNode, 3)},
          {{"gw", "cloud", 1, 100}, {"gw", "edge", 20, 100}});
  CHECK(brute_force_placement(single(256, 3), {}, w.ctx).assignment.at("m") == "edge");
}

TEST_CASE("greedy backtracks one level when the next module has nowhere to go") {
  // m1 prefers the near node, but then m2 (privacy 3, RAM 3000) cannot fit
  // anywhere because the near node is the only trusted one.
  World w({gateway(), compute("near", Tier::EdgeNode, 3, 3500), compute("far", Tier::EdgeNode, 1, 4096)},
          {{"gw", "near", 1, 1000}, {"gw", "far", 10, 1000}, {"near", "far", 1, 1000}});
  AppSpec a;
  a.id = "bt";
  a.sourceNode = "gw";
  a.qos.deadlineMs = 10000;
  a.modules = {{.id = "m1", .taskLengthMI = 10, .ramMB = 1000}, {.id = "m2", .taskLengthMI = 10, .ramMB = 3000, .privacyLevel = 3}};
  a.edges = {{"@source", "m1", 1, 1}, {"m1", "m2", 1, 0}};
  const Placement p = place_application(a, {1, 0, 0}, w.ctx);
  CHECK(p.assignment.at("m1") == "far");
  CHECK(p.assignment.at("m2") == "near");
}

TEST_CASE("infeasible apps throw Infeasible") {
  World w({gateway(), compute("cloud", Tier::CloudDC, 0)}, {{"gw", "cloud", 1, 100}});
  try {
    place_application(single(256, 2), {}, w.ctx);
    FAIL("expected Infeasible");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Infeasible);
  }
}

TEST_CASE("brute force agrees with an independent enumerator on the seeded suite") {
  for (int i = 0; i < 30; ++i) {
    const auto c = suite::make_case(suite::kSuiteSeed, i);
    World w(c.nodes, c.links);
    const double expected = enumerate_min(c.app, c.weights, w.ctx);
    if (std::isinf(expected)) {
      CHECK_THROWS_AS(brute_force_placement(c.app, c.weights, w.ctx), Error);
    } else {
      CHECK(brute_force_placement(c.app, c.weights, w.ctx).score == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("greedy never beats the oracle and equals it on the same assignment") {
  for (int i = 0; i < suite::kSuiteSize; ++i) {
    const auto c = suite::make_case(suite::kSuiteSeed, i);
    World w(c.nodes, c.links);
    Placement g, o;
    try {
      o = brute_force_placement(c.app, c.weights, w.ctx);
      g = place_application(c.app, c.weights, w.ctx);
    } catch (const Error&) {
      continue;
    }
    CHECK(g.score >= o.score - 1e-12);
    if (g.assignment == o.assignment) CHECK(g.score == doctest::Approx(o.score));
    CHECK(check_placement(c.app, g, w.topo, w.residual).empty());
  }
}

TEST_CASE("brute force refuses oversized instances") {
  std::vector<NodeSpec> nodes{gateway()};
  std::vector<LinkSpec> links;
  for (int i = 0; i < 11; ++i) {
    nodes.push_back(compute("n" + std::to_string(i), Tier::EdgeNode, 3));
    links.push_back({"gw", nodes.back().id, 1, 100});
  }
  World w(nodes, links);
  AppSpec a = single();
  for (int i = 1; i < 6; ++i) {
    a.modules.push_back({.id = "m" + std::to_string(i), .taskLengthMI = 1});
    a.edges.push_back({i == 1 ? "m" : "m" + std::to_string(i - 1), "m" + std::to_string(i), 1, 0});
  }
  try {
    brute_force_placement(a, {}, w.ctx);
    FAIL("expected TooLarge");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooLarge);
  }
}

TEST_CASE("retune_weights") {
  const QoSWeights eq{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const QoSWeights same = retune_weights(eq, {}, 0.5);
  CHECK(same.wLatency == doctest::Approx(1.0 / 3));
  CHECK(same.wCost == doctest::Approx(1.0 / 3));

  const QoSWeights t = retune_weights(eq, {1.0, 0, 0}, 0.5);
  CHECK(t.wLatency == doctest::Approx(3.0 / 7));
  CHECK(t.wCost == doctest::Approx(2.0 / 7));
  CHECK(t.wEnergy == doctest::Approx(2.0 / 7));

  QoSWeights w = eq;
  for (int i = 0; i < 50; ++i) {
    const QoSWeights next = retune_weights(w, {1.0, 0, 0}, 0.5);
    CHECK(next.wLatency > w.wLatency);
    CHECK(next.wLatency < 1.0);
    w = next;
  }
  CHECK_THROWS_AS(retune_weights(eq, {}, 0.0), Error);
}

TEST_CASE("weights normalise and reject degenerate input") {
  const QoSWeights n = QoSWeights{2, 1, 1}.normalized();
  CHECK(n.wLatency == doctest::Approx(0.5));
  CHECK_THROWS_AS((QoSWeights{0, 0, 0}.normalized()), Error);
  CHECK_THROWS_AS((QoSWeights{-1, 1, 1}.normalized()), Error);
}

TEST_CASE("image transfer is charged where the image is not cached") {
  World w({gateway(), compute("a", Tier::EdgeNode, 3), compute("b", Tier::EdgeNode, 3)},
          {{"gw", "a", 2, 100}, {"gw", "b", 2, 100}});
  w.catalogue.register_entry({"img", ImageInfo{125000, {"b"}}, {}});
  AppSpec app = single();
  app.modules[0].imageId = "img";
  CHECK(place_application(app, {1, 0, 0}, w.ctx).assignment.at("m") == "b");
}
