#include <doctest.h>

#include "edgeward/error.hpp"
#include "edgeward/mobility.hpp"

using namespace edgeward;

TEST_CASE("position_at interpolates and clamps") {
  TrajectorySpec t;
  t.points = {{0, {0, 0}}, {10, {10, 0}}};
  CHECK(position_at(t, 5) == Point{5, 0});
  CHECK(position_at(t, -1) == Point{0, 0});
  CHECK(position_at(t, 99) == Point{10, 0});
  CHECK_THROWS_AS(position_at(TrajectorySpec{}, 0), Error);
}

TEST_CASE("predict_position extrapolates at constant velocity") {
  CHECK(predict_position({{0, {0, 0}}, {1, {1, 0}}}, 1) == Point{2, 0});
  CHECK(predict_position({{4, {3, 4}}}, 10) == Point{3, 4});
  CHECK_THROWS_AS(predict_position({}, 1), Error);
}

namespace {

struct Ward {
  Topology topo;
  ResidualCapacity residual;
  PlacementContext ctx;

  explicit Ward(int westTrust)
      : topo(
            [&] {
              NodeSpec ge{.id = "gw-east", .tier = Tier::Gateway};
              ge.position = {0, 0};
              NodeSpec gw{.id = "gw-west", .tier = Tier::Gateway};
              gw.position = {100, 0};
              NodeSpec ee{.id = "edge-east", .tier = Tier::EdgeNode, .ramMB = 2048, .trustLevel = 3};
              NodeSpec ew{.id = "edge-west", .tier = Tier::EdgeNode, .ramMB = 2048, .trustLevel = westTrust};
              return std::vector<NodeSpec>{ge, gw, ee, ew};
            }(),
            {{"gw-east", "edge-east", 2, 1000},
             {"gw-west", "edge-west", 2, 1000},
             {"gw-east", "gw-west", 40, 1000}}),
        residual(topo) {
    ctx.topology = &topo;
    ctx.residual = &residual;
  }
};

AppSpec monitor() {
  AppSpec a;
  a.id = "vitals";
  a.sourceNode = "gw-east";
  a.modules.push_back({.id = "m", .taskLengthMI = 10, .ramMB = 256, .privacyLevel = 2,
                       .latencyClass = LatencyClass::Sensitive, .stateSizeKb = 125});
  a.edges.push_back({"@source", "m", 1, 1});
  return a;
}

}  // namespace

TEST_CASE("nearest gateway") {
  Ward w(3);
  CHECK(nearest_gateway(w.topo, {10, 0})->id == "gw-east");
  CHECK(nearest_gateway(w.topo, {90, 5})->id == "gw-west");
  CHECK(nearest_gateway(w.topo, {50, 0})->id == "gw-east");  // tie to the smaller id
}

TEST_CASE("migration_decision") {
  Placement p;
  p.assignment = {{"m", "edge-east"}};

  SUBCASE("user stays near the serving gateway") {
    Ward w(3);
    CHECK(migration_decision("u", {5, 0}, monitor(), p, w.ctx, {}).kind == MigrationDecision::Kind::Keep);
  }
  SUBCASE("user moves west") {
    Ward w(3);
    const auto d = migration_decision("u", {95, 0}, monitor(), p, w.ctx, {});
    REQUIRE(d.kind == MigrationDecision::Kind::Migrate);
    CHECK(d.predictedGateway == "gw-west");
    CHECK(d.plan->toNode == "edge-west");
    CHECK(d.plan->currentLatencyMs == doctest::Approx(42));
    CHECK(d.plan->targetLatencyMs == doctest::Approx(2));
    // 125 KB over edge-east, gw-east, gw-west, edge-west.
    CHECK(d.plan->stateTransferS == doctest::Approx(0.044 + 3 * 0.001));
  }
  SUBCASE("untrusted target is excluded") {
    Ward w(1);
    CHECK(migration_decision("u", {95, 0}, monitor(), p, w.ctx, {}).kind ==
          MigrationDecision::Kind::NoFeasibleTarget);
  }
  SUBCASE("tolerant modules never move") {
    Ward w(3);
    AppSpec a = monitor();
    a.modules[0].latencyClass = LatencyClass::Tolerant;
    CHECK(migration_decision("u", {95, 0}, a, p, w.ctx, {}).kind == MigrationDecision::Kind::Keep);
  }
}
