#include <doctest.h>

#include <algorithm>

#include "edgeward/domain.hpp"
#include "edgeward/error.hpp"

using namespace edgeward;

namespace {

NodeSpec node(const std::string& id, Tier tier = Tier::EdgeNode) {
  NodeSpec n;
  n.id = id;
  n.tier = tier;
  return n;
}

bool has(const ValidationReport& r, ViolationKind k) {
  return std::any_of(r.begin(), r.end(), [k](const Violation& v) { return v.kind == k; });
}

AppSpec pipeline() {
  AppSpec a;
  a.id = "app";
  a.sourceNode = "dev";
  for (const char* m : {"m1", "m2", "m3"}) a.modules.push_back({.id = m, .taskLengthMI = 10});
  a.edges = {{"@source", "m1", 1, 2}, {"m1", "m2", 1, 0}, {"m2", "m3", 1, 0}};
  return a;
}

}  // namespace

TEST_CASE("validate_topology on a well-formed chain") {
  std::vector<NodeSpec> nodes{node("a"), node("b"), node("c")};
  std::vector<LinkSpec> links{{"a", "b", 1, 10}, {"b", "c", 1, 10}};
  CHECK(validate_topology(nodes, links).empty());
}

TEST_CASE("validate_topology reports a dangling endpoint") {
  std::vector<NodeSpec> nodes{node("a"), node("b")};
  std::vector<LinkSpec> links{{"a", "b", 1, 10}, {"a", "x9", 1, 10}};
  const auto r = validate_topology(nodes, links);
  CHECK(std::count_if(r.begin(), r.end(), [](const Violation& v) { return v.kind == ViolationKind::DanglingEndpoint; }) == 1);
}

TEST_CASE("validate_topology reports an inverted power range") {
  NodeSpec n = node("a");
  n.powerIdleW = 200;
  n.powerMaxW = 100;
  CHECK(has(validate_topology({n}, {}), ViolationKind::PowerRangeViolation));
}

TEST_CASE("validate_topology catches duplicates, self links and repeated pairs") {
  std::vector<NodeSpec> nodes{node("a"), node("a"), node("b")};
  std::vector<LinkSpec> links{{"a", "a", 1, 1}, {"a", "b", 1, 1}, {"b", "a", 2, 1}};
  const auto r = validate_topology(nodes, links);
  CHECK(has(r, ViolationKind::DuplicateId));
  CHECK(has(r, ViolationKind::SelfLink));
  CHECK(has(r, ViolationKind::DuplicateLink));
}

TEST_CASE("validate_topology flags mtbf without mttr and unreachable compute nodes") {
  NodeSpec a = node("a");
  a.mtbfS = 100;
  std::vector<NodeSpec> nodes{a, node("b"), node("island")};
  const auto r = validate_topology(nodes, {{"a", "b", 1, 1}});
  CHECK(has(r, ViolationKind::FailureParams));
  CHECK(has(r, ViolationKind::Disconnected));
}

TEST_CASE("validate_topology is pure") {
  std::vector<NodeSpec> nodes{node("a"), node("b")};
  std::vector<LinkSpec> links{{"a", "zz", -1, 0}};
  CHECK(validate_topology(nodes, links) == validate_topology(nodes, links));
}

TEST_CASE("route: identity, chain and diamond") {
  Topology t({node("A"), node("B"), node("C"), node("D")},
             {{"A", "B", 1, 100}, {"B", "D", 1, 100}, {"A", "C", 1, 100}, {"C", "D", 2, 100}});
  const Path self = t.route("A", "A");
  CHECK(self.links.empty());
  CHECK(self.baseLatencyMs == 0.0);

  // Oracle: the two A..D paths cost 1+1 and 1+2.
  const Path p = t.route("A", "D");
  CHECK(p.nodes == std::vector<NodeId>{"A", "B", "D"});
  CHECK(p.baseLatencyMs == doctest::Approx(2.0));

  Topology chain({node("A"), node("B"), node("C")}, {{"A", "B", 2, 100}, {"B", "C", 3, 100}});
  const Path c = chain.route("A", "C");
  CHECK(c.nodes == std::vector<NodeId>{"A", "B", "C"});
  CHECK(c.baseLatencyMs == doctest::Approx(5.0));
}

TEST_CASE("route breaks equal-latency ties by the smaller next node id") {
  Topology t({node("S"), node("m"), node("k"), node("T")},
             {{"S", "m", 1, 1}, {"m", "T", 1, 1}, {"S", "k", 1, 1}, {"k", "T", 1, 1}});
  CHECK(t.route("S", "T").nodes == std::vector<NodeId>{"S", "k", "T"});
}

TEST_CASE("route throws NoRoute between components") {
  Topology t({node("a"), node("b")}, {});
  CHECK_THROWS_AS(t.route("a", "b"), Error);
  try {
    t.route("a", "b");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoRoute);
  }
}

TEST_CASE("route obeys the triangle inequality on its own outputs") {
  std::vector<NodeSpec> nodes;
  for (const char* id : {"a", "b", "c", "d", "e"}) nodes.push_back(node(id));
  Topology t(nodes, {{"a", "b", 3, 1}, {"b", "c", 4, 1}, {"a", "c", 9, 1}, {"c", "d", 1, 1}, {"d", "e", 2, 1},
                     {"b", "e", 10, 1}});
  for (const auto& x : nodes)
    for (const auto& y : nodes)
      for (const auto& z : nodes)
        CHECK(t.base_latency_ms(x.id, z.id) <= t.base_latency_ms(x.id, y.id) + t.base_latency_ms(y.id, z.id) + 1e-12);
}

TEST_CASE("validate_app: pipeline, cycle and zero rate") {
  AppSpec a = pipeline();
  CHECK(validate_app(a).empty());
  CHECK(topological_order(a) == std::vector<ModuleId>{"m1", "m2", "m3"});

  AppSpec cyc = pipeline();
  cyc.edges.push_back({"m2", "m1", 1, 0});
  CHECK(has(validate_app(cyc), ViolationKind::CycleDetected));
  CHECK_THROWS_AS(topological_order(cyc), Error);

  AppSpec zero = pipeline();
  zero.edges[0].emitRateHz = 0;
  CHECK(has(validate_app(zero), ViolationKind::RateViolation));
}

TEST_CASE("validate_app: missing endpoints and privacy range") {
  AppSpec a = pipeline();
  a.edges.push_back({"m3", "ghost", 1, 0});
  a.modules[0].privacyLevel = 4;
  const auto r = validate_app(a);
  CHECK(has(r, ViolationKind::MissingEndpoint));
  CHECK(has(r, ViolationKind::PrivacyRange));
}

TEST_CASE("enum names round-trip") {
  for (Tier t : {Tier::IoTDevice, Tier::Gateway, Tier::EdgeNode, Tier::CloudDC}) CHECK(parse_tier(to_string(t)) == t);
  for (PriorityClass p : {PriorityClass::Emergency, PriorityClass::High, PriorityClass::Normal})
    CHECK(parse_priority_class(to_string(p)) == p);
  CHECK_FALSE(parse_latency_class("Fast").has_value());
}

TEST_CASE("gateways are listed by id") {
  Topology t({node("g2", Tier::Gateway), node("e"), node("g1", Tier::Gateway)}, {});
  const auto g = t.gateways();
  REQUIRE(g.size() == 2);
  CHECK(g[0]->id == "g1");
  CHECK(g[1]->id == "g2");
}
