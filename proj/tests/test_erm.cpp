#include <doctest.h>

#include "edgeward/erm.hpp"
#include "edgeward/error.hpp"

using namespace edgeward;

namespace {

ClusterState cluster(const std::string& id, double total, double reserved, std::vector<std::string> peers = {}) {
  ClusterState c;
  c.clusterId = id;
  c.totalMips = total;
  c.reservedMips = reserved;
  c.peerClusters = std::move(peers);
  return c;
}

}  // namespace

TEST_CASE("admission respects the utilisation cap") {
  AdmissionController ac({cluster("A", 10000, 7000, {"B"}), cluster("B", 10000, 0)});

  SUBCASE("fits under the cap") {
    const auto d = ac.admit({500, LatencyClass::Tolerant}, "A");
    CHECK(d.kind == AdmissionDecision::Kind::Accepted);
    CHECK(ac.cluster("A")->reservedMips == doctest::Approx(7500));
  }
  SUBCASE("tolerant overflow goes to the cloud") {
    const auto d = ac.admit({1500, LatencyClass::Tolerant}, "A");
    CHECK(d.kind == AdmissionDecision::Kind::DelegatedCloud);
    CHECK(ac.cluster("A")->reservedMips == doctest::Approx(7000));
  }
  SUBCASE("sensitive overflow goes to the peer") {
    const auto d = ac.admit({1500, LatencyClass::Sensitive}, "A");
    CHECK(d.kind == AdmissionDecision::Kind::DelegatedPeer);
    CHECK(d.clusterId == "B");
    CHECK(ac.cluster("B")->reservedMips == doctest::Approx(1500));
  }
  SUBCASE("no peer has room") {
    CHECK(ac.admit({9000, LatencyClass::Sensitive}, "A").kind == AdmissionDecision::Kind::Rejected);
  }
  SUBCASE("release lowers the reservation but not the peak") {
    ac.admit({1000, LatencyClass::Tolerant}, "A");
    ac.release("A", 3000);
    CHECK(ac.cluster("A")->reservedMips == doctest::Approx(5000));
    CHECK(ac.peak_reserved("A") == doctest::Approx(8000));
  }
  CHECK_THROWS_AS(ac.admit({1, LatencyClass::Tolerant}, "nope"), Error);
  CHECK_THROWS_AS(ac.admit({0, LatencyClass::Tolerant}, "A"), Error);
}

TEST_CASE("peers are ordered by base latency") {
  NodeSpec a{.id = "a"}, b{.id = "b"}, c{.id = "c"};
  Topology t({a, b, c}, {{"a", "b", 30, 100}, {"a", "c", 5, 100}});
  std::vector<ClusterState> cs{cluster("A", 1, 0, {"B", "C"}), cluster("B", 1, 0), cluster("C", 1, 0)};
  cs[0].memberNodes = {"a"};
  cs[1].memberNodes = {"b"};
  cs[2].memberNodes = {"c"};
  order_peers_by_latency(cs, t);
  CHECK(cs[0].peerClusters == std::vector<std::string>{"C", "B"});
}

TEST_CASE("profile store keeps a running mean") {
  ProfileStore s;
  const ProfileKey k{"m", "edge"};
  CHECK(s.update(k, 2.0).meanServiceS == doctest::Approx(2.0));
  s.update(k, 3.0);
  CHECK(s.update(k, 4.0).meanServiceS == doctest::Approx(3.0));
  CHECK(s.find(k)->sampleCount == 3);
  CHECK_THROWS_AS(s.update(k, 0.0), Error);

  ProfileStore fwd, rev;
  const std::vector<double> xs{0.3, 1.7, 0.9, 2.2, 0.4};
  for (double x : xs) fwd.update(k, x);
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) rev.update(k, *it);
  CHECK(fwd.find(k)->meanServiceS == doctest::Approx(rev.find(k)->meanServiceS).epsilon(1e-12));
}

TEST_CASE("predict_service_time falls back to the static estimate") {
  NodeSpec n;
  n.mipsPerCore = 1000;
  ProfileStore s(2);
  const ProfileKey k{"m", "edge"};
  CHECK(s.predict_service_time(k, 1000, n) == doctest::Approx(1.0));
  s.update(k, 2.5);
  CHECK(s.predict_service_time(k, 1000, n) == doctest::Approx(1.0));
  s.update(k, 2.5);
  CHECK(s.predict_service_time(k, 1000, n) == doctest::Approx(2.5));
}

TEST_CASE("catalogue") {
  Catalogue cat;
  const CatalogueEntry img{"img", ImageInfo{1000, {"n1"}}, {{"arch", "x86"}}};
  cat.register_entry(img);
  cat.register_entry(img);
  CHECK(cat.size() == 1);
  CHECK(cat.lookup(CatalogueKind::Image, "img") == img);
  CHECK_THROWS_AS(cat.lookup(CatalogueKind::Data, "img"), Error);
  CHECK_THROWS_AS(cat.register_entry({"img", ImageInfo{2000, {}}, {}}), Error);
  try {
    cat.lookup(CatalogueKind::Image, "missing");
    FAIL("expected NotFound");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotFound);
  }
  cat.mark_cached("img", "n2");
  cat.mark_cached("img", "n2");
  CHECK(std::get<ImageInfo>(cat.lookup(CatalogueKind::Image, "img").info).cachedOnNodes.size() == 2);
}

TEST_CASE("data_movement_cost") {
  NodeSpec a{.id = "a"}, b{.id = "b"}, c{.id = "c"};
  Topology t({a, b, c}, {{"a", "b", 2, 100}, {"b", "c", 20, 100}});
  Catalogue cat;
  cat.register_entry({"ds", DataInfo{125, {"a", "c"}}, {}});
  CHECK(data_movement_cost(cat, "ds", "a", t) == 0.0);
  // b is 2 ms from a and 20 ms from c; the nearer copy wins.
  CHECK(data_movement_cost(cat, "ds", "b", t) == doctest::Approx(0.012));
  CHECK_THROWS_AS(data_movement_cost(cat, "nope", "a", t), Error);
  CHECK(image_transfer_cost(cat, "", "a", t) == 0.0);
  CHECK(image_transfer_cost(cat, "unregistered", "a", t) == 0.0);
}
