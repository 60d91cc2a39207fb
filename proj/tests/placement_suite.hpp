// Seeded random placement instances shared by the unit tests and the
// acceptance binary. Each instance has one gateway feeding the app and up to
// four compute nodes, and an app of up to four modules.
#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "edgeward/domain.hpp"
#include "edgeward/error.hpp"
#include "edgeward/placement.hpp"
#include "edgeward/rng.hpp"

namespace suite {

struct PlacementCase {
  std::vector<edgeward::NodeSpec> nodes;
  std::vector<edgeward::LinkSpec> links;
  edgeward::AppSpec app;
  edgeward::QoSWeights weights;
};

inline constexpr std::uint64_t kSuiteSeed = 20240611;
inline constexpr int kSuiteSize = 100;

inline double between(edgeward::Rng& r, double lo, double hi) { return lo + (hi - lo) * r.uniform01(); }
inline int pick(edgeward::Rng& r, int lo, int hi) { return lo + static_cast<int>(r.below(hi - lo + 1)); }

inline PlacementCase make_case(std::uint64_t seed, int index) {
  using namespace edgeward;
  Rng r(mix_seed(seed, static_cast<std::uint64_t>(index)));
  PlacementCase c;

  NodeSpec gw;
  gw.id = "gw";
  gw.tier = Tier::Gateway;
  c.nodes.push_back(gw);

  const int nCompute = pick(r, 1, 4);
  for (int i = 0; i < nCompute; ++i) {
    NodeSpec n;
    n.id = "n" + std::to_string(i);
    n.tier = r.uniform01() < 0.3 ? Tier::CloudDC : Tier::EdgeNode;
    n.cores = pick(r, 1, 4);
    n.mipsPerCore = between(r, 500, 3000);
    n.ramMB = between(r, 512, 4096);
    n.powerIdleW = between(r, 10, 100);
    n.powerMaxW = n.powerIdleW + between(r, 10, 200);
    n.trustLevel = n.tier == Tier::CloudDC ? pick(r, 0, 1) : pick(r, 1, 3);
    n.pricePerHour = between(r, 0.0, 2.0);
    c.nodes.push_back(n);
    c.links.push_back({"gw", n.id, between(r, 1, 60), between(r, 10, 1000)});
  }
  for (int i = 0; i < nCompute; ++i)
    for (int j = i + 1; j < nCompute; ++j)
      if (r.uniform01() < 0.5)
        c.links.push_back({"n" + std::to_string(i), "n" + std::to_string(j), between(r, 1, 30), between(r, 10, 1000)});

  AppSpec& a = c.app;
  a.id = "case" + std::to_string(index);
  a.sourceNode = "gw";
  a.qos.deadlineMs = between(r, 400, 5000);
  const int nModules = pick(r, 1, 4);
  for (int i = 0; i < nModules; ++i) {
    ModuleSpec m;
    m.id = "m" + std::to_string(i);
    m.taskLengthMI = between(r, 10, 1000);
    m.ramMB = between(r, 128, 2048);
    m.privacyLevel = std::max(0, pick(r, -3, 3));
    a.modules.push_back(m);
  }
  a.edges.push_back({std::string(kSourceEndpoint), "m0", between(r, 1, 64), between(r, 0.5, 10)});
  for (int j = 1; j < nModules; ++j) {
    const int from = pick(r, 0, j - 1);
    a.edges.push_back({"m" + std::to_string(from), "m" + std::to_string(j), between(r, 1, 64), 0});
    for (int i = 0; i < j; ++i)
      if (i != from && r.uniform01() < 0.25)
        a.edges.push_back({"m" + std::to_string(i), "m" + std::to_string(j), between(r, 1, 64), 0});
  }
  c.weights = {between(r, 0.05, 1), between(r, 0.05, 1), between(r, 0.05, 1)};
  return c;
}

struct CaseOutcome {
  bool oracleFeasible = false;
  bool greedyFeasible = false;
  double oracleScore = 0.0;
  double greedyScore = 0.0;
};

inline CaseOutcome run_case(const PlacementCase& c) {
  using namespace edgeward;
  Topology topo(c.nodes, c.links);
  ResidualCapacity residual(topo);
  Catalogue catalogue;
  ProfileStore profiles;
  PlacementContext ctx;
  ctx.topology = &topo;
  ctx.catalogue = &catalogue;
  ctx.profiles = &profiles;
  ctx.residual = &residual;

  CaseOutcome out;
  try {
    out.oracleScore = brute_force_placement(c.app, c.weights, ctx).score;
    out.oracleFeasible = true;
  } catch (const Error&) {
  }
  try {
    out.greedyScore = place_application(c.app, c.weights, ctx).score;
    out.greedyFeasible = true;
  } catch (const Error&) {
  }
  return out;
}

}  // namespace suite
