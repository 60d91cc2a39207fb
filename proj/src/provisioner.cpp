#include "edgeward/provisioner.hpp"

#include <algorithm>
#include <limits>

#include "edgeward/error.hpp"

namespace edgeward {

DemandForecast forecast_demand(std::vector<DemandObservation> history, double alpha, double leadTimeS) {
  if (history.empty()) throw Error(ErrorKind::EmptyHistory, "no demand observations");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be in (0, 1]");
  std::stable_sort(history.begin(), history.end(), [](auto& a, auto& b) { return a.timeS < b.timeS; });
  double s = history.front().instancesInUse;
  for (std::size_t i = 1; i < history.size(); ++i) s = alpha * history[i].instancesInUse + (1.0 - alpha) * s;
  return {leadTimeS, std::max(0.0, s), alpha};
}

double provisioning_delay(const ProviderSpec& provider, int nInstances, double clusterUtilization) {
  if (nInstances < 1) throw Error(ErrorKind::InvalidArgument, "nInstances must be >= 1");
  if (clusterUtilization < 0.0 || clusterUtilization > 1.0)
    throw Error(ErrorKind::InvalidArgument, "clusterUtilization must be in [0, 1]");
  return (provider.baseProvisionDelayS + provider.perInstanceDelayS * nInstances) * (1.0 + clusterUtilization);
}

Agreement negotiate(const ProviderSpec& provider, const std::string& offerId, double budgetPerHour, int maxRounds,
                    double requestTimeS) {
  if (maxRounds < 1) throw Error(ErrorKind::InvalidArgument, "maxRounds must be >= 1");
  const InstanceOffer* offer = provider.offer(offerId);
  if (!offer) throw Error(ErrorKind::NotFound, provider.id + "/" + offerId);

  const double reserve = offer->pricePerHour * provider.reservePriceFactor;
  Agreement a;
  a.providerId = provider.id;
  a.offerId = offerId;
  a.availableAtS = requestTimeS + provisioning_delay(provider, 1, 0.0);
  for (int i = 1; i <= maxRounds; ++i) {
    const double bid = budgetPerHour * (0.5 + 0.5 * static_cast<double>(i) / maxRounds);
    a.rounds = i;
    if (bid >= reserve) {
      a.agreedPricePerHour = bid;
      return a;
    }
    if (reserve <= budgetPerHour) {
      a.agreedPricePerHour = reserve;
      return a;
    }
  }
  throw Error(ErrorKind::NegotiationFailed, provider.id + "/" + offerId + ": reserve exceeds budget");
}

double effective_mips_needed(const InstanceRequirement& req) {
  if (req.projectedMs && req.deadlineMs > 0 && *req.projectedMs > req.deadlineMs)
    return req.mipsNeeded * (*req.projectedMs / req.deadlineMs);
  return req.mipsNeeded;
}

double unit_objective(const CandidateUnit& unit, const SelectionWeights& w) {
  return w.wCost * unit.pricePerHour + w.wEnergy * unit.offer.energyClass;
}

namespace {

void check_weights(const SelectionWeights& w) {
  if (w.wCost < 0 || w.wEnergy < 0 || !(w.wCost + w.wEnergy > 0))
    throw Error(ErrorKind::InvalidArgument, "weights must be nonnegative with a positive sum");
}

double unit_mips(const CandidateUnit& u) { return u.offer.cores * u.offer.mipsPerCore; }

bool covers(double mips, double ram, double needMips, double needRam) { return mips >= needMips && ram >= needRam; }

}  // namespace

InstanceSelection select_instances(const InstanceRequirement& req, const std::vector<CandidateUnit>& candidates,
                                   const SelectionWeights& weights) {
  check_weights(weights);
  const double needMips = effective_mips_needed(req);
  const double needRam = req.ramNeeded;

  // Ratio greedy on the remaining requirement. Before each pick, the cheapest
  // single unit that would finish the requirement on its own is noted as a
  // candidate completion; the cheapest complete set seen wins. Pure ratio
  // greedy overshoots badly on the last unit without this.
  std::vector<bool> used(candidates.size(), false);
  double mips = 0.0, ram = 0.0, objective = 0.0;
  std::optional<std::vector<bool>> best;
  double bestObjective = std::numeric_limits<double>::infinity();

  auto consider = [&](const std::vector<bool>& set, double obj) {
    if (obj < bestObjective) {
      bestObjective = obj;
      best = set;
    }
  };

  while (!covers(mips, ram, needMips, needRam)) {
    std::size_t finisher = candidates.size();
    double finisherObj = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (used[i]) continue;
      const double o = unit_objective(candidates[i], weights);
      if (o < finisherObj && covers(mips + unit_mips(candidates[i]), ram + candidates[i].offer.ramMB, needMips, needRam)) {
        finisherObj = o;
        finisher = i;
      }
    }
    if (finisher != candidates.size()) {
      auto set = used;
      set[finisher] = true;
      consider(set, objective + finisherObj);
    }

    const double remMips = needMips - mips;
    const double remRam = needRam - ram;
    std::size_t pick = candidates.size();
    double bestRatio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (used[i]) continue;
      const auto& u = candidates[i];
      const double useful = remMips > 0 ? std::min(unit_mips(u), remMips) : std::min(u.offer.ramMB, remRam);
      if (!(useful > 0)) continue;
      const double ratio = unit_objective(u, weights) / useful;
      if (ratio < bestRatio) {
        bestRatio = ratio;
        pick = i;
      }
    }
    if (pick == candidates.size()) break;
    used[pick] = true;
    mips += unit_mips(candidates[pick]);
    ram += candidates[pick].offer.ramMB;
    objective += unit_objective(candidates[pick], weights);
  }
  if (covers(mips, ram, needMips, needRam)) consider(used, objective);
  if (!best) throw Error(ErrorKind::Infeasible, "offers exhausted before requirement met");
  used = *best;

  // Prune redundant units, most expensive first.
  InstanceSelection sel;
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (used[i]) {
      picked.push_back(i);
      sel.totalMips += unit_mips(candidates[i]);
      sel.totalRam += candidates[i].offer.ramMB;
    }
  std::stable_sort(picked.begin(), picked.end(), [&](std::size_t a, std::size_t b) {
    return unit_objective(candidates[a], weights) > unit_objective(candidates[b], weights);
  });
  for (std::size_t i : picked) {
    const double m = sel.totalMips - unit_mips(candidates[i]);
    const double r = sel.totalRam - candidates[i].offer.ramMB;
    if (covers(m, r, needMips, needRam)) {
      used[i] = false;
      sel.totalMips = m;
      sel.totalRam = r;
    }
  }

  // One-for-one swaps toward cheaper unused units while coverage holds.
  for (bool improved = true; improved;) {
    improved = false;
    for (std::size_t i = 0; i < candidates.size() && !improved; ++i) {
      if (!used[i]) continue;
      for (std::size_t j = 0; j < candidates.size(); ++j) {
        if (used[j] || !(unit_objective(candidates[j], weights) < unit_objective(candidates[i], weights))) continue;
        const double m = sel.totalMips - unit_mips(candidates[i]) + unit_mips(candidates[j]);
        const double r = sel.totalRam - candidates[i].offer.ramMB + candidates[j].offer.ramMB;
        if (!covers(m, r, needMips, needRam)) continue;
        used[i] = false;
        used[j] = true;
        sel.totalMips = m;
        sel.totalRam = r;
        improved = true;
        break;
      }
    }
  }

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!used[i]) continue;
    sel.chosen.push_back(i);
    sel.objective += unit_objective(candidates[i], weights);
  }
  return sel;
}

InstanceSelection select_instances_exhaustive(const InstanceRequirement& req,
                                              const std::vector<CandidateUnit>& candidates,
                                              const SelectionWeights& weights) {
  check_weights(weights);
  if (candidates.size() > 12) throw Error(ErrorKind::TooLarge, "exhaustive selection limited to 12 candidates");
  const double needMips = effective_mips_needed(req);
  const std::size_t n = candidates.size();

  std::optional<InstanceSelection> best;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    InstanceSelection s;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask & (1u << i))) continue;
      s.chosen.push_back(i);
      s.totalMips += unit_mips(candidates[i]);
      s.totalRam += candidates[i].offer.ramMB;
      s.objective += unit_objective(candidates[i], weights);
    }
    if (!covers(s.totalMips, s.totalRam, needMips, req.ramNeeded)) continue;
    if (!best || s.objective < best->objective) best = std::move(s);
  }
  if (!best) throw Error(ErrorKind::Infeasible, "no subset of offers meets the requirement");
  return *best;
}

}  // namespace edgeward
