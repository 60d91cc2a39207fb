#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "edgeward/domain.hpp"

namespace edgeward {

struct DemandForecast {
  double horizonS = 0.0;
  double expectedInstances = 0.0;
  double alpha = 1.0;
};

struct DemandObservation {
  double timeS = 0.0;
  double instancesInUse = 0.0;
};

// EWMA over the history in time order: s0 = v0, si = a*vi + (1-a)*s(i-1).
// Throws EmptyHistory.
DemandForecast forecast_demand(std::vector<DemandObservation> history, double alpha, double leadTimeS);

// (base + perInstance * n) * (1 + utilisation)
double provisioning_delay(const ProviderSpec& provider, int nInstances, double clusterUtilization);

struct Agreement {
  std::string providerId;
  std::string offerId;
  double agreedPricePerHour = 0.0;
  int count = 1;
  double availableAtS = 0.0;
  int rounds = 0;  // round in which the deal closed
};

// Alternate-offers stand-in. In round i the broker bids
// budget * (0.5 + 0.5 * i / maxRounds); the provider accepts a bid at or
// above its reserve price, otherwise counters with the reserve, which the
// broker takes when it fits the budget. Throws NegotiationFailed.
Agreement negotiate(const ProviderSpec& provider, const std::string& offerId, double budgetPerHour, int maxRounds,
                    double requestTimeS = 0.0);

struct InstanceRequirement {
  double mipsNeeded = 0.0;
  double ramNeeded = 0.0;
  double deadlineMs = 0.0;
  // Deadline the current capacity is projected to achieve. When it exceeds
  // deadlineMs the MIPS target is scaled up by projected/required.
  std::optional<double> projectedMs;
};

struct SelectionWeights {
  double wCost = 1.0;
  double wEnergy = 0.0;
};

// One purchasable unit: an offer at its agreed price.
struct CandidateUnit {
  InstanceOffer offer;
  double pricePerHour = 0.0;
};

struct InstanceSelection {
  std::vector<std::size_t> chosen;  // indices into the candidate list, ascending
  double totalMips = 0.0;
  double totalRam = 0.0;
  double objective = 0.0;  // Σ wCost*price + wEnergy*energyClass
};

double effective_mips_needed(const InstanceRequirement& req);
double unit_objective(const CandidateUnit& unit, const SelectionWeights& w);

// Greedy cover: repeatedly take the unit with the lowest objective per unit
// of still-needed MIPS (RAM once MIPS is met), then drop any unit whose
// removal keeps the cover. Throws Infeasible when candidates run out.
InstanceSelection select_instances(const InstanceRequirement& req, const std::vector<CandidateUnit>& candidates,
                                   const SelectionWeights& weights);

// Exhaustive minimum-objective cover over all subsets. Throws TooLarge above
// 12 candidates and Infeasible when no subset covers the requirement.
InstanceSelection select_instances_exhaustive(const InstanceRequirement& req,
                                              const std::vector<CandidateUnit>& candidates,
                                              const SelectionWeights& weights);

}  // namespace edgeward
