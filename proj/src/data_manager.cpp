#include "edgeward/data_manager.hpp"

#include <algorithm>
#include <cmath>

#include "edgeward/error.hpp"

namespace edgeward {

double sensing_accuracy(const DeviceProfile& device, double rateHz) {
  return std::min(1.0, rateHz / device.refRateHz);
}

CalibrationResult calibrate_frequency(const DeviceProfile& device, double requiredAccuracy, double qosFreshnessMs) {
  if (!(requiredAccuracy > 0.0 && requiredAccuracy <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "requiredAccuracy must be in (0, 1]");
  if (!(qosFreshnessMs > 0.0)) throw Error(ErrorKind::InvalidArgument, "freshness must be > 0");

  const double forAccuracy = requiredAccuracy * device.refRateHz;
  const double forFreshness = 1000.0 / qosFreshnessMs;
  if (forFreshness > device.maxRateHz)
    throw Error(ErrorKind::Infeasible, device.deviceId + ": freshness needs more than maxRateHz");

  CalibrationResult r;
  r.rateHz = std::min(std::max(forAccuracy, forFreshness), device.maxRateHz);
  if (device.energyPerSampleMJ > 0.0) {
    const double batteryCap = device.batteryBudgetMJPerHour / (3600.0 * device.energyPerSampleMJ);
    if (batteryCap < r.rateHz) {
      r.rateHz = batteryCap;
      r.budgetLimited = true;
    }
  }
  return r;
}

std::string to_string(const WorkloadCategory& c) {
  std::string s = c.arrival == ArrivalPattern::EventDriven ? "EventDriven" : "StreamBased";
  s += '/';
  s += c.intensity == Intensity::ComputeIntensive ? "ComputeIntensive" : "DataIntensive";
  return s;
}

WorkloadProfile categorize_workload(const std::vector<WorkloadSample>& samples,
                                    const CategorizationThresholds& thresholds) {
  if (samples.size() < 2) throw Error(ErrorKind::InsufficientSamples, "need at least 2 samples");
  const double n = static_cast<double>(samples.size());

  double sumKb = 0, sumGap = 0, sumMi = 0, minGap = samples.front().interArrivalS;
  for (const auto& s : samples) {
    sumKb += s.tupleKb;
    sumGap += s.interArrivalS;
    sumMi += s.taskMI;
    minGap = std::min(minGap, s.interArrivalS);
  }
  const double meanKb = sumKb / n;
  const double meanGap = sumGap / n;
  const double meanMi = sumMi / n;

  double ss = 0;
  for (const auto& s : samples) ss += (s.interArrivalS - meanGap) * (s.interArrivalS - meanGap);
  const double stddev = std::sqrt(ss / (n - 1.0));

  WorkloadProfile p;
  p.meanTupleKb = meanKb;
  p.rateHz = meanGap > 0 ? 1.0 / meanGap : 0.0;
  p.burstiness = (minGap > 0 && meanGap > 0) ? meanGap / minGap : 1.0;
  p.interArrivalCv = meanGap > 0 ? stddev / meanGap : 0.0;
  p.miPerKb = meanKb > 0 ? meanMi / meanKb : (meanMi > 0 ? INFINITY : 0.0);
  p.category.arrival = p.interArrivalCv > thresholds.cvCut ? ArrivalPattern::EventDriven : ArrivalPattern::StreamBased;
  p.category.intensity =
      p.miPerKb > thresholds.computeMiPerKb ? Intensity::ComputeIntensive : Intensity::DataIntensive;
  return p;
}

SensorSample aggregate(const std::vector<SensorSample>& window, AggregationPolicy policy) {
  if (window.empty()) throw Error(ErrorKind::EmptyWindow, "aggregation window is empty");
  SensorSample out;
  out.timeS = std::max_element(window.begin(), window.end(), [](auto& a, auto& b) { return a.timeS < b.timeS; })->timeS;
  switch (policy) {
    case AggregationPolicy::Mean: {
      double sum = 0;
      for (const auto& s : window) sum += s.value;
      out.value = sum / static_cast<double>(window.size());
      break;
    }
    case AggregationPolicy::Last:
      out.value = window.back().value;
      break;
    case AggregationPolicy::Max:
      out.value = std::max_element(window.begin(), window.end(), [](auto& a, auto& b) { return a.value < b.value; })->value;
      break;
  }
  return out;
}

}  // namespace edgeward
