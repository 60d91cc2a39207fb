#pragma once

#include <string>
#include <vector>

namespace edgeward {

struct DeviceProfile {
  std::string deviceId;
  double maxRateHz = 1.0;
  double energyPerSampleMJ = 0.0;
  double batteryBudgetMJPerHour = 0.0;
  double refRateHz = 1.0;  // rate at which accuracy reaches 1.0
};

struct CalibrationResult {
  double rateHz = 0.0;
  bool budgetLimited = false;
};

// accuracy(f) = min(1, f/refRateHz). Picks the lowest rate meeting both the
// accuracy target and the freshness gap, capped at maxRateHz and at the
// battery budget. Throws Infeasible when freshness alone needs more than
// maxRateHz.
CalibrationResult calibrate_frequency(const DeviceProfile& device, double requiredAccuracy, double qosFreshnessMs);

double sensing_accuracy(const DeviceProfile& device, double rateHz);

enum class ArrivalPattern { EventDriven, StreamBased };
enum class Intensity { ComputeIntensive, DataIntensive };

struct WorkloadCategory {
  ArrivalPattern arrival = ArrivalPattern::StreamBased;
  Intensity intensity = Intensity::DataIntensive;
  friend bool operator==(const WorkloadCategory&, const WorkloadCategory&) = default;
};

std::string to_string(const WorkloadCategory& c);

struct WorkloadSample {
  double tupleKb = 0.0;
  double interArrivalS = 0.0;
  double taskMI = 0.0;
};

struct WorkloadProfile {
  double meanTupleKb = 0.0;
  double rateHz = 0.0;
  double burstiness = 1.0;  // peak/mean rate
  double miPerKb = 0.0;
  double interArrivalCv = 0.0;
  WorkloadCategory category;
};

struct CategorizationThresholds {
  double cvCut = 1.0;             // CV of inter-arrivals above this is event-driven
  double computeMiPerKb = 50.0;   // tau
};

// Throws InsufficientSamples below two samples. The inter-arrival CV uses the
// unbiased (n-1) sample variance.
WorkloadProfile categorize_workload(const std::vector<WorkloadSample>& samples,
                                    const CategorizationThresholds& thresholds = {});

enum class AggregationPolicy { Mean, Last, Max };

struct SensorSample {
  double timeS = 0.0;
  double value = 0.0;
};

// Window reduction at the gateway. The result carries the window's latest
// timestamp. Throws EmptyWindow.
SensorSample aggregate(const std::vector<SensorSample>& window, AggregationPolicy policy);

}  // namespace edgeward
