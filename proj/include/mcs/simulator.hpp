#pragma once

// Discrete-event simulation of fixed-priority preemptive scheduling on one
// processor under AMC and AMC with progress-aware budget extension.

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "mcs/model.hpp"
#include "mcs/online.hpp"
#include "mcs/prediction.hpp"
#include "mcs/workload.hpp"

namespace mcs {

enum class Policy { Amc, Pastime };

const char* to_string(Policy policy);
Policy parse_policy(std::string_view text);

enum class SwitchBack {
  // Back to LO mode once no in-flight HC job has overrun its LO budget.
  NoOverrun,
  // Back to LO mode at the first idle instant.
  IdleInstant,
};

struct SimOptions {
  Policy policy = Policy::Amc;
  PredictionModel model = LinearModel{};
  Time horizon = 0;
  // CPU time an approved extension costs the requesting job. The requested
  // extension includes it.
  Time decision_overhead = 130;
  int iteration_cap = kDefaultOnlineIterationCap;
  SwitchBack switch_back = SwitchBack::NoOverrun;
};

enum class EventKind {
  Release,
  CheckpointReached,
  // Enforcement timer: a job used up its current budget with work left.
  BudgetExhausted,
  JobComplete,
  // LC job discarded by a mode switch or its own budget.
  JobDropped,
  DeadlineMiss,
  ModeSwitchHI,
  ModeSwitchLO,
  ExtensionApproved,
  ExtensionDenied,
  // Job still in flight when the horizon was reached.
  HorizonEnd,
};

const char* to_string(EventKind kind);

inline constexpr TaskId kSystem = -1;

struct SimEvent {
  Time time = 0;
  EventKind kind = EventKind::Release;
  TaskId task = kSystem;
  Criticality level = Criticality::LC;
  // CPU time the job had consumed when the event fired.
  Time executed = 0;
  // JobComplete: response time. CheckpointReached: predicted total.
  // ExtensionApproved: new LO budget. ExtensionDenied: requested budget.
  // BudgetExhausted: the budget that ran out.
  Time value = 0;
  // Online-test iterations for extension decisions.
  int iterations = 0;
  // ExtensionDenied: the iteration cap was hit.
  bool capped = false;

  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

using SimTrace = std::vector<SimEvent>;

struct PredictionErrorStats {
  int count = 0;
  // Signed (predicted - actual) / actual in percent, over extended jobs that
  // completed.
  double mean_pct = 0.0;
  double min_pct = 0.0;
  double max_pct = 0.0;
};

struct SimMetrics {
  Time horizon = 0;
  Time lc_cpu_time = 0;
  double lc_avg_utilization = 0.0;
  int lc_jobs_completed = 0;
  int lc_jobs_dropped = 0;
  int lc_deadline_misses = 0;
  int hc_jobs_completed = 0;
  int hc_deadline_misses = 0;
  int hi_mode_switches = 0;
  Time hi_mode_time = 0;
  int extensions_approved = 0;
  int extensions_denied = 0;
  // Denials caused by the iteration cap.
  int extensions_aborted = 0;
  PredictionErrorStats prediction_error;
  // iterations -> number of decisions
  std::map<int, int> online_iterations;
  int max_online_iterations = 0;
  std::map<TaskId, Time> worst_response;
};

struct SimResult {
  SimTrace trace;
  SimMetrics metrics;
};

// Runs the schedule up to options.horizon. Requires a prioritized taskset and
// HC demands within C(HI); the PASTime policy also needs a checkpoint profile
// on every HC task and an AMC-rtb schedulable set for its online test. Throws
// ConfigError otherwise.
SimResult simulate(const Taskset& ts, const DemandStreams& demands, const SimOptions& options);

// Derives the metrics from a complete trace.
SimMetrics compute_metrics(const SimTrace& trace, Time horizon);

// time,kind,task,level,executed,value,iterations
void write_trace_csv(const SimTrace& trace, std::ostream& out);

}  // namespace mcs
