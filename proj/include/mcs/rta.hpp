#pragma once

// Offline AMC-rtb response-time analysis and Audsley priority assignment.

#include <optional>
#include <span>
#include <vector>

#include "mcs/model.hpp"

namespace mcs {

inline constexpr int kDefaultHardIterationCap = 10000;

struct FixedPoint {
  // Empty when the recurrence diverged past its bound or hit the iteration cap.
  std::optional<Time> value;
  // Number of updates R <- lead + interference(R) performed.
  int iterations = 0;
  // True when iteration stopped because the cap was reached.
  bool capped = false;

  bool converged() const { return value.has_value(); }
};

// Iterates R <- lead + interference(R) from init until R is stable. Stops with
// an empty result as soon as R exceeds bound or `cap` updates have been spent
// without reaching a fixed point. interference must be monotone.
template <class Interference>
FixedPoint fixed_point(Time lead, Interference&& interference, Time bound, Time init,
                       int cap = kDefaultHardIterationCap) {
  FixedPoint fp;
  Time r = init;
  while (fp.iterations < cap) {
    Time next = lead + interference(r);
    ++fp.iterations;
    if (next > bound) return fp;
    if (next == r) {
      fp.value = r;
      return fp;
    }
    r = next;
  }
  fp.capped = true;
  return fp;
}

// ceil(window / period) * budget
inline Time job_demand(Time window, Time period, Time budget) {
  return ceil_div(window, period) * budget;
}

// R^LO = C(LO) + sum_{hp} ceil(R/T_j) C_j(LO), init C(LO).
FixedPoint response_time_lo(const Taskset& ts, TaskId id);
// R^HI = C(HI) + sum_{hpHC} ceil(R/T_j) C_j(HI), init C(HI). Throws NotHighCriticality.
FixedPoint response_time_hi(const Taskset& ts, TaskId id);
// R* = C(HI) + sum_{hpHC} ceil(R*/T_j) C_j(HI) + sum_{hpLC} ceil(R^LO/T_j) C_j(LO).
// Throws NotHighCriticality.
FixedPoint response_time_star(const Taskset& ts, TaskId id, Time r_lo);

// The same recurrences with an explicit higher-priority set, for callers that
// evaluate hypothetical priority orders.
FixedPoint lo_response(const Task& task, std::span<const Task* const> hp);
FixedPoint hi_response(const Task& task, std::span<const Task* const> hp);
// star_response starts from `init` when given (it must not exceed the least
// fixed point) and spends at most `cap` updates.
FixedPoint star_response(const Task& task, std::span<const Task* const> hp, Time r_lo,
                         std::optional<Time> init = std::nullopt, int cap = kDefaultHardIterationCap);

struct TaskResponse {
  TaskId id = 0;
  Criticality level = Criticality::LC;
  Time period = 0;
  std::optional<Time> r_lo;
  std::optional<Time> r_hi;
  std::optional<Time> r_star;
};

struct ResponseTimes {
  // One entry per task, in priority order.
  std::vector<TaskResponse> tasks;

  const TaskResponse& at(TaskId id) const;
};

struct SchedulabilityVerdict {
  bool schedulable = false;
  std::optional<TaskId> failing_task;
  ResponseTimes response_times;
};

// Requires a fully prioritized taskset (ConfigError otherwise).
ResponseTimes analyze(const Taskset& ts);

// Schedulable iff R^LO <= T for every task and R* <= T for every HC task.
SchedulabilityVerdict amc_rtb_schedulable(const Taskset& ts);

// Lowest-priority-first Audsley assignment under AMC-rtb. Among the tasks that
// fit a level, the one with the largest period (then smallest id) takes it.
// Returns a copy with priorities 1..n, sorted. Throws Infeasible.
Taskset audsley_assign(Taskset ts);

}  // namespace mcs
