#pragma once

// Runtime LO-budget extension test for delayed HC jobs, with the
// max_extended_budget bookkeeping that keeps the online bounds safe.

#include <optional>
#include <span>
#include <vector>

#include "mcs/model.hpp"
#include "mcs/rta.hpp"

namespace mcs {

inline constexpr int kDefaultOnlineIterationCap = 120;

struct RuntimeTaskState {
  Task task;
  // Largest LO budget approved since the last reset; c_lo when none.
  Time max_extended_budget = 0;
  // LO budget of the current job.
  Time c_extended = 0;
  std::optional<Time> last_extension_time;

  static RuntimeTaskState fresh(const Task& task) {
    return RuntimeTaskState{task, task.c_lo, task.c_lo, std::nullopt};
  }
};

// States for every task of a prioritized taskset, in priority order.
std::vector<RuntimeTaskState> initial_states(const Taskset& ts);

class ExtensionRequest {
 public:
  // Throws std::invalid_argument when extra <= 0: an on-time checkpoint never
  // asks for more budget.
  ExtensionRequest(TaskId task, Time extra, Time requested_at = 0);

  TaskId task() const { return task_; }
  Time extra() const { return extra_; }
  Time requested_at() const { return requested_at_; }

 private:
  TaskId task_;
  Time extra_;
  Time requested_at_;
};

struct ExtendedResponse {
  TaskId id = 0;
  // Empty when the recurrence exceeded the period or the iteration cap.
  std::optional<Time> r_lo_ext;
  std::optional<Time> r_star_ext;
};

struct ExtensionDecision {
  bool approved = false;
  int iterations_used = 0;
  // Denied because the iteration cap ran out, not because of a period overrun.
  bool aborted = false;
  std::optional<TaskId> failing_task;
  // max(max_extended_budget, C(LO) + e) - C(LO)
  Time effective_extra = 0;
  // LO budget the delayed task would run with.
  Time requested_budget = 0;
  // Recomputed bounds for the delayed task and every lower-priority task, in
  // priority order, up to the first failure.
  std::vector<ExtendedResponse> responses;
};

// Pure evaluation of a budget-extension request. `states` must be in priority
// order and `offline` must hold converged R^LO (and R* for HC tasks).
ExtensionDecision evaluate_budget_change(std::span<const RuntimeTaskState> states,
                                         const ResponseTimes& offline, const ExtensionRequest& request,
                                         int iteration_cap = kDefaultOnlineIterationCap);

// Evaluates the request and, on approval, raises the task's
// max_extended_budget, sets its c_extended and stamps last_extension_time.
// A denial leaves every state untouched.
ExtensionDecision is_budget_change_approved(std::span<RuntimeTaskState> states,
                                            const ResponseTimes& offline, const ExtensionRequest& request,
                                            int iteration_cap = kDefaultOnlineIterationCap);

// Resets max_extended_budget to c_lo for every HC task that has not been
// extended within the last t_max ticks. Returns the number of tasks reset.
int maybe_reset_max_extended(std::span<RuntimeTaskState> states, Time now, Time t_max);

// Owns the runtime states of one taskset together with its offline bounds.
class OnlineScheduler {
 public:
  // Throws ConfigError when the taskset is not AMC-rtb schedulable.
  explicit OnlineScheduler(const Taskset& ts, int iteration_cap = kDefaultOnlineIterationCap);

  ExtensionDecision evaluate(const ExtensionRequest& request) const;
  ExtensionDecision request(const ExtensionRequest& request);
  // A new job starts with its original LO budget.
  void begin_job(TaskId id);
  int reset_stale(Time now);

  const RuntimeTaskState& state(TaskId id) const;
  std::span<const RuntimeTaskState> states() const { return states_; }
  const ResponseTimes& offline() const { return offline_; }
  Time max_period() const { return max_period_; }

 private:
  std::size_t index_of(TaskId id) const;

  std::vector<RuntimeTaskState> states_;
  ResponseTimes offline_;
  int iteration_cap_;
  Time max_period_ = 0;
};

}  // namespace mcs
