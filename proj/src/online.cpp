#include "mcs/online.hpp"

#include <algorithm>
#include <stdexcept>

namespace mcs {

std::vector<RuntimeTaskState> initial_states(const Taskset& ts) {
  if (!ts.fully_prioritized()) throw ConfigError("runtime states need assigned priorities");
  Taskset sorted = ts;
  sort_by_priority(sorted);
  std::vector<RuntimeTaskState> states;
  states.reserve(sorted.tasks.size());
  for (const Task& t : sorted.tasks) states.push_back(RuntimeTaskState::fresh(t));
  return states;
}

ExtensionRequest::ExtensionRequest(TaskId task, Time extra, Time requested_at)
    : task_(task), extra_(extra), requested_at_(requested_at) {
  if (extra <= 0) throw std::invalid_argument("extension request needs a positive extra budget");
}

namespace {

std::size_t find_state(std::span<const RuntimeTaskState> states, TaskId id) {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].task.id == id) return i;
  }
  throw UnknownTask("unknown task id " + std::to_string(id));
}

}  // namespace

ExtensionDecision evaluate_budget_change(std::span<const RuntimeTaskState> states,
                                         const ResponseTimes& offline, const ExtensionRequest& request,
                                         int iteration_cap) {
  const std::size_t k = find_state(states, request.task());
  const Task& delayed = states[k].task;
  if (!delayed.is_hc()) {
    throw NotHighCriticality("task " + std::to_string(delayed.id) + " is not high-criticality");
  }

  ExtensionDecision d;
  d.requested_budget = std::max(states[k].max_extended_budget, delayed.c_lo + request.extra());
  d.effective_extra = d.requested_budget - delayed.c_lo;

  // LO budgets used in the extended recurrence: the running maximum for every
  // task, and the candidate budget for the delayed one.
  auto budget = [&](std::size_t j) { return j == k ? d.requested_budget : states[j].max_extended_budget; };

  std::vector<const Task*> hp;
  for (std::size_t j = 0; j < k; ++j) hp.push_back(&states[j].task);

  auto deny = [&](const FixedPoint& fp, TaskId who) {
    d.approved = false;
    d.aborted = fp.capped;
    if (!fp.capped) d.failing_task = who;
    return d;
  };

  for (std::size_t i = k; i < states.size(); ++i) {
    const Task& task = states[i].task;
    const TaskResponse& off = offline.at(task.id);
    if (!off.r_lo || (task.is_hc() && !off.r_star)) {
      throw ConfigError("offline bounds missing for task " + std::to_string(task.id));
    }
    ExtendedResponse ext{task.id, std::nullopt, std::nullopt};

    auto interference = [&](Time r) {
      Time sum = 0;
      for (std::size_t j = 0; j < i; ++j) sum += job_demand(r, states[j].task.period, budget(j));
      return sum;
    };
    FixedPoint lo = fixed_point(budget(i), interference, task.period, *off.r_lo + d.effective_extra,
                                iteration_cap - d.iterations_used);
    d.iterations_used += lo.iterations;
    ext.r_lo_ext = lo.value;
    if (!lo.value) {
      d.responses.push_back(ext);
      return deny(lo, task.id);
    }

    if (task.is_hc()) {
      FixedPoint star = star_response(task, hp, *lo.value, *off.r_star, iteration_cap - d.iterations_used);
      d.iterations_used += star.iterations;
      ext.r_star_ext = star.value;
      if (!star.value) {
        d.responses.push_back(ext);
        return deny(star, task.id);
      }
    }
    d.responses.push_back(ext);
    hp.push_back(&task);
  }
  d.approved = true;
  return d;
}

ExtensionDecision is_budget_change_approved(std::span<RuntimeTaskState> states,
                                            const ResponseTimes& offline, const ExtensionRequest& request,
                                            int iteration_cap) {
  ExtensionDecision d = evaluate_budget_change(states, offline, request, iteration_cap);
  if (d.approved) {
    RuntimeTaskState& s = states[find_state(states, request.task())];
    s.max_extended_budget = std::max(s.max_extended_budget, s.task.c_lo + request.extra());
    s.c_extended = s.task.c_lo + request.extra();
    s.last_extension_time = request.requested_at();
  }
  return d;
}

int maybe_reset_max_extended(std::span<RuntimeTaskState> states, Time now, Time t_max) {
  int reset = 0;
  for (RuntimeTaskState& s : states) {
    if (!s.task.is_hc()) continue;
    if (s.last_extension_time && *s.last_extension_time > now - t_max) continue;
    if (s.max_extended_budget != s.task.c_lo) ++reset;
    s.max_extended_budget = s.task.c_lo;
  }
  return reset;
}

OnlineScheduler::OnlineScheduler(const Taskset& ts, int iteration_cap)
    : states_(initial_states(ts)), iteration_cap_(iteration_cap), max_period_(ts.max_period()) {
  SchedulabilityVerdict v = amc_rtb_schedulable(ts);
  if (!v.schedulable) throw ConfigError("taskset is not AMC-rtb schedulable");
  offline_ = std::move(v.response_times);
}

ExtensionDecision OnlineScheduler::evaluate(const ExtensionRequest& request) const {
  return evaluate_budget_change(states_, offline_, request, iteration_cap_);
}

ExtensionDecision OnlineScheduler::request(const ExtensionRequest& request) {
  return is_budget_change_approved(states_, offline_, request, iteration_cap_);
}

void OnlineScheduler::begin_job(TaskId id) {
  RuntimeTaskState& s = states_[index_of(id)];
  s.c_extended = s.task.c_lo;
}

int OnlineScheduler::reset_stale(Time now) { return maybe_reset_max_extended(states_, now, max_period_); }

const RuntimeTaskState& OnlineScheduler::state(TaskId id) const { return states_[index_of(id)]; }

std::size_t OnlineScheduler::index_of(TaskId id) const { return find_state(states_, id); }

}  // namespace mcs
