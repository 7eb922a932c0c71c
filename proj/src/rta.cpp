#include "mcs/rta.hpp"

#include <algorithm>

namespace mcs {

namespace {

std::vector<const Task*> higher_priority(const Taskset& ts, TaskId id) {
  PriorityBands bands = priority_bands(ts, id);
  std::vector<const Task*> hp;
  hp.reserve(bands.hp.size());
  for (TaskId j : bands.hp) hp.push_back(&ts.at(j));
  return hp;
}

void require_hc(const Task& task) {
  if (!task.is_hc()) {
    throw NotHighCriticality("task " + std::to_string(task.id) + " is not high-criticality");
  }
}

}  // namespace

FixedPoint lo_response(const Task& task, std::span<const Task* const> hp) {
  auto interference = [hp](Time r) {
    Time sum = 0;
    for (const Task* j : hp) sum += job_demand(r, j->period, j->c_lo);
    return sum;
  };
  return fixed_point(task.c_lo, interference, task.period, task.c_lo);
}

// LC tasks with a non-zero c_hi keep running in HI mode with that reduced
// budget; with the default c_hi = 0 their HI-mode terms vanish.
FixedPoint hi_response(const Task& task, std::span<const Task* const> hp) {
  require_hc(task);
  auto interference = [hp](Time r) {
    Time sum = 0;
    for (const Task* j : hp) sum += job_demand(r, j->period, j->c_hi);
    return sum;
  };
  return fixed_point(task.c_hi, interference, task.period, task.c_hi);
}

FixedPoint star_response(const Task& task, std::span<const Task* const> hp, Time r_lo,
                         std::optional<Time> init, int cap) {
  require_hc(task);
  Time lc_before_switch = 0;
  for (const Task* j : hp) {
    if (!j->is_hc()) lc_before_switch += job_demand(r_lo, j->period, j->c_lo);
  }
  auto interference = [hp, r_lo, lc_before_switch](Time r) {
    Time sum = lc_before_switch;
    for (const Task* j : hp) {
      if (j->is_hc()) {
        sum += job_demand(r, j->period, j->c_hi);
      } else if (j->c_hi > 0) {
        Time extra_jobs = ceil_div(r, j->period) - ceil_div(r_lo, j->period);
        if (extra_jobs > 0) sum += extra_jobs * j->c_hi;
      }
    }
    return sum;
  };
  return fixed_point(task.c_hi, interference, task.period, init.value_or(task.c_hi + lc_before_switch),
                     cap);
}

FixedPoint response_time_lo(const Taskset& ts, TaskId id) {
  return lo_response(ts.at(id), higher_priority(ts, id));
}

FixedPoint response_time_hi(const Taskset& ts, TaskId id) {
  const Task& task = ts.at(id);
  require_hc(task);
  return hi_response(task, higher_priority(ts, id));
}

FixedPoint response_time_star(const Taskset& ts, TaskId id, Time r_lo) {
  const Task& task = ts.at(id);
  require_hc(task);
  return star_response(task, higher_priority(ts, id), r_lo);
}

const TaskResponse& ResponseTimes::at(TaskId id) const {
  for (const TaskResponse& r : tasks) {
    if (r.id == id) return r;
  }
  throw UnknownTask("no response times for task " + std::to_string(id));
}

ResponseTimes analyze(const Taskset& ts) {
  if (!ts.fully_prioritized()) throw ConfigError("response-time analysis needs assigned priorities");
  Taskset sorted = ts;
  sort_by_priority(sorted);
  ResponseTimes out;
  std::vector<const Task*> hp;
  for (const Task& t : sorted.tasks) {
    TaskResponse r{t.id, t.level, t.period, {}, {}, {}};
    r.r_lo = lo_response(t, hp).value;
    if (t.is_hc()) {
      r.r_hi = hi_response(t, hp).value;
      if (r.r_lo) r.r_star = star_response(t, hp, *r.r_lo).value;
    }
    out.tasks.push_back(r);
    hp.push_back(&t);
  }
  return out;
}

SchedulabilityVerdict amc_rtb_schedulable(const Taskset& ts) {
  SchedulabilityVerdict v;
  v.response_times = analyze(ts);
  v.schedulable = true;
  for (const TaskResponse& r : v.response_times.tasks) {
    bool ok = r.r_lo && *r.r_lo <= r.period;
    if (ok && r.level == Criticality::HC) ok = r.r_star && *r.r_star <= r.period;
    if (!ok) {
      v.schedulable = false;
      v.failing_task = r.id;
      break;
    }
  }
  return v;
}

namespace {

bool fits_lowest(const Task& candidate, std::span<const Task* const> others) {
  FixedPoint lo = lo_response(candidate, others);
  if (!lo.value || *lo.value > candidate.period) return false;
  if (!candidate.is_hc()) return true;
  FixedPoint star = star_response(candidate, others, *lo.value);
  return star.value && *star.value <= candidate.period;
}

}  // namespace

Taskset audsley_assign(Taskset ts) {
  const int n = static_cast<int>(ts.tasks.size());
  std::vector<Task*> unassigned;
  for (Task& t : ts.tasks) unassigned.push_back(&t);

  for (int level = n; level >= 1; --level) {
    Task* chosen = nullptr;
    for (Task* candidate : unassigned) {
      std::vector<const Task*> others;
      for (Task* t : unassigned) {
        if (t != candidate) others.push_back(t);
      }
      if (!fits_lowest(*candidate, others)) continue;
      if (!chosen || candidate->period > chosen->period ||
          (candidate->period == chosen->period && candidate->id < chosen->id)) {
        chosen = candidate;
      }
    }
    if (!chosen) {
      throw Infeasible("no task is schedulable at priority level " + std::to_string(level));
    }
    chosen->priority = level;
    std::erase(unassigned, chosen);
  }
  sort_by_priority(ts);
  return ts;
}

}  // namespace mcs
