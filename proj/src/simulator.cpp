#include "mcs/simulator.hpp"

#include <algorithm>
#include <limits>
#include <optional>

#include "mcs/rta.hpp"

namespace mcs {

const char* to_string(Policy policy) { return policy == Policy::Amc ? "amc" : "pastime"; }

Policy parse_policy(std::string_view text) {
  if (text == "amc") return Policy::Amc;
  if (text == "pastime") return Policy::Pastime;
  throw ParseError("unknown policy '" + std::string(text) + "'");
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Release: return "Release";
    case EventKind::CheckpointReached: return "CheckpointReached";
    case EventKind::BudgetExhausted: return "BudgetExhausted";
    case EventKind::JobComplete: return "JobComplete";
    case EventKind::JobDropped: return "JobDropped";
    case EventKind::DeadlineMiss: return "DeadlineMiss";
    case EventKind::ModeSwitchHI: return "ModeSwitchHI";
    case EventKind::ModeSwitchLO: return "ModeSwitchLO";
    case EventKind::ExtensionApproved: return "ExtensionApproved";
    case EventKind::ExtensionDenied: return "ExtensionDenied";
    case EventKind::HorizonEnd: return "HorizonEnd";
  }
  return "?";
}

namespace {

enum class Mode { LO, HI };

struct Job {
  Time release = 0;
  Time deadline = 0;
  // Total work, including any charged decision overhead.
  Time work = 0;
  // Work at which the checkpoint is reached.
  Time checkpoint_at = 0;
  Time executed = 0;
  // Current LO budget (c_extended).
  Time lo_budget = 0;
  bool checkpoint_done = false;
  bool overran = false;
};

struct TaskRuntime {
  const Task* task = nullptr;
  const std::vector<JobDemand>* stream = nullptr;
  std::size_t next_job = 0;
  Time next_release = 0;
  std::optional<Job> job;
};

// Single-threaded event loop over one taskset and demand set.
//
// Events at one instant are handled in this order: the running job's own
// events (completion, checkpoint, enforcement timer), then deadline checks and
// releases in priority order, then the switch-back test. Completion precedes
// the deadline check, so a job that finishes exactly at its deadline meets it.
class Simulation {
 public:
  Simulation(const Taskset& ts, const DemandStreams& demands, const SimOptions& options)
      : options_(options), ts_(ts) {
    if (!ts_.fully_prioritized()) throw ConfigError("simulation needs assigned priorities");
    sort_by_priority(ts_);
    if (options_.horizon <= 0) throw ConfigError("simulation horizon must be positive");
    if (options_.policy == Policy::Pastime) {
      for (const Task& t : ts_.tasks) {
        if (t.is_hc() && !t.checkpoint) {
          throw ConfigError("task " + std::to_string(t.id) + " has no checkpoint profile");
        }
      }
      online_.emplace(ts_, options_.iteration_cap);
    }
    for (const Task& t : ts_.tasks) {
      auto it = demands.find(t.id);
      if (it == demands.end()) throw ConfigError("no demand stream for task " + std::to_string(t.id));
      if (t.is_hc()) {
        for (const JobDemand& d : it->second) {
          if (d.total() > t.c_hi) {
            throw ConfigError("job of task " + std::to_string(t.id) + " demands more than C(HI)");
          }
        }
      }
      runtime_.push_back(TaskRuntime{&t, &it->second, 0, 0, std::nullopt});
    }
  }

  SimTrace run() {
    const Time horizon = options_.horizon;
    release_due();
    while (true) {
      TaskRuntime* running = pick();
      Time next_release = std::numeric_limits<Time>::max();
      for (const TaskRuntime& tr : runtime_) next_release = std::min(next_release, tr.next_release);
      const Time limit = std::min(next_release, horizon);

      if (!running) {
        if (mode_ == Mode::HI && options_.switch_back == SwitchBack::IdleInstant) {
          switch_lo(kSystem);
          continue;
        }
        now_ = limit;
      } else {
        Job& j = *running->job;
        Time step = j.work - j.executed;
        if (watches_checkpoint(*running)) step = std::min(step, j.checkpoint_at - j.executed);
        if (auto budget = enforced_budget(*running)) step = std::min(step, *budget - j.executed);
        step = std::max<Time>(0, std::min(step, limit - now_));
        now_ += step;
        j.executed += step;
        handle_running(*running);
      }
      if (now_ >= horizon) break;
      release_due();
      if (options_.switch_back == SwitchBack::NoOverrun) maybe_switch_back();
    }
    finish();
    return std::move(trace_);
  }

 private:
  bool watches_checkpoint(const TaskRuntime& tr) const {
    return online_ && tr.task->is_hc() && !tr.job->checkpoint_done;
  }

  // Budget at which the enforcement timer fires for the running job, if any.
  std::optional<Time> enforced_budget(const TaskRuntime& tr) const {
    const Job& j = *tr.job;
    if (tr.task->is_hc()) {
      if (j.overran) return std::nullopt;
      return j.lo_budget;
    }
    return mode_ == Mode::LO ? tr.task->c_lo : tr.task->c_hi;
  }

  TaskRuntime* pick() {
    for (TaskRuntime& tr : runtime_) {
      if (tr.job) return &tr;
    }
    return nullptr;
  }

  void emit(EventKind kind, const TaskRuntime* tr, Time value = 0, int iterations = 0) {
    SimEvent e;
    e.time = now_;
    e.kind = kind;
    if (tr) {
      e.task = tr->task->id;
      e.level = tr->task->level;
      if (tr->job) e.executed = tr->job->executed;
    }
    e.value = value;
    e.iterations = iterations;
    trace_.push_back(e);
  }

  void handle_running(TaskRuntime& tr) {
    Job& j = *tr.job;
    if (j.executed >= j.work) {
      emit(EventKind::JobComplete, &tr, now_ - j.release);
      tr.job.reset();
      return;
    }
    if (watches_checkpoint(tr) && j.executed == j.checkpoint_at) reach_checkpoint(tr);
    if (tr.task->is_hc()) {
      if (!j.overran && j.executed == j.lo_budget && j.executed < j.work) {
        j.overran = true;
        emit(EventKind::BudgetExhausted, &tr, j.lo_budget);
        if (mode_ == Mode::LO) switch_hi(tr);
      }
    } else if (auto budget = enforced_budget(tr); budget && j.executed >= *budget) {
      emit(EventKind::BudgetExhausted, &tr, *budget);
      emit(EventKind::JobDropped, &tr);
      tr.job.reset();
    }
  }

  void reach_checkpoint(TaskRuntime& tr) {
    Job& j = *tr.job;
    const Task& task = *tr.task;
    j.checkpoint_done = true;
    // Reached after the LO budget ran out: the mode switch already happened.
    if (j.overran) {
      emit(EventKind::CheckpointReached, &tr, 0);
      return;
    }
    const CheckpointProfile& cp = *task.checkpoint;
    const JobDemand& demand = (*tr.stream)[tr.next_job - 1];
    CheckpointObservation obs{j.executed, cp.c_cp_lo, std::nullopt};
    if (demand.mem_pre > 0) obs.m_cp = demand.mem_pre;
    const DelayMetric metric = observe_delay(obs);
    const Time predicted = predict_total(options_.model, cp.reference_c_lo, metric, obs, cp.mem);
    emit(EventKind::CheckpointReached, &tr, predicted);

    const Time c_prime = std::min(predicted, task.c_hi);
    if (effective_extra(c_prime, j.lo_budget) <= 0) return;
    const Time target = std::min(c_prime + options_.decision_overhead, task.c_hi);
    const Time extra = target - task.c_lo;
    if (extra <= 0) return;

    ExtensionDecision d = online_->request(ExtensionRequest(task.id, extra, now_));
    if (d.approved) {
      j.lo_budget = task.c_lo + extra;
      // C(HI) bounds everything a job executes, decision overhead included.
      j.work = std::min(j.work + options_.decision_overhead, task.c_hi);
      emit(EventKind::ExtensionApproved, &tr, j.lo_budget, d.iterations_used);
    } else {
      emit(EventKind::ExtensionDenied, &tr, task.c_lo + extra, d.iterations_used);
      if (d.aborted) trace_.back().capped = true;
    }
  }

  void switch_hi(const TaskRuntime& trigger) {
    mode_ = Mode::HI;
    emit(EventKind::ModeSwitchHI, &trigger);
    for (TaskRuntime& tr : runtime_) {
      if (!tr.job || tr.task->is_hc()) continue;
      if (tr.job->executed >= tr.task->c_hi) {
        emit(EventKind::JobDropped, &tr);
        tr.job.reset();
      }
    }
  }

  void switch_lo(TaskId) {
    mode_ = Mode::LO;
    emit(EventKind::ModeSwitchLO, nullptr);
  }

  void maybe_switch_back() {
    if (mode_ != Mode::HI) return;
    for (const TaskRuntime& tr : runtime_) {
      if (tr.job && tr.task->is_hc() && tr.job->overran) return;
    }
    switch_lo(kSystem);
  }

  void release_due() {
    if (now_ >= options_.horizon) return;
    if (online_) online_->reset_stale(now_);
    for (TaskRuntime& tr : runtime_) {
      if (tr.next_release != now_) continue;
      const Task& task = *tr.task;
      if (tr.job) {
        emit(EventKind::DeadlineMiss, &tr);
        tr.job.reset();
      }
      if (tr.next_job >= tr.stream->size()) {
        throw ConfigError("demand stream of task " + std::to_string(task.id) + " ends before the horizon");
      }
      const JobDemand& d = (*tr.stream)[tr.next_job++];
      Job j;
      j.release = now_;
      j.deadline = now_ + task.deadline;
      j.work = d.total();
      j.checkpoint_at = d.exec_pre_cp;
      j.lo_budget = task.c_lo;
      tr.job = j;
      if (online_ && task.is_hc()) online_->begin_job(task.id);
      emit(EventKind::Release, &tr);
      if (!task.is_hc() && mode_ == Mode::HI && task.c_hi == 0) {
        emit(EventKind::JobDropped, &tr);
        tr.job.reset();
      }
      tr.next_release += task.period;
    }
  }

  void finish() {
    for (TaskRuntime& tr : runtime_) {
      if (!tr.job) continue;
      emit(tr.job->deadline <= options_.horizon ? EventKind::DeadlineMiss : EventKind::HorizonEnd, &tr);
      tr.job.reset();
    }
  }

  SimOptions options_;
  Taskset ts_;
  std::optional<OnlineScheduler> online_;
  std::vector<TaskRuntime> runtime_;
  Mode mode_ = Mode::LO;
  Time now_ = 0;
  SimTrace trace_;
};

}  // namespace

SimResult simulate(const Taskset& ts, const DemandStreams& demands, const SimOptions& options) {
  Simulation sim(ts, demands, options);
  SimResult result;
  result.trace = sim.run();
  result.metrics = compute_metrics(result.trace, options.horizon);
  return result;
}

SimMetrics compute_metrics(const SimTrace& trace, Time horizon) {
  SimMetrics m;
  m.horizon = horizon;
  std::map<TaskId, Time> extended_budget;
  std::optional<Time> hi_since;
  double err_sum = 0.0;

  for (const SimEvent& e : trace) {
    const bool lc = e.level == Criticality::LC && e.task != kSystem;
    switch (e.kind) {
      case EventKind::Release:
        extended_budget.erase(e.task);
        break;
      case EventKind::JobComplete: {
        if (lc) {
          ++m.lc_jobs_completed;
          m.lc_cpu_time += e.executed;
        } else {
          ++m.hc_jobs_completed;
        }
        Time& worst = m.worst_response[e.task];
        worst = std::max(worst, e.value);
        if (auto it = extended_budget.find(e.task); it != extended_budget.end() && e.executed > 0) {
          const double err = 100.0 * static_cast<double>(it->second - e.executed) / static_cast<double>(e.executed);
          auto& pe = m.prediction_error;
          pe.min_pct = pe.count == 0 ? err : std::min(pe.min_pct, err);
          pe.max_pct = pe.count == 0 ? err : std::max(pe.max_pct, err);
          ++pe.count;
          err_sum += err;
          extended_budget.erase(it);
        }
        break;
      }
      case EventKind::JobDropped:
        if (lc) {
          ++m.lc_jobs_dropped;
          m.lc_cpu_time += e.executed;
        }
        break;
      case EventKind::DeadlineMiss:
        if (lc) {
          ++m.lc_deadline_misses;
          m.lc_cpu_time += e.executed;
        } else {
          ++m.hc_deadline_misses;
        }
        break;
      case EventKind::HorizonEnd:
        if (lc) m.lc_cpu_time += e.executed;
        break;
      case EventKind::ModeSwitchHI:
        ++m.hi_mode_switches;
        hi_since = e.time;
        break;
      case EventKind::ModeSwitchLO:
        if (hi_since) m.hi_mode_time += e.time - *hi_since;
        hi_since.reset();
        break;
      case EventKind::ExtensionApproved:
        ++m.extensions_approved;
        ++m.online_iterations[e.iterations];
        m.max_online_iterations = std::max(m.max_online_iterations, e.iterations);
        extended_budget[e.task] = e.value;
        break;
      case EventKind::ExtensionDenied:
        ++m.extensions_denied;
        if (e.capped) ++m.extensions_aborted;
        ++m.online_iterations[e.iterations];
        m.max_online_iterations = std::max(m.max_online_iterations, e.iterations);
        break;
      case EventKind::CheckpointReached:
      case EventKind::BudgetExhausted:
        break;
    }
  }
  if (hi_since) m.hi_mode_time += horizon - *hi_since;
  if (m.prediction_error.count > 0) m.prediction_error.mean_pct = err_sum / m.prediction_error.count;
  m.lc_avg_utilization = horizon > 0 ? static_cast<double>(m.lc_cpu_time) / static_cast<double>(horizon) : 0.0;
  return m;
}

void write_trace_csv(const SimTrace& trace, std::ostream& out) {
  out << "time,kind,task,level,executed,value,iterations\n";
  for (const SimEvent& e : trace) {
    out << e.time << ',' << to_string(e.kind) << ',';
    if (e.task != kSystem) out << e.task;
    out << ',' << (e.task == kSystem ? "" : to_string(e.level)) << ',' << e.executed << ',' << e.value << ','
        << e.iterations << '\n';
  }
}

}  // namespace mcs
