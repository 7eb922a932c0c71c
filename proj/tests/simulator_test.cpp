#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "mcs/rng.hpp"
#include "mcs/rta.hpp"
#include "mcs/simulator.hpp"
#include "mcs/taskgen.hpp"
#include "oracles.hpp"

using namespace mcs;

namespace {

// Every job demands exactly C(LO), split at the checkpoint when there is one.
DemandStreams nominal(const Taskset& ts, Time horizon) {
  DemandStreams s;
  for (const Task& t : ts.tasks) {
    for (Time r = 0; r < horizon; r += t.period) {
      JobDemand d;
      d.task = t.id;
      d.release = r;
      d.exec_pre_cp = t.checkpoint ? t.checkpoint->c_cp_lo : t.c_lo;
      d.exec_post_cp = t.c_lo - d.exec_pre_cp;
      s[t.id].push_back(d);
    }
  }
  return s;
}

std::vector<SimEvent> of_kind(const SimTrace& trace, EventKind kind) {
  std::vector<SimEvent> out;
  for (const SimEvent& e : trace) {
    if (e.kind == kind) out.push_back(e);
  }
  return out;
}

SimOptions options(Policy p, Time horizon) {
  SimOptions o;
  o.policy = p;
  o.horizon = horizon;
  o.decision_overhead = 0;
  return o;
}

// (task, job index) of every HC job that ran out of its LO budget.
std::set<std::pair<TaskId, int>> overrun_jobs(const SimTrace& trace) {
  std::map<TaskId, int> released;
  std::set<std::pair<TaskId, int>> out;
  for (const SimEvent& e : trace) {
    if (e.kind == EventKind::Release) ++released[e.task];
    if (e.kind == EventKind::BudgetExhausted && e.level == Criticality::HC) out.insert({e.task, released[e.task] - 1});
  }
  return out;
}

}  // namespace

TEST(Simulator, ThreeTaskNominalDemandsMatchLoResponses) {
  const Taskset ts = fixtures::three_task();
  const SimResult r = simulate(ts, nominal(ts, 50), options(Policy::Amc, 50));
  EXPECT_TRUE(of_kind(r.trace, EventKind::ModeSwitchHI).empty());
  EXPECT_EQ(r.metrics.worst_response.at(1), 3);
  EXPECT_EQ(r.metrics.worst_response.at(2), 5);
  EXPECT_EQ(r.metrics.worst_response.at(3), 15);
  // Second jobs of tau2 (at 9) and tau1 (at 10) preempt tau3 before it ends.
  std::vector<std::pair<TaskId, Time>> order;
  for (const SimEvent& e : of_kind(r.trace, EventKind::JobComplete)) order.emplace_back(e.task, e.time);
  order.resize(5);
  EXPECT_EQ(order, (std::vector<std::pair<TaskId, Time>>{{1, 3}, {2, 5}, {1, 13}, {2, 14}, {3, 15}}));
}

TEST(Simulator, DelayedJobSwitchesUnderAmc) {
  const Taskset ts = fixtures::three_task_with_checkpoints(10);
  DemandStreams d = nominal(ts, 500);
  d[1][0].exec_pre_cp = 25;
  d[1][0].exec_post_cp = 25;
  const SimResult r = simulate(ts, d, options(Policy::Amc, 500));
  const auto sw = of_kind(r.trace, EventKind::ModeSwitchHI);
  ASSERT_FALSE(sw.empty());
  EXPECT_EQ(sw[0].time, 30);
  EXPECT_EQ(sw[0].task, 1);
  EXPECT_EQ(r.metrics.hc_deadline_misses, 0);
  // tau2's first job is dropped by the switch.
  const auto dropped = of_kind(r.trace, EventKind::JobDropped);
  ASSERT_FALSE(dropped.empty());
  EXPECT_EQ(dropped[0].task, 2);
  EXPECT_EQ(dropped[0].time, 30);
}

TEST(Simulator, DelayedJobKeptInLoModeWithExtension) {
  const Taskset ts = fixtures::three_task_with_checkpoints(10);
  DemandStreams d = nominal(ts, 500);
  d[1][0].exec_pre_cp = 25;
  d[1][0].exec_post_cp = 25;
  const SimResult r = simulate(ts, d, options(Policy::Pastime, 500));
  const auto cp = of_kind(r.trace, EventKind::CheckpointReached);
  ASSERT_FALSE(cp.empty());
  EXPECT_EQ(cp[0].time, 25);
  EXPECT_EQ(cp[0].value, 50);
  const auto ext = of_kind(r.trace, EventKind::ExtensionApproved);
  ASSERT_EQ(ext.size(), 1u);
  EXPECT_EQ(ext[0].value, 50);
  EXPECT_TRUE(of_kind(r.trace, EventKind::ModeSwitchHI).empty());
  EXPECT_EQ(of_kind(r.trace, EventKind::JobComplete)[0].time, 50);
  EXPECT_EQ(r.metrics.lc_jobs_dropped, 0);
  EXPECT_EQ(r.metrics.prediction_error.count, 1);
  EXPECT_DOUBLE_EQ(r.metrics.prediction_error.mean_pct, 0.0);
}

TEST(Simulator, OverrunOfExtendedBudgetStillSwitches) {
  const Taskset ts = fixtures::three_task_with_checkpoints(10);
  DemandStreams d = nominal(ts, 500);
  d[1][0].exec_pre_cp = 25;
  d[1][0].exec_post_cp = 35;
  const SimResult r = simulate(ts, d, options(Policy::Pastime, 500));
  const auto sw = of_kind(r.trace, EventKind::ModeSwitchHI);
  ASSERT_EQ(sw.size(), 1u);
  EXPECT_EQ(sw[0].time, 50);
  EXPECT_EQ(sw[0].executed, 50);
  const auto done = of_kind(r.trace, EventKind::JobComplete);
  EXPECT_EQ(done[0].task, 1);
  EXPECT_EQ(done[0].time, 60);
  const auto back = of_kind(r.trace, EventKind::ModeSwitchLO);
  ASSERT_FALSE(back.empty());
  EXPECT_EQ(back[0].time, 60);
  EXPECT_EQ(r.metrics.hc_deadline_misses, 0);
}

TEST(Simulator, DecisionOverheadIsChargedOnApproval) {
  const Taskset ts = fixtures::three_task_with_checkpoints(10);
  DemandStreams d = nominal(ts, 500);
  d[1][0].exec_pre_cp = 25;
  d[1][0].exec_post_cp = 25;
  SimOptions o = options(Policy::Pastime, 500);
  o.decision_overhead = 3;
  const SimResult r = simulate(ts, d, o);
  EXPECT_EQ(of_kind(r.trace, EventKind::ExtensionApproved)[0].value, 53);
  EXPECT_EQ(of_kind(r.trace, EventKind::JobComplete)[0].time, 53);
  EXPECT_TRUE(of_kind(r.trace, EventKind::ModeSwitchHI).empty());
}

TEST(Simulator, CheckpointFiresOnConsumedBudgetDespitePreemption) {
  // tau2 (higher priority) preempts tau3 before its checkpoint.
  Taskset ts;
  ts.tasks.push_back(Task::lc(2, 4, 10, 1));
  Task hc = Task::hc(3, 10, 20, 50, 2);
  hc.checkpoint = CheckpointProfile{5, 10, std::nullopt};
  ts.tasks.push_back(hc);
  DemandStreams d = nominal(ts, 50);
  d[3][0].exec_pre_cp = 8;
  d[3][0].exec_post_cp = 8;
  const SimResult r = simulate(ts, d, options(Policy::Pastime, 50));
  const auto cp = of_kind(r.trace, EventKind::CheckpointReached);
  ASSERT_EQ(cp.size(), 1u);
  EXPECT_EQ(cp[0].executed, 8);
  // 4 ticks of tau2 at 0, 10 interleave: 0-4 tau2, 4-10 tau3 (6), 10-14 tau2, 14-16 tau3.
  EXPECT_EQ(cp[0].time, 16);
  EXPECT_EQ(cp[0].value, 16);
}

TEST(Simulator, PastimeNeedsCheckpoints) {
  const Taskset ts = fixtures::three_task();
  EXPECT_THROW(simulate(ts, nominal(ts, 50), options(Policy::Pastime, 50)), ConfigError);
}

TEST(Simulator, DemandAboveHiBudgetRejected) {
  const Taskset ts = fixtures::three_task();
  DemandStreams d = nominal(ts, 50);
  d[1][0].exec_pre_cp = 7;
  EXPECT_THROW(simulate(ts, d, options(Policy::Amc, 50)), ConfigError);
}

TEST(Simulator, OverloadProducesDeadlineMisses) {
  Taskset ts;
  ts.tasks.push_back(Task::lc(1, 3, 5, 1));
  ts.tasks.push_back(Task::lc(2, 3, 7, 2));
  const SimResult r = simulate(ts, nominal(ts, 35), options(Policy::Amc, 35));
  EXPECT_GT(r.metrics.lc_deadline_misses, 0);
}

TEST(Simulator, ImpreciseLcJobContinuesInHiMode) {
  Taskset ts = fixtures::three_task_with_checkpoints(10);
  ts.at(2).c_hi = 20;
  DemandStreams d = nominal(ts, 100);
  d[1][0].exec_pre_cp = 25;
  d[1][0].exec_post_cp = 35;
  const SimResult r = simulate(ts, d, options(Policy::Amc, 100));
  EXPECT_TRUE(of_kind(r.trace, EventKind::JobDropped).empty());
  // tau2 runs 60-80 after tau1; its second job is still running at the horizon.
  EXPECT_EQ(r.metrics.lc_jobs_completed, 1);
  EXPECT_EQ(r.metrics.worst_response.at(2), 80);
}

TEST(Simulator, IdleSwitchBack) {
  const Taskset ts = fixtures::three_task_with_checkpoints(10);
  DemandStreams d = nominal(ts, 500);
  d[1][0].exec_pre_cp = 25;
  d[1][0].exec_post_cp = 35;
  SimOptions o = options(Policy::Amc, 500);
  o.switch_back = SwitchBack::IdleInstant;
  const SimResult r = simulate(ts, d, o);
  const auto back = of_kind(r.trace, EventKind::ModeSwitchLO);
  ASSERT_FALSE(back.empty());
  // tau1 completes at 60; tau3 runs 60-100 and, after tau1's next job
  // (100-130), its last 10 ticks, leaving the processor idle at 140.
  EXPECT_EQ(back[0].time, 140);
}

TEST(Metrics, LcUtilizationQuarter) {
  Taskset ts;
  ts.tasks.push_back(Task::lc(1, 250, 1000, 1));
  const SimResult r = simulate(ts, nominal(ts, 10000), options(Policy::Amc, 10000));
  EXPECT_DOUBLE_EQ(r.metrics.lc_avg_utilization, 0.25);
  EXPECT_EQ(r.metrics.lc_jobs_completed, 10);
}

TEST(Metrics, NoLcExecutionIsZero) {
  EXPECT_EQ(compute_metrics({}, 100).lc_avg_utilization, 0.0);
}

TEST(Metrics, HandTalliedTrace) {
  const auto ev = [](Time t, EventKind k, TaskId id, Criticality lvl, Time exec, Time value = 0, int it = 0) {
    SimEvent e;
    e.time = t;
    e.kind = k;
    e.task = id;
    e.level = lvl;
    e.executed = exec;
    e.value = value;
    e.iterations = it;
    return e;
  };
  using K = EventKind;
  const auto HC = Criticality::HC, LC = Criticality::LC;
  const SimTrace trace{
      ev(0, K::Release, 1, HC, 0),
      ev(0, K::Release, 2, LC, 0),
      ev(5, K::CheckpointReached, 1, HC, 5, 12),
      ev(5, K::ExtensionApproved, 1, HC, 5, 12, 9),
      ev(13, K::JobComplete, 1, HC, 10, 13),
      ev(15, K::JobComplete, 2, LC, 2, 15),
      ev(20, K::Release, 1, HC, 0),
      ev(30, K::BudgetExhausted, 1, HC, 10, 10),
      ev(30, K::ModeSwitchHI, 1, HC, 10),
      ev(30, K::JobDropped, 2, LC, 1),
      ev(40, K::ModeSwitchLO, kSystem, LC, 0),
  };
  const SimMetrics m = compute_metrics(trace, 100);
  EXPECT_EQ(m.lc_cpu_time, 3);
  EXPECT_DOUBLE_EQ(m.lc_avg_utilization, 0.03);
  EXPECT_EQ(m.lc_jobs_completed, 1);
  EXPECT_EQ(m.lc_jobs_dropped, 1);
  EXPECT_EQ(m.hc_jobs_completed, 1);
  EXPECT_EQ(m.hi_mode_switches, 1);
  EXPECT_EQ(m.hi_mode_time, 10);
  EXPECT_EQ(m.extensions_approved, 1);
  EXPECT_EQ(m.online_iterations.at(9), 1);
  EXPECT_EQ(m.prediction_error.count, 1);
  EXPECT_DOUBLE_EQ(m.prediction_error.mean_pct, 20.0);
  EXPECT_EQ(m.worst_response.at(1), 13);
}

TEST(Simulator, TraceCsv) {
  const Taskset ts = fixtures::three_task();
  std::ostringstream out;
  write_trace_csv(simulate(ts, nominal(ts, 10), options(Policy::Amc, 10)).trace, out);
  const std::string csv = out.str();
  EXPECT_EQ(csv.rfind("time,kind,task,level,executed,value,iterations\n0,Release,1,HC,0,0,0\n", 0), 0u);
  EXPECT_NE(csv.find("3,JobComplete,1,HC,3,3,0"), std::string::npos);
}

TEST(Simulator, MatchesTickScheduleOnRandomSets) {
  Rng rng(5);
  int compared = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Taskset ts;
    const int n = 1 + trial % 4;
    for (int i = 0; i < n; ++i) {
      const Time period = rng.uniform_int(3, 24);
      ts.tasks.push_back(Task::lc(i + 1, rng.uniform_int(1, std::max<Time>(1, period / n)), period, i + 1));
    }
    Time h = 1;
    for (const Task& t : ts.tasks) h = std::lcm(h, t.period);
    if (h > 5000 || !oracle::schedulable(ts)) continue;
    const SimResult r = simulate(ts, nominal(ts, h), options(Policy::Amc, h));
    EXPECT_EQ(r.metrics.worst_response, oracle::tick_schedule(ts, h)) << "trial " << trial;
    ++compared;
  }
  EXPECT_GT(compared, 30);
}

TEST(Simulator, SafetyAndPerJobDominanceOnGeneratedSets) {
  GenConfig g;
  g.n_tasks = 6;
  g.total_u_lo = 0.6;
  g.seed = 3;
  const Batch b = generate_schedulable_batch(g, 10);
  for (const Taskset& ts : b.tasksets) {
    const Time horizon = 10 * ts.max_period();
    WorkloadConfig wl;
    wl.seed = 17;
    const DemandStreams d = generate_demands(ts, wl, horizon);
    SimOptions o;
    o.horizon = horizon;
    o.policy = Policy::Amc;
    const SimResult amc = simulate(ts, d, o);
    o.policy = Policy::Pastime;
    const SimResult pas = simulate(ts, d, o);
    EXPECT_EQ(amc.metrics.hc_deadline_misses, 0);
    EXPECT_EQ(pas.metrics.hc_deadline_misses, 0);
    const auto a = overrun_jobs(amc.trace), p = overrun_jobs(pas.trace);
    EXPECT_TRUE(std::includes(a.begin(), a.end(), p.begin(), p.end()));
    EXPECT_EQ(simulate(ts, d, o).trace, pas.trace);
  }
}

TEST(Simulator, OverheadNeverPushesWorkPastHiBudget) {
  // An overhead larger than the whole period must not break the HI guarantee.
  const Taskset ts = fixtures::three_task_with_checkpoints(10);
  WorkloadConfig wl;
  wl.seed = 5;
  wl.slowdown_prob = 0.8;
  const DemandStreams d = generate_demands(ts, wl, 10000);
  SimOptions o = options(Policy::Pastime, 10000);
  o.decision_overhead = 130;
  const SimResult r = simulate(ts, d, o);
  EXPECT_GT(r.metrics.extensions_approved, 0);
  EXPECT_EQ(r.metrics.hc_deadline_misses, 0);
}
