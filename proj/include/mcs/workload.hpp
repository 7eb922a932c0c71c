#pragma once

// Synthetic job demands and the profiling phase that derives budgets from them.

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "mcs/model.hpp"

namespace mcs {

struct JobDemand {
  TaskId task = 0;
  Time release = 0;
  // True work before and after the checkpoint.
  Time exec_pre_cp = 0;
  Time exec_post_cp = 0;
  std::int64_t mem_pre = 0;
  std::int64_t mem_post = 0;

  Time total() const { return exec_pre_cp + exec_post_cp; }
  friend bool operator==(const JobDemand&, const JobDemand&) = default;
};

struct WorkloadConfig {
  std::uint64_t seed = 1;
  // Probability that a job runs slowed down.
  double slowdown_prob = 0.5;
  // Criticality factor; slowdowns are drawn from [1, cf].
  double cf = 1.8;
  // Correlation between the pre- and post-checkpoint slowdown.
  double correlation = 1.0;
};

// Per-task job streams, each sorted by release time.
using DemandStreams = std::map<TaskId, std::vector<JobDemand>>;

// Demand of one HC job whose pre-checkpoint segment runs `s_pre` times slower
// than profiled. The post-checkpoint factor is correlation * r + (1 -
// correlation) * s_indep, where r is the realized pre-checkpoint ratio, and
// the total is clamped to C(HI). Exact for correlation == 1.
JobDemand shape_demand(const Task& task, double s_pre, double s_indep, double correlation);

// Jobs released at 0, T, 2T, ... below `horizon` for every task. HC tasks need
// a checkpoint profile (MissingCheckpointProfile); LC jobs always demand C(LO).
// Each task draws from its own sub-stream of cfg.seed.
DemandStreams generate_demands(const Taskset& ts, const WorkloadConfig& cfg, Time horizon);

// Draws the demand of profiling run `run`.
using DemandSampler = std::function<JobDemand(std::uint64_t run)>;

DemandSampler make_sampler(const Task& task, const WorkloadConfig& cfg);

struct ProfileResult {
  CheckpointProfile checkpoint;
  Time c_lo = 0;
  Time c_hi = 0;
};

// Runs the sampler n_runs times in isolation: C(LO) is the mean total, C(HI)
// the maximum total times safety_factor, C^CP(LO) the mean pre-checkpoint
// time. Memory counts are averaged when present. Requires n_runs >= 1.
ProfileResult profile_task(const DemandSampler& sampler, int n_runs, double safety_factor = 1.0);

}  // namespace mcs
