#include "mcs/workload.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mcs/rng.hpp"

namespace mcs {

namespace {

Time round_ticks(double x) { return static_cast<Time>(std::floor(x + 0.5)); }

const CheckpointProfile& require_checkpoint(const Task& task) {
  if (!task.checkpoint) {
    throw MissingCheckpointProfile("HC task " + std::to_string(task.id) + " has no checkpoint profile");
  }
  return *task.checkpoint;
}

JobDemand draw_job(const Task& task, const WorkloadConfig& cfg, Rng& rng) {
  if (!task.is_hc()) {
    JobDemand d;
    d.task = task.id;
    d.exec_pre_cp = task.c_lo;
    return d;
  }
  // Three draws per job keep streams aligned whatever the outcome.
  const bool slowed = rng.uniform01() < cfg.slowdown_prob;
  const double a = rng.uniform01();
  const double b = rng.uniform01();
  const double s_pre = slowed ? 1.0 + (cfg.cf - 1.0) * a : 1.0;
  const double s_indep = slowed ? 1.0 + (cfg.cf - 1.0) * b : 1.0;
  return shape_demand(task, s_pre, s_indep, cfg.correlation);
}

}  // namespace

JobDemand shape_demand(const Task& task, double s_pre, double s_indep, double correlation) {
  const CheckpointProfile& cp = require_checkpoint(task);
  const Time c_cp = cp.c_cp_lo;
  const Time post_lo = cp.reference_c_lo - c_cp;

  JobDemand d;
  d.task = task.id;
  d.exec_pre_cp = round_ticks(static_cast<double>(c_cp) * s_pre);
  if (correlation >= 1.0) {
    d.exec_post_cp = round_half_up_div(static_cast<Wide>(post_lo) * d.exec_pre_cp, c_cp);
  } else {
    const double realized = static_cast<double>(d.exec_pre_cp) / static_cast<double>(c_cp);
    const double s_post = correlation * realized + (1.0 - correlation) * s_indep;
    d.exec_post_cp = round_ticks(static_cast<double>(post_lo) * s_post);
  }
  if (d.total() > task.c_hi) {
    d.exec_pre_cp = std::min(d.exec_pre_cp, task.c_hi);
    d.exec_post_cp = task.c_hi - d.exec_pre_cp;
  }
  if (cp.mem) {
    d.mem_pre = cp.mem->m_pre_cp_lo;
    d.mem_post = cp.mem->m_post_cp_lo;
  }
  return d;
}

DemandStreams generate_demands(const Taskset& ts, const WorkloadConfig& cfg, Time horizon) {
  if (cfg.cf <= 1.0) throw ConfigError("criticality factor must exceed 1");
  if (cfg.slowdown_prob < 0.0 || cfg.slowdown_prob > 1.0) throw ConfigError("slowdown probability must lie in [0,1]");
  for (const Task& t : ts.tasks) {
    if (t.is_hc()) require_checkpoint(t);
  }
  DemandStreams streams;
  for (const Task& t : ts.tasks) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(t.id)}));
    std::vector<JobDemand>& jobs = streams[t.id];
    for (Time release = 0; release < horizon; release += t.period) {
      JobDemand d = draw_job(t, cfg, rng);
      d.release = release;
      jobs.push_back(d);
    }
  }
  return streams;
}

DemandSampler make_sampler(const Task& task, const WorkloadConfig& cfg) {
  if (task.is_hc()) require_checkpoint(task);
  return [task, cfg](std::uint64_t run) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(task.id), run}));
    return draw_job(task, cfg, rng);
  };
}

ProfileResult profile_task(const DemandSampler& sampler, int n_runs, double safety_factor) {
  if (n_runs < 1) throw std::invalid_argument("profiling needs at least one run");
  Wide sum_total = 0, sum_pre = 0, sum_mem_pre = 0, sum_mem_post = 0;
  Time max_total = 0;
  for (int run = 0; run < n_runs; ++run) {
    JobDemand d = sampler(static_cast<std::uint64_t>(run));
    sum_total += d.total();
    sum_pre += d.exec_pre_cp;
    sum_mem_pre += d.mem_pre;
    sum_mem_post += d.mem_post;
    max_total = std::max(max_total, d.total());
  }
  ProfileResult r;
  r.c_lo = round_half_up_div(sum_total, n_runs);
  r.c_hi = round_ticks(static_cast<double>(max_total) * safety_factor);
  r.checkpoint.c_cp_lo = round_half_up_div(sum_pre, n_runs);
  r.checkpoint.reference_c_lo = r.c_lo;
  if (sum_mem_pre > 0 && sum_mem_post > 0) {
    MemoryProfile m;
    m.m_pre_cp_lo = round_half_up_div(sum_mem_pre, n_runs);
    m.m_post_cp_lo = round_half_up_div(sum_mem_post, n_runs);
    m.m_lo = m.m_pre_cp_lo + m.m_post_cp_lo;
    r.checkpoint.mem = m;
  }
  return r;
}

}  // namespace mcs
