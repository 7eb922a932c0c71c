#include "mcs/taskgen.hpp"

#include <algorithm>
#include <cmath>

#include "mcs/rta.hpp"

namespace mcs {

namespace {

constexpr std::int64_t kAccessesPerTick = 4;

Time round_ticks(double x) { return static_cast<Time>(std::floor(x + 0.5)); }

bool is_hc_slot(int i, double fraction) {
  return std::floor((i + 1) * fraction) > std::floor(i * fraction);
}

void set_memory(CheckpointProfile& cp) {
  MemoryProfile m;
  m.m_pre_cp_lo = kAccessesPerTick * cp.c_cp_lo;
  m.m_post_cp_lo = kAccessesPerTick * (cp.reference_c_lo - cp.c_cp_lo);
  m.m_lo = m.m_pre_cp_lo + m.m_post_cp_lo;
  cp.mem = m;
}

Time draw_period(const GenConfig& cfg, Rng& rng) {
  double units;
  if (cfg.log_uniform_periods) {
    units = std::exp(rng.uniform(std::log(cfg.period_min), std::log(cfg.period_max)));
  } else {
    units = rng.uniform(cfg.period_min, cfg.period_max);
  }
  return std::max<Time>(1, round_ticks(units * static_cast<double>(cfg.ticks_per_unit)));
}

Taskset draw_once(const GenConfig& cfg, Rng& rng) {
  const std::vector<double> u = uunifast(cfg.n_tasks, cfg.total_u_lo, rng);
  Taskset ts;
  for (int i = 0; i < cfg.n_tasks; ++i) {
    const Time period = draw_period(cfg, rng);
    const Time c_lo = round_ticks(u[i] * static_cast<double>(period));
    const TaskId id = i + 1;
    if (is_hc_slot(i, cfg.hc_fraction)) {
      if (c_lo < 2) throw DegenerateTask("HC task " + std::to_string(id) + " rounds to a budget below 2 ticks");
      const Time c_hi = std::max(round_ticks(cfg.cf * static_cast<double>(c_lo)), c_lo + 1);
      Task t = Task::hc(id, c_lo, c_hi, period);
      t.checkpoint = CheckpointProfile{0, c_lo, std::nullopt};
      set_checkpoint_fraction(t, cfg.checkpoint_fraction);
      ts.tasks.push_back(t);
    } else {
      if (c_lo < 1) throw DegenerateTask("LC task " + std::to_string(id) + " rounds to a zero budget");
      ts.tasks.push_back(Task::lc(id, c_lo, period));
    }
  }
  return ts;
}

}  // namespace

void check_gen_config(const GenConfig& cfg) {
  if (cfg.n_tasks < 1) throw ConfigError("n_tasks must be at least 1");
  if (!(cfg.total_u_lo > 0.0) || cfg.total_u_lo >= cfg.n_tasks) throw ConfigError("total_u_lo must lie in (0, n)");
  if (!(cfg.cf > 1.0)) throw ConfigError("criticality factor must exceed 1");
  if (!(cfg.period_min > 0.0) || cfg.period_max < cfg.period_min) throw ConfigError("bad period range");
  if (cfg.ticks_per_unit < 1) throw ConfigError("ticks_per_unit must be positive");
  if (cfg.hc_fraction < 0.0 || cfg.hc_fraction > 1.0) throw ConfigError("hc_fraction must lie in [0,1]");
  if (!(cfg.checkpoint_fraction > 0.0) || !(cfg.checkpoint_fraction < 1.0)) {
    throw ConfigError("checkpoint fraction must lie in (0,1)");
  }
}

std::vector<double> uunifast(int n, double total_u, Rng& rng) {
  std::vector<double> u;
  u.reserve(n);
  double sum = total_u;
  for (int i = 1; i < n; ++i) {
    const double next = sum * std::pow(rng.uniform01(), 1.0 / static_cast<double>(n - i));
    u.push_back(sum - next);
    sum = next;
  }
  u.push_back(sum);
  return u;
}

std::vector<double> uunifast(int n, double total_u, std::uint64_t seed) {
  Rng rng(seed);
  return uunifast(n, total_u, rng);
}

Taskset generate_taskset(const GenConfig& cfg) {
  check_gen_config(cfg);
  for (int attempt = 0; attempt <= cfg.max_redraws; ++attempt) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(attempt)}));
    try {
      Taskset ts = draw_once(cfg, rng);
      ts.name = "gen-" + std::to_string(cfg.seed);
      return ts;
    } catch (const DegenerateTask&) {
      if (attempt == cfg.max_redraws) throw;
    }
  }
  throw DegenerateTask("no usable taskset");
}

Batch generate_schedulable_batch(const GenConfig& cfg, int count, int max_attempts,
                                 const TasksetTransform& transform) {
  if (count < 1) throw ConfigError("batch count must be at least 1");
  check_gen_config(cfg);
  Batch batch;
  while (static_cast<int>(batch.tasksets.size()) < count) {
    if (batch.attempts >= max_attempts) {
      throw ExhaustedRetries("only " + std::to_string(batch.tasksets.size()) + " of " + std::to_string(count) +
                             " schedulable tasksets after " + std::to_string(max_attempts) + " attempts");
    }
    GenConfig one = cfg;
    one.seed = derive_seed(cfg.seed, {0xba7c4ULL, static_cast<std::uint64_t>(batch.attempts)});
    ++batch.attempts;
    Taskset ts = generate_taskset(one);
    if (transform) transform(ts);
    try {
      batch.tasksets.push_back(audsley_assign(std::move(ts)));
    } catch (const Infeasible&) {
    }
  }
  batch.acceptance_ratio = static_cast<double>(batch.tasksets.size()) / batch.attempts;
  return batch;
}

void set_checkpoint_fraction(Task& task, double p) {
  if (!task.checkpoint) throw MissingCheckpointProfile("task " + std::to_string(task.id) + " has no checkpoint");
  CheckpointProfile& cp = *task.checkpoint;
  const Time ref = cp.reference_c_lo;
  cp.c_cp_lo = std::clamp<Time>(round_ticks(p * static_cast<double>(ref)), 1, ref - 1);
  set_memory(cp);
}

void overestimate_budgets(Taskset& ts, double pct) {
  for (Task& t : ts.tasks) {
    if (!t.is_hc()) continue;
    const Time base = t.checkpoint ? t.checkpoint->reference_c_lo : t.c_lo;
    t.c_lo = std::min(round_ticks(static_cast<double>(base) * (1.0 + pct / 100.0)), t.c_hi - 1);
    t.c_lo = std::max(t.c_lo, base);
  }
}

}  // namespace mcs
