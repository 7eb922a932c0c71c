#pragma once

// Random mixed-criticality tasksets: UUnifast utilizations, random periods,
// C(HI) = cf * C(LO), alternating criticality levels.

#include <cstdint>
#include <functional>
#include <vector>

#include "mcs/model.hpp"
#include "mcs/rng.hpp"

namespace mcs {

struct GenConfig {
  int n_tasks = 10;
  double total_u_lo = 0.6;
  double cf = 1.8;
  // Period range in simulated units; one unit is ticks_per_unit ticks.
  double period_min = 10.0;
  double period_max = 1000.0;
  Time ticks_per_unit = 1000;
  bool log_uniform_periods = false;
  double hc_fraction = 0.5;
  // Checkpoint position as a fraction of C(LO) for HC tasks.
  double checkpoint_fraction = 0.5;
  std::uint64_t seed = 1;
  // Redraws allowed when a task rounds to an unusable budget.
  int max_redraws = 1000;
};

// Throws ConfigError when the config is out of range.
void check_gen_config(const GenConfig& cfg);

std::vector<double> uunifast(int n, double total_u, Rng& rng);
std::vector<double> uunifast(int n, double total_u, std::uint64_t seed);

// Unprioritized taskset with ids 1..n. HC tasks carry a checkpoint profile and
// a synthetic memory profile. Throws DegenerateTask when every redraw fails.
Taskset generate_taskset(const GenConfig& cfg);

// Applied to each candidate before the schedulability test.
using TasksetTransform = std::function<void(Taskset&)>;

struct Batch {
  std::vector<Taskset> tasksets;
  int attempts = 0;
  double acceptance_ratio = 0.0;
};

// Draws candidates with per-attempt sub-seeds until `count` of them pass
// Audsley + AMC-rtb. Returned sets carry their priorities. Throws
// ExhaustedRetries after max_attempts candidates.
Batch generate_schedulable_batch(const GenConfig& cfg, int count, int max_attempts = 100000,
                                 const TasksetTransform& transform = {});

// Checkpoint at fraction p of C(LO), clamped inside (0, C(LO)). Memory counts
// follow the new split.
void set_checkpoint_fraction(Task& task, double p);

// Inflates every HC task's C(LO) by pct percent (capped below C(HI)); the
// profiled reference and checkpoint stay as measured.
void overestimate_budgets(Taskset& ts, double pct);

}  // namespace mcs
