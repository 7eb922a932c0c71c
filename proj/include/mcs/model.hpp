#pragma once

// Mixed-criticality task model shared by every other module.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcs/errors.hpp"
#include "mcs/ratio.hpp"

namespace mcs {

// Integer ticks. The CLI and file formats use 1 tick = 1 us.
using Time = std::int64_t;
using TaskId = int;

enum class Criticality { LC, HC };

const char* to_string(Criticality level);

// Profiled memory-access counts around a task's checkpoint.
struct MemoryProfile {
  std::int64_t m_lo = 0;
  std::int64_t m_pre_cp_lo = 0;
  std::int64_t m_post_cp_lo = 0;
};

struct CheckpointProfile {
  // Profiled LO-mode time to reach the checkpoint.
  Time c_cp_lo = 0;
  // Profiled average total execution time the checkpoint was measured
  // against. Usually equal to the task's c_lo; differs when the LO budget is
  // configured above the profiled average.
  Time reference_c_lo = 0;
  std::optional<MemoryProfile> mem;

  // c_cp_lo / reference_c_lo.
  Ratio fraction() const { return Ratio{c_cp_lo, reference_c_lo}.reduced(); }
};

struct Task {
  TaskId id = 0;
  Criticality level = Criticality::LC;
  Time c_lo = 0;
  // HI-mode budget. Zero for LC tasks unless a reduced imprecise budget is set.
  Time c_hi = 0;
  Time period = 0;
  Time deadline = 0;
  // Lower number means higher priority. Empty before priority assignment.
  std::optional<int> priority;
  std::optional<CheckpointProfile> checkpoint;

  bool is_hc() const { return level == Criticality::HC; }

  static Task hc(TaskId id, Time c_lo, Time c_hi, Time period, std::optional<int> priority = {});
  static Task lc(TaskId id, Time c_lo, Time period, std::optional<int> priority = {});
};

struct Taskset {
  std::string name;
  std::vector<Task> tasks;

  const Task& at(TaskId id) const;
  Task& at(TaskId id);
  bool contains(TaskId id) const;
  bool fully_prioritized() const;
  Time max_period() const;
  double lo_utilization() const;
};

// Sorts tasks by priority (unprioritized tasks last, then by id).
void sort_by_priority(Taskset& ts);

struct Violation {
  std::optional<TaskId> task;
  std::string message;
};

std::vector<Violation> validate_taskset(const Taskset& ts);

// Tasks with strictly higher priority than the given task, split by level.
// Each list is in priority order.
struct PriorityBands {
  std::vector<TaskId> hp;
  std::vector<TaskId> hp_hc;
  std::vector<TaskId> hp_lc;
};

// Throws UnknownTask, or ConfigError when priorities are missing.
PriorityBands priority_bands(const Taskset& ts, TaskId id);

}  // namespace mcs
