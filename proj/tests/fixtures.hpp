#pragma once

#include "mcs/model.hpp"

namespace fixtures {

// Three-task example: tau1 HC (3, 6, 10), tau2 LC (2, 9), tau3 HC (5, 10, 50).
inline mcs::Taskset three_task(mcs::Time scale = 1) {
  mcs::Taskset ts;
  ts.name = "three_task";
  ts.tasks.push_back(mcs::Task::hc(1, 3 * scale, 6 * scale, 10 * scale, 1));
  ts.tasks.push_back(mcs::Task::lc(2, 2 * scale, 9 * scale, 2));
  ts.tasks.push_back(mcs::Task::hc(3, 5 * scale, 10 * scale, 50 * scale, 3));
  return ts;
}

// Same set with checkpoints halfway through the HC tasks.
inline mcs::Taskset three_task_with_checkpoints(mcs::Time scale) {
  mcs::Taskset ts = three_task(scale);
  for (mcs::Task& t : ts.tasks) {
    if (t.is_hc()) t.checkpoint = mcs::CheckpointProfile{t.c_lo / 2, t.c_lo, std::nullopt};
  }
  return ts;
}

}  // namespace fixtures
