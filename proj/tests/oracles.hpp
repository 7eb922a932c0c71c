#pragma once

// Brute-force reference implementations used by the tests. They scan time
// windows one tick at a time instead of iterating recurrences.

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include "mcs/cfg.hpp"
#include "mcs/model.hpp"

namespace oracle {

using mcs::Task;
using mcs::Taskset;
using mcs::Time;

inline Time ceil_div(Time a, Time b) { return (a + b - 1) / b; }

inline std::vector<const Task*> higher(const Taskset& ts, const Task& t) {
  std::vector<const Task*> hp;
  for (const Task& o : ts.tasks) {
    if (*o.priority < *t.priority) hp.push_back(&o);
  }
  return hp;
}

// Smallest t in [1, limit] with demand(t) <= t.
template <class Demand>
std::optional<Time> first_fit(Demand demand, Time limit) {
  for (Time t = 1; t <= limit; ++t) {
    if (demand(t) <= t) return t;
  }
  return std::nullopt;
}

inline std::optional<Time> r_lo(const Taskset& ts, const Task& t, const std::map<int, Time>& budget = {}) {
  auto c = [&](const Task& x) {
    auto it = budget.find(x.id);
    return it == budget.end() ? x.c_lo : it->second;
  };
  const auto hp = higher(ts, t);
  return first_fit(
      [&](Time w) {
        Time d = c(t);
        for (const Task* o : hp) d += ceil_div(w, o->period) * c(*o);
        return d;
      },
      t.period);
}

inline std::optional<Time> r_hi(const Taskset& ts, const Task& t) {
  const auto hp = higher(ts, t);
  return first_fit(
      [&](Time w) {
        Time d = t.c_hi;
        for (const Task* o : hp) {
          if (o->is_hc()) d += ceil_div(w, o->period) * o->c_hi;
        }
        return d;
      },
      t.period);
}

inline std::optional<Time> r_star(const Taskset& ts, const Task& t, Time lo) {
  const auto hp = higher(ts, t);
  return first_fit(
      [&](Time w) {
        Time d = t.c_hi;
        for (const Task* o : hp) {
          d += o->is_hc() ? ceil_div(w, o->period) * o->c_hi : ceil_div(lo, o->period) * o->c_lo;
        }
        return d;
      },
      t.period);
}

inline bool schedulable(const Taskset& ts) {
  for (const Task& t : ts.tasks) {
    const auto lo = r_lo(ts, t);
    if (!lo) return false;
    if (t.is_hc() && !r_star(ts, t, *lo)) return false;
  }
  return true;
}

// Tries every priority order.
inline bool any_order_schedulable(Taskset ts) {
  std::vector<int> order(ts.tasks.size());
  std::iota(order.begin(), order.end(), 1);
  do {
    for (std::size_t i = 0; i < ts.tasks.size(); ++i) ts.tasks[i].priority = order[i];
    if (schedulable(ts)) return true;
  } while (std::next_permutation(order.begin(), order.end()));
  return false;
}

// Online test with LO budgets `budget` (max extended budgets plus the
// candidate), checking the delayed task and everything below it.
inline bool extension_ok(const Taskset& ts, int delayed, const std::map<int, Time>& budget) {
  const Task& k = ts.at(delayed);
  for (const Task& t : ts.tasks) {
    if (*t.priority < *k.priority) continue;
    const auto lo = r_lo(ts, t, budget);
    if (!lo) return false;
    if (t.is_hc() && !r_star(ts, t, *lo)) return false;
  }
  return true;
}

// Tick-by-tick fixed-priority schedule of synchronous periodic jobs that each
// run exactly C(LO). Returns the worst response time per task over [0, horizon).
inline std::map<int, Time> tick_schedule(const Taskset& ts, Time horizon) {
  std::map<int, Time> remaining, release, worst;
  std::vector<const Task*> order;
  for (const Task& t : ts.tasks) order.push_back(&t);
  std::sort(order.begin(), order.end(), [](const Task* a, const Task* b) { return *a->priority < *b->priority; });
  for (Time now = 0; now < horizon; ++now) {
    for (const Task* t : order) {
      if (now % t->period == 0) {
        remaining[t->id] = t->c_lo;
        release[t->id] = now;
      }
    }
    for (const Task* t : order) {
      if (remaining[t->id] > 0) {
        if (--remaining[t->id] == 0) worst[t->id] = std::max(worst[t->id], now + 1 - release[t->id]);
        break;
      }
    }
  }
  return worst;
}

// d dominates b iff b cannot be reached from the entry once d is removed.
inline bool dominates(const mcs::Cfg& cfg, int d, int b) {
  if (d == b) return true;
  if (d == cfg.entry()) return true;
  std::vector<bool> seen(cfg.size(), false);
  std::vector<int> stack{cfg.entry()};
  seen[cfg.entry()] = true;
  while (!stack.empty()) {
    const int x = stack.back();
    stack.pop_back();
    if (x == b) return false;
    for (int s : cfg.succ(x)) {
      if (s != d && !seen[s]) {
        seen[s] = true;
        stack.push_back(s);
      }
    }
  }
  return true;
}

inline std::optional<int> idom(const mcs::Cfg& cfg, int b) {
  if (b == cfg.entry()) return std::nullopt;
  std::vector<int> doms;
  for (int d = 0; d < cfg.size(); ++d) {
    if (d != b && dominates(cfg, d, b)) doms.push_back(d);
  }
  // The immediate dominator is the strict dominator dominated by all others.
  for (int d : doms) {
    if (std::all_of(doms.begin(), doms.end(), [&](int o) { return dominates(cfg, o, d); })) return d;
  }
  return std::nullopt;
}

}  // namespace oracle
