#include "mcs/model.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <set>

namespace mcs {

// ---------------------------------------------------------------------------
// Ratio

namespace {

std::int64_t parse_int(std::string_view text) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError("invalid integer '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

Ratio Ratio::parse(std::string_view text) {
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Ratio r{parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1))};
    if (r.den <= 0 || r.num < 0) throw ParseError("invalid ratio '" + std::string(text) + "'");
    return r.reduced();
  }
  auto dot = text.find('.');
  if (dot == std::string_view::npos) {
    const std::int64_t n = parse_int(text);
    if (n < 0) throw ParseError("negative ratio '" + std::string(text) + "'");
    return Ratio{n, 1};
  }
  std::string_view whole = text.substr(0, dot);
  std::string_view frac = text.substr(dot + 1);
  if (frac.size() > 12 || (whole.empty() && frac.empty())) {
    throw ParseError("invalid decimal '" + std::string(text) + "'");
  }
  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  std::int64_t w = whole.empty() ? 0 : parse_int(whole);
  std::int64_t f = frac.empty() ? 0 : parse_int(frac);
  if (w < 0 || f < 0) throw ParseError("negative ratio '" + std::string(text) + "'");
  return Ratio{w * den + f, den}.reduced();
}

Ratio Ratio::reduced() const {
  if (num == 0) return Ratio{0, 1};
  std::int64_t g = std::gcd(num, den);
  return Ratio{num / g, den / g};
}

std::string Ratio::to_string() const {
  Ratio r = reduced();
  if (r.den == 1) return std::to_string(r.num);
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

std::int64_t round_half_up_div(Wide num, Wide den) {
  return static_cast<std::int64_t>((2 * num + den) / (2 * den));
}

// ---------------------------------------------------------------------------
// Task model

const char* to_string(Criticality level) { return level == Criticality::HC ? "HC" : "LC"; }

Task Task::hc(TaskId id, Time c_lo, Time c_hi, Time period, std::optional<int> priority) {
  Task t;
  t.id = id;
  t.level = Criticality::HC;
  t.c_lo = c_lo;
  t.c_hi = c_hi;
  t.period = period;
  t.deadline = period;
  t.priority = priority;
  return t;
}

Task Task::lc(TaskId id, Time c_lo, Time period, std::optional<int> priority) {
  Task t;
  t.id = id;
  t.level = Criticality::LC;
  t.c_lo = c_lo;
  t.c_hi = 0;
  t.period = period;
  t.deadline = period;
  t.priority = priority;
  return t;
}

const Task& Taskset::at(TaskId id) const {
  for (const Task& t : tasks) {
    if (t.id == id) return t;
  }
  throw UnknownTask("unknown task id " + std::to_string(id));
}

Task& Taskset::at(TaskId id) {
  return const_cast<Task&>(static_cast<const Taskset&>(*this).at(id));
}

bool Taskset::contains(TaskId id) const {
  return std::any_of(tasks.begin(), tasks.end(), [id](const Task& t) { return t.id == id; });
}

bool Taskset::fully_prioritized() const {
  return std::all_of(tasks.begin(), tasks.end(), [](const Task& t) { return t.priority.has_value(); });
}

Time Taskset::max_period() const {
  Time m = 0;
  for (const Task& t : tasks) m = std::max(m, t.period);
  return m;
}

double Taskset::lo_utilization() const {
  double u = 0.0;
  for (const Task& t : tasks) u += static_cast<double>(t.c_lo) / static_cast<double>(t.period);
  return u;
}

void sort_by_priority(Taskset& ts) {
  std::stable_sort(ts.tasks.begin(), ts.tasks.end(), [](const Task& a, const Task& b) {
    if (a.priority.has_value() != b.priority.has_value()) return a.priority.has_value();
    if (a.priority && *a.priority != *b.priority) return *a.priority < *b.priority;
    return a.id < b.id;
  });
}

std::vector<Violation> validate_taskset(const Taskset& ts) {
  std::vector<Violation> out;
  if (ts.tasks.empty()) {
    out.push_back({std::nullopt, "taskset is empty"});
    return out;
  }
  std::set<TaskId> ids;
  std::set<int> priorities;
  for (const Task& t : ts.tasks) {
    auto flag = [&](std::string msg) { out.push_back({t.id, std::move(msg)}); };
    if (!ids.insert(t.id).second) flag("duplicate id");
    if (t.priority && !priorities.insert(*t.priority).second) flag("duplicate priority");
    if (t.period <= 0) flag("period must be positive");
    if (t.deadline != t.period) flag("deadline must equal period");
    if (t.c_lo <= 0) flag("c_lo must be positive");
    if (t.is_hc()) {
      if (t.c_hi <= t.c_lo) flag("c_hi must exceed c_lo");
    } else {
      if (t.c_hi < 0 || t.c_hi > t.c_lo) flag("LC c_hi must lie in [0, c_lo]");
      if (t.checkpoint) flag("checkpoint profile is only valid for HC tasks");
    }
    if (t.checkpoint) {
      const CheckpointProfile& cp = *t.checkpoint;
      if (cp.reference_c_lo <= 0) flag("checkpoint reference c_lo must be positive");
      if (cp.c_cp_lo <= 0 || cp.c_cp_lo >= cp.reference_c_lo) {
        flag("checkpoint c_cp_lo must lie strictly between 0 and c_lo");
      }
      if (cp.mem) {
        const MemoryProfile& m = *cp.mem;
        if (m.m_lo <= 0 || m.m_pre_cp_lo <= 0 || m.m_post_cp_lo <= 0) {
          flag("memory counts must be positive");
        }
        if (m.m_pre_cp_lo + m.m_post_cp_lo != m.m_lo) {
          flag("memory counts before and after the checkpoint must sum to m_lo");
        }
      }
    }
  }
  return out;
}

PriorityBands priority_bands(const Taskset& ts, TaskId id) {
  const Task& self = ts.at(id);
  if (!self.priority) throw ConfigError("task " + std::to_string(id) + " has no priority");
  std::vector<const Task*> higher;
  for (const Task& t : ts.tasks) {
    if (t.id == id) continue;
    if (!t.priority) throw ConfigError("task " + std::to_string(t.id) + " has no priority");
    if (*t.priority < *self.priority) higher.push_back(&t);
  }
  std::sort(higher.begin(), higher.end(),
            [](const Task* a, const Task* b) { return *a->priority < *b->priority; });
  PriorityBands bands;
  for (const Task* t : higher) {
    bands.hp.push_back(t->id);
    (t->is_hc() ? bands.hp_hc : bands.hp_lc).push_back(t->id);
  }
  return bands;
}

}  // namespace mcs
