#include "mcs/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <thread>

#include "mcs/online.hpp"
#include "mcs/rng.hpp"
#include "mcs/rta.hpp"

namespace mcs {

using nlohmann::json;

namespace {

// Runs fn(0..n-1) on a small thread pool. The first exception by index is
// rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double parse_number(const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw ConfigError("bad sweep value '" + text + "'");
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("bad sweep value '" + text + "'");
  }
}

struct Cell {
  GenConfig gen;
  double overestimate_pct = 0.0;
  std::optional<PredictionModel> model;
};

Cell make_cell(const SweepSpec& spec, const std::string& value) {
  Cell cell;
  cell.gen = spec.gen;
  switch (spec.variable) {
    case SweepVariable::NTasks: {
      const double n = parse_number(value);
      if (n != static_cast<int>(n)) throw ConfigError("n_tasks values must be integers");
      cell.gen.n_tasks = static_cast<int>(n);
      break;
    }
    case SweepVariable::TotalULo:
      cell.gen.total_u_lo = parse_number(value);
      break;
    case SweepVariable::OverestimatePct:
      cell.overestimate_pct = parse_number(value);
      if (cell.overestimate_pct < 0) throw ConfigError("overestimate must be non-negative");
      break;
    case SweepVariable::CheckpointFrac:
      cell.gen.checkpoint_fraction = parse_number(value);
      break;
    case SweepVariable::Model:
      try {
        cell.model = parse_model(value);
      } catch (const ParseError& e) {
        throw ConfigError(e.what());
      }
      break;
  }
  check_gen_config(cell.gen);
  return cell;
}

struct Stat {
  double sum = 0.0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  int n = 0;

  void add(double x) {
    sum += x;
    min = std::min(min, x);
    max = std::max(max, x);
    ++n;
  }
  json to_json() const {
    return {{"mean", n ? sum / n : 0.0}, {"min", n ? min : 0.0}, {"max", n ? max : 0.0}};
  }
};

}  // namespace

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::NTasks: return "n_tasks";
    case SweepVariable::TotalULo: return "total_u_lo";
    case SweepVariable::OverestimatePct: return "overestimate_pct";
    case SweepVariable::CheckpointFrac: return "checkpoint_frac";
    case SweepVariable::Model: return "model";
  }
  return "?";
}

SweepVariable parse_sweep_variable(std::string_view text) {
  for (SweepVariable v : {SweepVariable::NTasks, SweepVariable::TotalULo, SweepVariable::OverestimatePct,
                          SweepVariable::CheckpointFrac, SweepVariable::Model}) {
    if (text == to_string(v)) return v;
  }
  throw ParseError("unknown sweep variable '" + std::string(text) + "'");
}

void check_sweep_spec(const SweepSpec& spec) {
  if (spec.values.empty()) throw ConfigError("sweep needs at least one value");
  if (spec.repetitions < 1) throw ConfigError("sweep needs at least one repetition");
  if (spec.horizon_periods < 1) throw ConfigError("horizon must cover at least one period");
  if (spec.policies.empty()) throw ConfigError("sweep needs at least one policy");
  for (const std::string& v : spec.values) make_cell(spec, v);
}

SweepResult run_sweep(const SweepSpec& spec) {
  check_sweep_spec(spec);
  const std::size_t n_values = spec.values.size();
  const std::size_t n_reps = static_cast<std::size_t>(spec.repetitions);
  const std::size_t n_pol = spec.policies.size();
  SweepResult result;
  result.spec = spec;
  result.rows.resize(n_values * n_reps * n_pol);

  parallel_for(n_values * n_reps, spec.threads, [&](std::size_t index) {
    const std::size_t vi = index / n_reps;
    const int rep = static_cast<int>(index % n_reps);
    const std::string& value = spec.values[vi];
    Cell cell = make_cell(spec, value);
    const std::uint64_t cell_seed = derive_seed(spec.seed, {static_cast<std::uint64_t>(rep)});
    cell.gen.seed = cell_seed;

    TasksetTransform transform;
    if (cell.overestimate_pct > 0) {
      transform = [pct = cell.overestimate_pct](Taskset& ts) { overestimate_budgets(ts, pct); };
    }
    Taskset ts = generate_schedulable_batch(cell.gen, 1, spec.max_attempts, transform).tasksets.front();
    const Time horizon = spec.horizon_periods * ts.max_period();

    WorkloadConfig wl = spec.workload;
    wl.seed = derive_seed(cell_seed, {0xd3a4dULL});
    const DemandStreams demands = generate_demands(ts, wl, horizon);

    for (std::size_t pi = 0; pi < n_pol; ++pi) {
      SimOptions opt = spec.sim;
      opt.policy = spec.policies[pi];
      opt.horizon = horizon;
      if (cell.model) opt.model = *cell.model;
      SweepRow& row = result.rows[index * n_pol + pi];
      row.value = value;
      row.rep = rep;
      row.policy = opt.policy;
      row.n_tasks = static_cast<int>(ts.tasks.size());
      row.u_lo = ts.lo_utilization();
      row.metrics = simulate(ts, demands, opt).metrics;
    }
  });
  return result;
}

json sweep_config_json(const SweepSpec& spec) {
  json policies = json::array();
  for (Policy p : spec.policies) policies.push_back(to_string(p));
  return {
      {"variable", to_string(spec.variable)},
      {"values", spec.values},
      {"repetitions", spec.repetitions},
      {"seed", spec.seed},
      {"n_tasks", spec.gen.n_tasks},
      {"total_u_lo", spec.gen.total_u_lo},
      {"cf", spec.gen.cf},
      {"period_min", spec.gen.period_min},
      {"period_max", spec.gen.period_max},
      {"ticks_per_unit", spec.gen.ticks_per_unit},
      {"log_uniform_periods", spec.gen.log_uniform_periods},
      {"hc_fraction", spec.gen.hc_fraction},
      {"checkpoint_fraction", spec.gen.checkpoint_fraction},
      {"slowdown_prob", spec.workload.slowdown_prob},
      {"slowdown_cf", spec.workload.cf},
      {"correlation", spec.workload.correlation},
      {"model", to_string(spec.sim.model)},
      {"decision_overhead", spec.sim.decision_overhead},
      {"iteration_cap", spec.sim.iteration_cap},
      {"switch_back", spec.sim.switch_back == SwitchBack::NoOverrun ? "no_overrun" : "idle"},
      {"horizon_periods", spec.horizon_periods},
      {"policies", policies},
  };
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << "# config " << sweep_config_json(result.spec).dump() << '\n';
  out << "variable,value,rep,policy,n_tasks,u_lo,horizon,lc_avg_utilization,lc_jobs_completed,lc_jobs_dropped,"
         "lc_deadline_misses,hc_jobs_completed,hc_deadline_misses,hi_mode_switches,hi_mode_time,"
         "extensions_approved,extensions_denied,extensions_aborted,max_online_iterations,pred_err_count,"
         "pred_err_mean_pct\n";
  const char* var = to_string(result.spec.variable);
  for (const SweepRow& r : result.rows) {
    const SimMetrics& m = r.metrics;
    out << var << ',' << r.value << ',' << r.rep << ',' << to_string(r.policy) << ',' << r.n_tasks << ','
        << format_double(r.u_lo) << ',' << m.horizon << ',' << format_double(m.lc_avg_utilization) << ','
        << m.lc_jobs_completed << ',' << m.lc_jobs_dropped << ',' << m.lc_deadline_misses << ','
        << m.hc_jobs_completed << ',' << m.hc_deadline_misses << ',' << m.hi_mode_switches << ','
        << m.hi_mode_time << ',' << m.extensions_approved << ',' << m.extensions_denied << ','
        << m.extensions_aborted << ',' << m.max_online_iterations << ',' << m.prediction_error.count << ','
        << format_double(m.prediction_error.mean_pct) << '\n';
  }
}

json sweep_summary(const SweepResult& result) {
  struct Acc {
    Stat util, switches, approved, denied, hc_misses, pred_err;
  };
  std::map<std::pair<std::size_t, int>, Acc> acc;
  const auto& values = result.spec.values;
  for (const SweepRow& r : result.rows) {
    const std::size_t vi = std::find(values.begin(), values.end(), r.value) - values.begin();
    Acc& a = acc[{vi, static_cast<int>(r.policy)}];
    a.util.add(r.metrics.lc_avg_utilization);
    a.switches.add(r.metrics.hi_mode_switches);
    a.approved.add(r.metrics.extensions_approved);
    a.denied.add(r.metrics.extensions_denied);
    a.hc_misses.add(r.metrics.hc_deadline_misses);
    if (r.metrics.prediction_error.count > 0) a.pred_err.add(r.metrics.prediction_error.mean_pct);
  }
  json cells = json::array();
  for (const auto& [key, a] : acc) {
    cells.push_back({{"value", values[key.first]},
                     {"policy", to_string(static_cast<Policy>(key.second))},
                     {"runs", a.util.n},
                     {"lc_avg_utilization", a.util.to_json()},
                     {"hi_mode_switches", a.switches.to_json()},
                     {"extensions_approved", a.approved.to_json()},
                     {"extensions_denied", a.denied.to_json()},
                     {"hc_deadline_misses", a.hc_misses.to_json()},
                     {"prediction_error_pct", a.pred_err.to_json()}});
  }
  return {{"config", sweep_config_json(result.spec)}, {"cells", cells}};
}

IterationStudy run_iteration_study(const IterationStudySpec& spec) {
  if (spec.n_tasksets < 1) throw ConfigError("iteration study needs at least one taskset");
  if (spec.utilizations.empty() || spec.extra_pcts.empty()) throw ConfigError("iteration study needs a grid");
  const std::size_t n_u = spec.utilizations.size();
  const std::size_t n_pct = spec.extra_pcts.size();
  IterationStudy study;
  study.cells.resize(n_u * n_pct);
  study.acceptance.resize(n_u);

  // Tasksets per utilization are drawn in chunks so the batches parallelize.
  const int chunk = 25;
  const int n_chunks = (spec.n_tasksets + chunk - 1) / chunk;
  std::vector<std::vector<IterationCell>> partial(n_u * n_chunks, std::vector<IterationCell>(n_pct));
  std::vector<int> attempts(n_u * n_chunks, 0), accepted(n_u * n_chunks, 0);

  parallel_for(n_u * n_chunks, spec.threads, [&](std::size_t index) {
    const std::size_t ui = index / n_chunks;
    const int ci = static_cast<int>(index % n_chunks);
    const int count = std::min(chunk, spec.n_tasksets - ci * chunk);
    GenConfig gen = spec.gen;
    gen.total_u_lo = spec.utilizations[ui];
    gen.seed = derive_seed(spec.seed, {static_cast<std::uint64_t>(ui), static_cast<std::uint64_t>(ci)});
    const Batch batch = generate_schedulable_batch(gen, count, spec.max_attempts);
    attempts[index] = batch.attempts;
    accepted[index] = count;
    for (const Taskset& ts : batch.tasksets) {
      const std::vector<RuntimeTaskState> states = initial_states(ts);
      auto top = std::find_if(states.begin(), states.end(), [](const RuntimeTaskState& s) { return s.task.is_hc(); });
      if (top == states.end()) continue;
      const ResponseTimes offline = analyze(ts);
      for (std::size_t pi = 0; pi < n_pct; ++pi) {
        const Time c_lo = top->task.c_lo;
        const Time extra = std::max<Time>(1, (c_lo * spec.extra_pcts[pi] + 50) / 100);
        const ExtensionDecision d = evaluate_budget_change(states, offline, ExtensionRequest(top->task.id, extra, 0),
                                                           std::numeric_limits<int>::max());
        IterationCell& cell = partial[index][pi];
        ++cell.tasksets;
        if (d.approved) ++cell.approved;
        cell.max_iterations = std::max(cell.max_iterations, d.iterations_used);
      }
    }
  });

  for (std::size_t ui = 0; ui < n_u; ++ui) {
    int att = 0, acc = 0;
    for (int ci = 0; ci < n_chunks; ++ci) {
      const std::size_t index = ui * n_chunks + ci;
      att += attempts[index];
      acc += accepted[index];
      for (std::size_t pi = 0; pi < n_pct; ++pi) {
        IterationCell& cell = study.cells[ui * n_pct + pi];
        const IterationCell& part = partial[index][pi];
        cell.tasksets += part.tasksets;
        cell.approved += part.approved;
        cell.max_iterations = std::max(cell.max_iterations, part.max_iterations);
      }
    }
    study.acceptance[ui] = att ? static_cast<double>(acc) / att : 0.0;
    for (std::size_t pi = 0; pi < n_pct; ++pi) {
      IterationCell& cell = study.cells[ui * n_pct + pi];
      cell.utilization = spec.utilizations[ui];
      cell.extra_pct = spec.extra_pcts[pi];
      study.global_max = std::max(study.global_max, cell.max_iterations);
    }
  }
  return study;
}

void write_iteration_csv(const IterationStudy& study, const IterationStudySpec& spec, std::ostream& out) {
  out << "# config "
      << json{{"n_tasksets", spec.n_tasksets},
              {"n_tasks", spec.gen.n_tasks},
              {"cf", spec.gen.cf},
              {"period_min", spec.gen.period_min},
              {"period_max", spec.gen.period_max},
              {"hc_fraction", spec.gen.hc_fraction},
              {"utilizations", spec.utilizations},
              {"extra_pcts", spec.extra_pcts},
              {"seed", spec.seed}}
             .dump()
      << '\n';
  out << "utilization,extra_pct,tasksets,approved,max_iterations\n";
  for (const IterationCell& c : study.cells) {
    out << format_double(c.utilization) << ',' << c.extra_pct << ',' << c.tasksets << ',' << c.approved << ','
        << c.max_iterations << '\n';
  }
}

}  // namespace mcs
