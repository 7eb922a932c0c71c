// mcsched: command-line front end for the analysis, generation, placement and
// simulation library.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcs/cfg.hpp"
#include "mcs/experiments.hpp"
#include "mcs/online.hpp"
#include "mcs/rta.hpp"
#include "mcs/simulator.hpp"
#include "mcs/taskgen.hpp"
#include "mcs/taskset_io.hpp"
#include "mcs/workload.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;

struct Global {
  std::uint64_t seed = 1;
  std::string out = "-";
  std::string format;
};

// The result format: explicit --format, else the command's default.
std::string pick_format(const Global& g, const char* fallback) { return g.format.empty() ? fallback : g.format; }

void write_out(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw mcs::ConfigError("cannot write " + path);
  fn(file);
}

std::string opt_time(const std::optional<mcs::Time>& t) { return t ? std::to_string(*t) : ""; }

json opt_json(const std::optional<mcs::Time>& t) { return t ? json(*t) : json(nullptr); }

json metrics_json(const mcs::SimMetrics& m) {
  json iters = json::object();
  for (const auto& [k, v] : m.online_iterations) iters[std::to_string(k)] = v;
  json worst = json::object();
  for (const auto& [k, v] : m.worst_response) worst[std::to_string(k)] = v;
  return {{"horizon", m.horizon},
          {"lc_cpu_time", m.lc_cpu_time},
          {"lc_avg_utilization", m.lc_avg_utilization},
          {"lc_jobs_completed", m.lc_jobs_completed},
          {"lc_jobs_dropped", m.lc_jobs_dropped},
          {"lc_deadline_misses", m.lc_deadline_misses},
          {"hc_jobs_completed", m.hc_jobs_completed},
          {"hc_deadline_misses", m.hc_deadline_misses},
          {"hi_mode_switches", m.hi_mode_switches},
          {"hi_mode_time", m.hi_mode_time},
          {"extensions_approved", m.extensions_approved},
          {"extensions_denied", m.extensions_denied},
          {"extensions_aborted", m.extensions_aborted},
          {"prediction_error",
           {{"count", m.prediction_error.count},
            {"mean_pct", m.prediction_error.mean_pct},
            {"min_pct", m.prediction_error.min_pct},
            {"max_pct", m.prediction_error.max_pct}}},
          {"online_iterations", iters},
          {"max_online_iterations", m.max_online_iterations},
          {"worst_response", worst}};
}

mcs::Taskset load_prioritized(const std::string& path) {
  mcs::Taskset ts = mcs::load_taskset(path);
  if (!ts.fully_prioritized()) ts = mcs::audsley_assign(std::move(ts));
  return ts;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// ---- rta / audsley -------------------------------------------------------

int cmd_rta(const Global& g, const std::string& path) {
  mcs::Taskset ts = mcs::load_taskset(path);
  if (!ts.fully_prioritized()) throw mcs::ConfigError("taskset has unassigned priorities; run audsley first");
  const mcs::SchedulabilityVerdict v = mcs::amc_rtb_schedulable(ts);
  write_out(g.out, [&](std::ostream& out) {
    if (pick_format(g, "json") == "csv") {
      out << "id,level,period,r_lo,r_hi,r_star\n";
      for (const auto& r : v.response_times.tasks) {
        out << r.id << ',' << mcs::to_string(r.level) << ',' << r.period << ',' << opt_time(r.r_lo) << ','
            << opt_time(r.r_hi) << ',' << opt_time(r.r_star) << '\n';
      }
      return;
    }
    json tasks = json::array();
    for (const auto& r : v.response_times.tasks) {
      tasks.push_back({{"id", r.id},
                       {"level", mcs::to_string(r.level)},
                       {"period", r.period},
                       {"r_lo", opt_json(r.r_lo)},
                       {"r_hi", opt_json(r.r_hi)},
                       {"r_star", opt_json(r.r_star)}});
    }
    json doc{{"schedulable", v.schedulable}, {"tasks", tasks}};
    doc["failing_task"] = v.failing_task ? json(*v.failing_task) : json(nullptr);
    out << doc.dump(2) << '\n';
  });
  return v.schedulable ? kExitOk : kExitInfeasible;
}

int cmd_audsley(const Global& g, const std::string& path) {
  const mcs::Taskset ts = mcs::audsley_assign(mcs::load_taskset(path));
  write_out(g.out, [&](std::ostream& out) { out << mcs::taskset_to_json(ts).dump(2) << '\n'; });
  return kExitOk;
}

// ---- extend ----------------------------------------------------------------

struct RequestSpec {
  mcs::TaskId task = 0;
  mcs::Time extra = 0;
  mcs::Time at = 0;
};

// "id:extra" or "id:extra@time".
RequestSpec parse_request(const std::string& text) {
  RequestSpec r;
  char tail = 0;
  long long id = 0, extra = 0, at = 0;
  if (std::sscanf(text.c_str(), "%lld:%lld@%lld%c", &id, &extra, &at, &tail) == 3 ||
      std::sscanf(text.c_str(), "%lld:%lld%c", &id, &extra, &tail) == 2) {
    r.task = static_cast<mcs::TaskId>(id);
    r.extra = extra;
    r.at = at;
    return r;
  }
  throw mcs::ConfigError("bad request '" + text + "', expected id:extra[@time]");
}

int cmd_extend(const Global& g, const std::string& path, const std::vector<std::string>& requests, int cap) {
  mcs::OnlineScheduler sched(load_prioritized(path), cap);
  json results = json::array();
  std::ostringstream csv;
  csv << "request,task,extra,at,approved,aborted,iterations,effective_extra,requested_budget,failing_task\n";
  int index = 0;
  for (const std::string& text : requests) {
    const RequestSpec r = parse_request(text);
    sched.reset_stale(r.at);
    const mcs::ExtensionDecision d = sched.request(mcs::ExtensionRequest(r.task, r.extra, r.at));
    json responses = json::array();
    for (const auto& er : d.responses) {
      responses.push_back({{"id", er.id}, {"r_lo_ext", opt_json(er.r_lo_ext)}, {"r_star_ext", opt_json(er.r_star_ext)}});
    }
    json item{{"task", r.task},
              {"extra", r.extra},
              {"at", r.at},
              {"approved", d.approved},
              {"aborted", d.aborted},
              {"iterations", d.iterations_used},
              {"effective_extra", d.effective_extra},
              {"requested_budget", d.requested_budget},
              {"responses", responses}};
    item["failing_task"] = d.failing_task ? json(*d.failing_task) : json(nullptr);
    results.push_back(item);
    csv << index++ << ',' << r.task << ',' << r.extra << ',' << r.at << ',' << d.approved << ',' << d.aborted << ','
        << d.iterations_used << ',' << d.effective_extra << ',' << d.requested_budget << ','
        << (d.failing_task ? std::to_string(*d.failing_task) : "") << '\n';
  }
  write_out(g.out, [&](std::ostream& out) {
    if (pick_format(g, "json") == "csv") {
      out << csv.str();
    } else {
      out << json{{"requests", results}}.dump(2) << '\n';
    }
  });
  return kExitOk;
}

// ---- gen -------------------------------------------------------------------

int cmd_gen(const Global& g, mcs::GenConfig cfg, int count, bool schedulable, int max_attempts) {
  cfg.seed = g.seed;
  std::vector<mcs::Taskset> sets;
  double acceptance = 1.0;
  if (schedulable) {
    mcs::Batch batch = mcs::generate_schedulable_batch(cfg, count, max_attempts);
    sets = std::move(batch.tasksets);
    acceptance = batch.acceptance_ratio;
  } else {
    for (int i = 0; i < count; ++i) {
      mcs::GenConfig one = cfg;
      one.seed = mcs::derive_seed(g.seed, {static_cast<std::uint64_t>(i)});
      sets.push_back(mcs::generate_taskset(one));
    }
  }
  for (std::size_t i = 0; i < sets.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "taskset_%03zu", i);
    sets[i].name = name;
  }
  if (g.out == "-") {
    if (sets.size() != 1) throw mcs::ConfigError("--out DIR is required when generating more than one taskset");
    std::cout << mcs::taskset_to_json(sets.front()).dump(2) << '\n';
    return kExitOk;
  }
  fs::create_directories(g.out);
  for (const mcs::Taskset& ts : sets) mcs::save_taskset(ts, fs::path(g.out) / (ts.name + ".json"));
  std::cerr << "wrote " << sets.size() << " tasksets to " << g.out;
  if (schedulable) std::cerr << " (acceptance " << mcs::format_double(acceptance) << ")";
  std::cerr << '\n';
  return kExitOk;
}

// ---- checkpoint --------------------------------------------------------------

int cmd_checkpoint(const Global& g, const std::string& path, const std::string& annotated) {
  mcs::CfgFormat format = mcs::CfgFormat::Json;
  const mcs::Cfg cfg = mcs::load_cfg(path, &format);
  const mcs::LoopInfo loops = mcs::compute_loops(cfg);
  const mcs::CheckpointPlacement placement = mcs::insert_checkpoints(cfg, loops);
  for (const std::string& w : loops.warnings) std::cerr << "warning: " << w << '\n';
  write_out(g.out, [&](std::ostream& out) {
    if (pick_format(g, "json") == "csv") {
      out << "function,block,header,synthetic\n";
      for (const auto& s : placement.sites) {
        out << s.function << ',' << s.block << ',' << s.header << ',' << (s.synthetic ? 1 : 0) << '\n';
      }
    } else {
      out << mcs::placement_to_json(cfg, loops, placement).dump(2) << '\n';
    }
  });
  if (!annotated.empty()) {
    write_out(annotated, [&](std::ostream& out) {
      if (format == mcs::CfgFormat::Dot) {
        out << mcs::cfg_to_dot(cfg, placement);
      } else {
        out << mcs::cfg_to_json(cfg, placement).dump(2) << '\n';
      }
    });
  }
  return kExitOk;
}

// ---- simulate ----------------------------------------------------------------

struct SimArgs {
  std::string policy = "pastime";
  std::string model = "linear";
  mcs::Time horizon = 0;
  mcs::Time overhead = 130;
  int cap = mcs::kDefaultOnlineIterationCap;
  double lc_hi_budget = 0.0;
  double checkpoint_frac = 0.0;
  double slowdown_prob = 0.5;
  double correlation = 1.0;
  double cf = 1.8;
  std::string switch_back = "no-overrun";
  std::string trace;
};

mcs::SwitchBack parse_switch_back(const std::string& text) {
  if (text == "no-overrun") return mcs::SwitchBack::NoOverrun;
  if (text == "idle") return mcs::SwitchBack::IdleInstant;
  throw mcs::ConfigError("unknown switch-back rule '" + text + "'");
}

int cmd_simulate(const Global& g, const std::string& path, const SimArgs& a) {
  mcs::Taskset ts = load_prioritized(path);
  for (mcs::Task& t : ts.tasks) {
    if (t.is_hc()) {
      if (a.checkpoint_frac > 0.0) {
        if (!t.checkpoint) t.checkpoint = mcs::CheckpointProfile{0, t.c_lo, std::nullopt};
        mcs::set_checkpoint_fraction(t, a.checkpoint_frac);
      }
    } else if (a.lc_hi_budget > 0.0) {
      t.c_hi = std::min(t.c_lo, static_cast<mcs::Time>(std::floor(a.lc_hi_budget * static_cast<double>(t.c_lo) + 0.5)));
    }
  }
  mcs::SimOptions opt;
  opt.policy = mcs::parse_policy(a.policy);
  opt.model = mcs::parse_model(a.model);
  opt.horizon = a.horizon > 0 ? a.horizon : 20 * ts.max_period();
  opt.decision_overhead = a.overhead;
  opt.iteration_cap = a.cap;
  opt.switch_back = parse_switch_back(a.switch_back);

  mcs::WorkloadConfig wl;
  wl.seed = g.seed;
  wl.slowdown_prob = a.slowdown_prob;
  wl.correlation = a.correlation;
  wl.cf = a.cf;
  const mcs::DemandStreams demands = mcs::generate_demands(ts, wl, opt.horizon);
  const mcs::SimResult result = mcs::simulate(ts, demands, opt);

  if (!a.trace.empty()) write_out(a.trace, [&](std::ostream& out) { mcs::write_trace_csv(result.trace, out); });
  write_out(g.out, [&](std::ostream& out) {
    const mcs::SimMetrics& m = result.metrics;
    if (pick_format(g, "json") == "csv") {
      out << "policy,horizon,lc_avg_utilization,lc_jobs_completed,lc_jobs_dropped,hc_deadline_misses,"
             "hi_mode_switches,extensions_approved,extensions_denied,max_online_iterations\n";
      out << mcs::to_string(opt.policy) << ',' << m.horizon << ',' << mcs::format_double(m.lc_avg_utilization) << ','
          << m.lc_jobs_completed << ',' << m.lc_jobs_dropped << ',' << m.hc_deadline_misses << ','
          << m.hi_mode_switches << ',' << m.extensions_approved << ',' << m.extensions_denied << ','
          << m.max_online_iterations << '\n';
    } else {
      json doc{{"policy", mcs::to_string(opt.policy)}, {"model", mcs::to_string(opt.model)}, {"seed", g.seed},
               {"metrics", metrics_json(m)}};
      out << doc.dump(2) << '\n';
    }
  });
  return kExitOk;
}

// ---- sweep / iters ---------------------------------------------------------

int cmd_sweep(const Global& g, mcs::SweepSpec spec, const std::string& variable, const std::string& values,
              const std::string& model, const std::string& summary) {
  spec.seed = g.seed;
  spec.variable = mcs::parse_sweep_variable(variable);
  spec.values = split_list(values);
  spec.sim.model = mcs::parse_model(model);
  const mcs::SweepResult result = mcs::run_sweep(spec);
  write_out(g.out, [&](std::ostream& out) {
    if (pick_format(g, "csv") == "json") {
      out << mcs::sweep_summary(result).dump(2) << '\n';
    } else {
      mcs::write_sweep_csv(result, out);
    }
  });
  if (!summary.empty()) {
    write_out(summary, [&](std::ostream& out) { out << mcs::sweep_summary(result).dump(2) << '\n'; });
  }
  return kExitOk;
}

int cmd_iters(const Global& g, mcs::IterationStudySpec spec, const std::string& utils, const std::string& extras) {
  spec.seed = g.seed;
  spec.utilizations.clear();
  for (const std::string& u : split_list(utils)) spec.utilizations.push_back(std::stod(u));
  spec.extra_pcts.clear();
  for (const std::string& e : split_list(extras)) spec.extra_pcts.push_back(std::stoi(e));
  const mcs::IterationStudy study = mcs::run_iteration_study(spec);
  write_out(g.out, [&](std::ostream& out) {
    if (pick_format(g, "csv") == "json") {
      json cells = json::array();
      for (const auto& c : study.cells) {
        cells.push_back({{"utilization", c.utilization},
                         {"extra_pct", c.extra_pct},
                         {"tasksets", c.tasksets},
                         {"approved", c.approved},
                         {"max_iterations", c.max_iterations}});
      }
      out << json{{"global_max", study.global_max}, {"acceptance", study.acceptance}, {"cells", cells}}.dump(2)
          << '\n';
    } else {
      mcs::write_iteration_csv(study, spec, out);
    }
  });
  std::cerr << "max iterations: " << study.global_max << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-criticality scheduling toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "Top-level random seed")->capture_default_str();
  app.add_option("--out", g.out, "Output file or directory ('-' for stdout)")->capture_default_str();
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  std::string input;
  std::function<int()> run;

  auto* rta = app.add_subcommand("rta", "AMC-rtb response times of a prioritized taskset");
  rta->add_option("taskset", input, "Taskset JSON")->required();
  rta->callback([&] { run = [&] { return cmd_rta(g, input); }; });

  auto* aud = app.add_subcommand("audsley", "Assign priorities with Audsley's algorithm");
  aud->add_option("taskset", input, "Taskset JSON")->required();
  aud->callback([&] { run = [&] { return cmd_audsley(g, input); }; });

  std::vector<std::string> requests;
  int cap = mcs::kDefaultOnlineIterationCap;
  auto* ext = app.add_subcommand("extend", "Evaluate budget-extension requests in sequence");
  ext->add_option("taskset", input, "Taskset JSON")->required();
  ext->add_option("--request", requests, "id:extra[@time], repeatable")->required();
  ext->add_option("--cap", cap, "Iteration cap")->capture_default_str();
  ext->callback([&] { run = [&] { return cmd_extend(g, input, requests, cap); }; });

  mcs::GenConfig gen;
  int count = 1;
  bool schedulable = false;
  int max_attempts = 100000;
  auto* gen_cmd = app.add_subcommand("gen", "Generate random tasksets");
  gen_cmd->add_option("--n", gen.n_tasks, "Tasks per set")->capture_default_str();
  gen_cmd->add_option("--util", gen.total_u_lo, "Total LO utilization")->capture_default_str();
  gen_cmd->add_option("--cf", gen.cf, "Criticality factor")->capture_default_str();
  gen_cmd->add_option("--count", count, "Number of tasksets")->capture_default_str();
  gen_cmd->add_option("--hc-fraction", gen.hc_fraction, "Share of HC tasks")->capture_default_str();
  gen_cmd->add_option("--period-min", gen.period_min, "Shortest period (units)")->capture_default_str();
  gen_cmd->add_option("--period-max", gen.period_max, "Longest period (units)")->capture_default_str();
  gen_cmd->add_option("--checkpoint-frac", gen.checkpoint_fraction, "Checkpoint position")->capture_default_str();
  gen_cmd->add_flag("--log-uniform", gen.log_uniform_periods, "Log-uniform periods");
  gen_cmd->add_flag("--schedulable", schedulable, "Keep only AMC-rtb schedulable sets");
  gen_cmd->add_option("--max-attempts", max_attempts, "Candidate cap for --schedulable")->capture_default_str();
  gen_cmd->callback([&] { run = [&] { return cmd_gen(g, gen, count, schedulable, max_attempts); }; });

  std::string annotated;
  auto* cp = app.add_subcommand("checkpoint", "Place checkpoints in a control-flow graph");
  cp->add_option("graph", input, "CFG as JSON or DOT")->required();
  cp->add_option("--annotated", annotated, "Write the annotated graph here");
  cp->callback([&] { run = [&] { return cmd_checkpoint(g, input, annotated); }; });

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate one taskset");
  sim_cmd->add_option("taskset", input, "Taskset JSON")->required();
  sim_cmd->add_option("--policy", sim.policy, "amc | pastime")->capture_default_str();
  sim_cmd->add_option("--model", sim.model, "linear[:K] | compensate | mem")->capture_default_str();
  sim_cmd->add_option("--horizon", sim.horizon, "Ticks to simulate (default 20 max periods)");
  sim_cmd->add_option("--overhead-us", sim.overhead, "Decision overhead in ticks")->capture_default_str();
  sim_cmd->add_option("--cap", sim.cap, "Online iteration cap")->capture_default_str();
  sim_cmd->add_option("--lc-hi-budget", sim.lc_hi_budget, "LC HI-mode budget as a fraction of C(LO)")
      ->capture_default_str();
  sim_cmd->add_option("--checkpoint-frac", sim.checkpoint_frac, "Override checkpoint position");
  sim_cmd->add_option("--slowdown-prob", sim.slowdown_prob, "Probability of a slowed job")->capture_default_str();
  sim_cmd->add_option("--correlation", sim.correlation, "Pre/post slowdown correlation")->capture_default_str();
  sim_cmd->add_option("--slowdown-cf", sim.cf, "Largest slowdown factor")->capture_default_str();
  sim_cmd->add_option("--switch-back", sim.switch_back, "no-overrun | idle")->capture_default_str();
  sim_cmd->add_option("--trace", sim.trace, "Write the event trace CSV here");
  sim_cmd->callback([&] { run = [&] { return cmd_simulate(g, input, sim); }; });

  mcs::SweepSpec sweep;
  std::string variable = "n_tasks", values, model = "linear", summary;
  auto* sw = app.add_subcommand("sweep", "Paired AMC / PASTime sweep");
  sw->add_option("--variable", variable, "n_tasks | total_u_lo | overestimate_pct | checkpoint_frac | model")
      ->capture_default_str();
  sw->add_option("--values", values, "Comma-separated values")->required();
  sw->add_option("--reps", sweep.repetitions, "Repetitions per value")->capture_default_str();
  sw->add_option("--n", sweep.gen.n_tasks, "Tasks per set")->capture_default_str();
  sw->add_option("--util", sweep.gen.total_u_lo, "Total LO utilization")->capture_default_str();
  sw->add_option("--cf", sweep.gen.cf, "Criticality factor")->capture_default_str();
  sw->add_option("--checkpoint-frac", sweep.gen.checkpoint_fraction, "Checkpoint position")->capture_default_str();
  sw->add_option("--slowdown-prob", sweep.workload.slowdown_prob, "Probability of a slowed job")
      ->capture_default_str();
  sw->add_option("--correlation", sweep.workload.correlation, "Pre/post slowdown correlation")->capture_default_str();
  sw->add_option("--model", model, "Prediction model")->capture_default_str();
  sw->add_option("--overhead-us", sweep.sim.decision_overhead, "Decision overhead in ticks")->capture_default_str();
  sw->add_option("--cap", sweep.sim.iteration_cap, "Online iteration cap")->capture_default_str();
  sw->add_option("--horizon-periods", sweep.horizon_periods, "Horizon in max periods")->capture_default_str();
  sw->add_option("--threads", sweep.threads, "Worker threads (0 = all cores)")->capture_default_str();
  sw->add_option("--summary", summary, "Also write the JSON summary here");
  sw->callback([&] { run = [&] { return cmd_sweep(g, sweep, variable, values, model, summary); }; });

  mcs::IterationStudySpec iters;
  std::string utils = "0.4,0.5,0.6,0.7,0.8,0.9", extras = "10,20,30,40,50,60,70,80";
  iters.gen.n_tasks = 20;
  auto* it = app.add_subcommand("iters", "Online-test iteration bound study");
  it->add_option("--tasksets", iters.n_tasksets, "Schedulable sets per utilization")->capture_default_str();
  it->add_option("--n", iters.gen.n_tasks, "Tasks per set")->capture_default_str();
  it->add_option("--cf", iters.gen.cf, "Criticality factor")->capture_default_str();
  it->add_option("--utils", utils, "Comma-separated utilizations")->capture_default_str();
  it->add_option("--extras", extras, "Comma-separated budget increases in percent")->capture_default_str();
  it->add_option("--threads", iters.threads, "Worker threads (0 = all cores)")->capture_default_str();
  it->callback([&] { run = [&] { return cmd_iters(g, iters, utils, extras); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }
  try {
    return run();
  } catch (const mcs::Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const mcs::ExhaustedRetries& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
