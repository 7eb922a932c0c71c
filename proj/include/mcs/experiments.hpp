#pragma once

// Paired policy sweeps and the online iteration-bound study.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcs/simulator.hpp"
#include "mcs/taskgen.hpp"
#include "mcs/workload.hpp"

namespace mcs {

enum class SweepVariable { NTasks, TotalULo, OverestimatePct, CheckpointFrac, Model };

const char* to_string(SweepVariable v);
SweepVariable parse_sweep_variable(std::string_view text);

struct SweepSpec {
  SweepVariable variable = SweepVariable::NTasks;
  // Textual values, interpreted according to the variable.
  std::vector<std::string> values;
  int repetitions = 10;
  std::uint64_t seed = 1;
  GenConfig gen;
  WorkloadConfig workload;
  // Policy and horizon are set per cell.
  SimOptions sim;
  // Horizon as a multiple of the largest period.
  int horizon_periods = 20;
  std::vector<Policy> policies{Policy::Amc, Policy::Pastime};
  int max_attempts = 100000;
  // 0 picks the hardware concurrency.
  int threads = 0;
};

// Throws ConfigError for an empty value list, bad values or reps < 1.
void check_sweep_spec(const SweepSpec& spec);

struct SweepRow {
  std::string value;
  int rep = 0;
  Policy policy = Policy::Amc;
  int n_tasks = 0;
  double u_lo = 0.0;
  SimMetrics metrics;
};

struct SweepResult {
  SweepSpec spec;
  // Ordered by value, repetition, policy.
  std::vector<SweepRow> rows;
};

// Every (value, rep) cell draws one schedulable taskset and one demand stream
// from seeds that depend only on (spec.seed, rep), then runs each policy on
// them. Cells run in parallel.
SweepResult run_sweep(const SweepSpec& spec);

void write_sweep_csv(const SweepResult& result, std::ostream& out);
// Mean, min and max of the main metrics per (value, policy).
nlohmann::json sweep_summary(const SweepResult& result);
nlohmann::json sweep_config_json(const SweepSpec& spec);

struct IterationStudySpec {
  int n_tasksets = 500;
  GenConfig gen;
  std::vector<double> utilizations{0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<int> extra_pcts{10, 20, 30, 40, 50, 60, 70, 80};
  std::uint64_t seed = 1;
  int max_attempts = 1000000;
  int threads = 0;
};

struct IterationCell {
  double utilization = 0.0;
  int extra_pct = 0;
  int tasksets = 0;
  int approved = 0;
  int max_iterations = 0;
};

struct IterationStudy {
  std::vector<IterationCell> cells;
  // Per utilization: accepted / generated candidates.
  std::vector<double> acceptance;
  int global_max = 0;
};

// For every utilization, draws n_tasksets schedulable sets, inflates the
// highest-priority HC task's LO budget by each percentage and records the
// online test's iteration count without a cap.
IterationStudy run_iteration_study(const IterationStudySpec& spec);

void write_iteration_csv(const IterationStudy& study, const IterationStudySpec& spec, std::ostream& out);

// Fixed-point formatting used by every CSV writer.
std::string format_double(double x);

}  // namespace mcs
