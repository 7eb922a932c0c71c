#include <gtest/gtest.h>

#include <numeric>

#include "mcs/rta.hpp"
#include "mcs/taskgen.hpp"

using namespace mcs;

TEST(Uunifast, SingleTaskGetsEverything) {
  const auto u = uunifast(1, 0.7, 3);
  ASSERT_EQ(u.size(), 1u);
  EXPECT_DOUBLE_EQ(u[0], 0.7);
}

TEST(Uunifast, SumsToTotal) {
  Rng rng(11);
  for (int n = 2; n <= 30; n += 7) {
    const auto u = uunifast(n, 0.85, rng);
    ASSERT_EQ(static_cast<int>(u.size()), n);
    EXPECT_NEAR(std::accumulate(u.begin(), u.end(), 0.0), 0.85, 1e-9);
    for (double x : u) EXPECT_GE(x, 0.0);
  }
}

TEST(Uunifast, MarginalMeansAreUniform) {
  // Every coordinate of a uniform point on the simplex has mean total/n.
  const int n = 5, draws = 10000;
  Rng rng(2024);
  std::vector<double> mean(n, 0.0);
  for (int k = 0; k < draws; ++k) {
    const auto u = uunifast(n, 0.6, rng);
    for (int i = 0; i < n; ++i) mean[i] += u[i] / draws;
  }
  for (double m : mean) EXPECT_NEAR(m, 0.12, 0.12 * 0.05);
}

TEST(Generate, HcFractionAndBudgets) {
  GenConfig g;
  g.n_tasks = 8;
  g.seed = 4;
  const Taskset ts = generate_taskset(g);
  ASSERT_EQ(ts.tasks.size(), 8u);
  int hc = 0;
  for (const Task& t : ts.tasks) {
    EXPECT_FALSE(t.priority);
    EXPECT_GE(t.period, 10000);
    EXPECT_LE(t.period, 1000000);
    EXPECT_EQ(t.deadline, t.period);
    if (!t.is_hc()) {
      EXPECT_EQ(t.c_hi, 0);
      continue;
    }
    ++hc;
    EXPECT_NEAR(static_cast<double>(t.c_hi) / static_cast<double>(t.c_lo), 1.8, 0.01);
    ASSERT_TRUE(t.checkpoint);
    EXPECT_GT(t.checkpoint->c_cp_lo, 0);
    EXPECT_LT(t.checkpoint->c_cp_lo, t.c_lo);
    ASSERT_TRUE(t.checkpoint->mem);
    EXPECT_EQ(t.checkpoint->mem->m_lo, t.checkpoint->mem->m_pre_cp_lo + t.checkpoint->mem->m_post_cp_lo);
  }
  EXPECT_EQ(hc, 4);
  EXPECT_TRUE(validate_taskset(ts).empty());
  EXPECT_NEAR(ts.lo_utilization(), 0.6, 0.01);
}

TEST(Generate, Deterministic) {
  GenConfig g;
  g.seed = 99;
  const Taskset a = generate_taskset(g), b = generate_taskset(g);
  ASSERT_EQ(a.tasks.size(), b.tasks.size());
  for (std::size_t i = 0; i < a.tasks.size(); ++i) {
    EXPECT_EQ(a.tasks[i].c_lo, b.tasks[i].c_lo);
    EXPECT_EQ(a.tasks[i].period, b.tasks[i].period);
  }
  g.seed = 100;
  EXPECT_NE(generate_taskset(g).tasks[0].period, a.tasks[0].period);
}

TEST(Generate, LogUniformPeriodsInRange) {
  GenConfig g;
  g.log_uniform_periods = true;
  g.n_tasks = 40;
  g.total_u_lo = 0.5;
  g.hc_fraction = 0.0;
  const Taskset ts = generate_taskset(g);
  for (const Task& t : ts.tasks) {
    EXPECT_GE(t.period, 10000);
    EXPECT_LE(t.period, 1000000);
    EXPECT_FALSE(t.is_hc());
  }
}

TEST(Generate, ConfigErrors) {
  GenConfig g;
  g.n_tasks = 0;
  EXPECT_THROW(check_gen_config(g), ConfigError);
  g = {};
  g.cf = 1.0;
  EXPECT_THROW(generate_taskset(g), ConfigError);
  g = {};
  g.checkpoint_fraction = 1.0;
  EXPECT_THROW(check_gen_config(g), ConfigError);
  g = {};
  g.period_max = 5;
  EXPECT_THROW(check_gen_config(g), ConfigError);
}

TEST(Batch, EverySetPassesTheOfflineTest) {
  GenConfig g;
  g.n_tasks = 6;
  g.total_u_lo = 0.7;
  g.seed = 8;
  const Batch b = generate_schedulable_batch(g, 20);
  ASSERT_EQ(b.tasksets.size(), 20u);
  EXPECT_GE(b.attempts, 20);
  EXPECT_GT(b.acceptance_ratio, 0.0);
  EXPECT_LE(b.acceptance_ratio, 1.0);
  for (const Taskset& ts : b.tasksets) {
    EXPECT_TRUE(ts.fully_prioritized());
    EXPECT_TRUE(amc_rtb_schedulable(ts).schedulable);
  }
  const Batch again = generate_schedulable_batch(g, 20);
  EXPECT_EQ(again.attempts, b.attempts);
  EXPECT_EQ(again.tasksets.back().tasks.front().c_lo, b.tasksets.back().tasks.front().c_lo);
}

TEST(Batch, ImpossibleUtilizationExhausts) {
  GenConfig g;
  g.n_tasks = 2;
  g.total_u_lo = 1.9;
  EXPECT_THROW(generate_schedulable_batch(g, 1, 50), ExhaustedRetries);
}

TEST(Batch, TransformAppliedBeforeTest) {
  GenConfig g;
  g.n_tasks = 4;
  g.seed = 5;
  const Batch b = generate_schedulable_batch(g, 3, 1000, [](Taskset& ts) { ts.name = "marked"; });
  for (const Taskset& ts : b.tasksets) EXPECT_EQ(ts.name, "marked");
}

TEST(Budgets, CheckpointFraction) {
  Task t = Task::hc(1, 1000, 1800, 10000);
  t.checkpoint = CheckpointProfile{500, 1000, std::nullopt};
  set_checkpoint_fraction(t, 0.25);
  EXPECT_EQ(t.checkpoint->c_cp_lo, 250);
  EXPECT_EQ(t.checkpoint->mem->m_pre_cp_lo, 1000);
  set_checkpoint_fraction(t, 0.9999);
  EXPECT_EQ(t.checkpoint->c_cp_lo, 999);
  set_checkpoint_fraction(t, 0.0001);
  EXPECT_EQ(t.checkpoint->c_cp_lo, 1);
}

TEST(Budgets, Overestimate) {
  Taskset ts;
  Task a = Task::hc(1, 1000, 1800, 10000, 1);
  a.checkpoint = CheckpointProfile{500, 1000, std::nullopt};
  Task b = Task::hc(2, 1000, 1100, 10000, 2);
  b.checkpoint = CheckpointProfile{500, 1000, std::nullopt};
  ts.tasks = {a, b, Task::lc(3, 100, 1000, 3)};
  overestimate_budgets(ts, 20);
  EXPECT_EQ(ts.at(1).c_lo, 1200);
  EXPECT_EQ(ts.at(1).checkpoint->reference_c_lo, 1000);
  EXPECT_EQ(ts.at(2).c_lo, 1099);
  EXPECT_EQ(ts.at(3).c_lo, 100);
}
