#include <gtest/gtest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "mcs/model.hpp"
#include "mcs/ratio.hpp"
#include "mcs/taskset_io.hpp"

using namespace mcs;

namespace {

bool has_violation(const Taskset& ts, const std::string& text) {
  for (const Violation& v : validate_taskset(ts)) {
    if (v.message.find(text) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST(Ratio, ParsesIntegersDecimalsAndFractions) {
  EXPECT_EQ(Ratio::parse("1"), (Ratio{1, 1}));
  EXPECT_EQ(Ratio::parse("0.25"), (Ratio{1, 4}));
  EXPECT_EQ(Ratio::parse("3/4"), (Ratio{6, 8}));
  EXPECT_EQ(Ratio::parse("1.5").to_string(), "3/2");
  EXPECT_THROW(Ratio::parse("x"), ParseError);
  EXPECT_THROW(Ratio::parse("1/0"), ParseError);
  EXPECT_THROW(Ratio::parse("-1"), ParseError);
}

TEST(Ratio, RoundsHalfUp) {
  EXPECT_EQ(round_half_up_div(5, 2), 3);
  EXPECT_EQ(round_half_up_div(198, 100), 2);
  EXPECT_EQ(round_half_up_div(149, 100), 1);
  EXPECT_EQ(round_half_up_div(0, 7), 0);
}

TEST(Validate, ThreeTaskIsValid) { EXPECT_TRUE(validate_taskset(fixtures::three_task()).empty()); }

TEST(Validate, RejectsHcWithoutHigherBudget) {
  Taskset ts = fixtures::three_task();
  ts.at(1).c_hi = 3;
  EXPECT_TRUE(has_violation(ts, "c_hi must exceed c_lo"));
}

TEST(Validate, RejectsDuplicatesAndBadPeriods) {
  Taskset ts = fixtures::three_task();
  ts.tasks[1].id = 1;
  ts.tasks[2].priority = 1;
  ts.tasks[2].period = 0;
  EXPECT_TRUE(has_violation(ts, "duplicate id"));
  EXPECT_TRUE(has_violation(ts, "duplicate priority"));
  EXPECT_TRUE(has_violation(ts, "period must be positive"));
}

TEST(Validate, ChecksCheckpointRange) {
  Taskset ts = fixtures::three_task();
  ts.at(1).checkpoint = CheckpointProfile{3, 3, std::nullopt};
  EXPECT_TRUE(has_violation(ts, "strictly between"));
  ts.at(2).checkpoint = CheckpointProfile{1, 2, std::nullopt};
  EXPECT_TRUE(has_violation(ts, "only valid for HC"));
}

TEST(Validate, LcImpreciseBudgetBounds) {
  Taskset ts = fixtures::three_task();
  ts.at(2).c_hi = 1;
  EXPECT_TRUE(validate_taskset(ts).empty());
  ts.at(2).c_hi = 3;
  EXPECT_TRUE(has_violation(ts, "LC c_hi"));
}

TEST(PriorityBands, SplitsByLevel) {
  const Taskset ts = fixtures::three_task();
  const PriorityBands b = priority_bands(ts, 3);
  EXPECT_EQ(b.hp, (std::vector<TaskId>{1, 2}));
  EXPECT_EQ(b.hp_hc, (std::vector<TaskId>{1}));
  EXPECT_EQ(b.hp_lc, (std::vector<TaskId>{2}));
  EXPECT_TRUE(priority_bands(ts, 1).hp.empty());
  EXPECT_THROW(priority_bands(ts, 9), UnknownTask);
}

TEST(TasksetIo, RoundTrips) {
  Taskset ts = fixtures::three_task_with_checkpoints(10);
  ts.at(1).checkpoint->mem = MemoryProfile{400, 100, 300};
  const Taskset back = taskset_from_json(taskset_to_json(ts));
  ASSERT_EQ(back.tasks.size(), 3u);
  EXPECT_EQ(back.at(1).checkpoint->c_cp_lo, 15);
  EXPECT_EQ(back.at(1).checkpoint->mem->m_post_cp_lo, 300);
  EXPECT_EQ(back.at(3).c_hi, 100);
  EXPECT_EQ(taskset_to_json(back), taskset_to_json(ts));
}

TEST(TasksetIo, RejectsMalformedDocuments) {
  EXPECT_THROW(taskset_from_json(nlohmann::json::parse(R"({"tasks": 3})")), ParseError);
  EXPECT_THROW(taskset_from_json(nlohmann::json::parse(R"({"tasks": [{"id": 1, "level": "MID", "c_lo": 1, "period": 2}]})")),
               ParseError);
  EXPECT_THROW(taskset_from_json(nlohmann::json::parse(R"({"tasks": [{"id": 1, "level": "LC", "period": 2}]})")),
               ParseError);
}
