#pragma once

// Execution-time prediction at a checkpoint.

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "mcs/model.hpp"

namespace mcs {

struct CheckpointObservation {
  // Budget consumed when the checkpoint was reached.
  Time t_spent = 0;
  // Profiled LO-mode time to reach the checkpoint.
  Time t_ref = 0;
  // Memory accesses up to the checkpoint, when counted.
  std::optional<std::int64_t> m_cp;
};

struct DelayMetric {
  // 100 * y_abs / t_ref, or 0 when the checkpoint was reached on time or early.
  Ratio x_percent;
  Time y_abs = 0;
};

// C' = C(LO) + K * C(LO) * X / 100
struct LinearModel {
  Ratio k{1, 1};
};
// C' = C(LO) + Y
struct CompensatoryModel {};
// Memory-access progress metric; needs a MemoryProfile and m_cp.
struct MemoryModel {};

using PredictionModel = std::variant<LinearModel, CompensatoryModel, MemoryModel>;

// "linear", "linear:0.5", "compensate", "mem". Throws ParseError.
PredictionModel parse_model(std::string_view text);
std::string to_string(const PredictionModel& model);

// Requires t_ref > 0 (std::invalid_argument otherwise).
DelayMetric observe_delay(const CheckpointObservation& obs);

// Predicted total execution time, rounded half-up to ticks, never below c_lo.
// Throws MissingMemoryData for MemoryModel without a profile or m_cp.
Time predict_total(const PredictionModel& model, Time c_lo, const DelayMetric& metric,
                   const CheckpointObservation& obs, const std::optional<MemoryProfile>& mem = std::nullopt);

Time predict_memory(const MemoryProfile& profile, Time c_lo, const CheckpointObservation& obs);

// Extra LO budget to request on top of the configured budget. With a budget
// configured at C(LO) + o this yields the overestimate-adjusted e - o.
inline Time effective_extra(Time c_prime, Time current_budget) {
  return c_prime > current_budget ? c_prime - current_budget : 0;
}

}  // namespace mcs
