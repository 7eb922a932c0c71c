#include "mcs/prediction.hpp"

#include <cstdio>
#include <stdexcept>

namespace mcs {

PredictionModel parse_model(std::string_view text) {
  if (text == "compensate") return CompensatoryModel{};
  if (text == "mem") return MemoryModel{};
  if (text == "linear") return LinearModel{};
  if (text.starts_with("linear:")) {
    Ratio k = Ratio::parse(text.substr(7));
    if (k.num <= 0) throw ParseError("linear model needs K > 0");
    return LinearModel{k};
  }
  throw ParseError("unknown prediction model '" + std::string(text) + "'");
}

std::string to_string(const PredictionModel& model) {
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    Ratio k = lin->k.reduced();
    if (k.num == 1 && k.den == 1) return "linear";
    char buf[32];
    std::snprintf(buf, sizeof buf, "linear:%g", k.to_double());
    return buf;
  }
  if (std::holds_alternative<CompensatoryModel>(model)) return "compensate";
  return "mem";
}

DelayMetric observe_delay(const CheckpointObservation& obs) {
  if (obs.t_ref <= 0) throw std::invalid_argument("checkpoint reference time must be positive");
  DelayMetric m;
  if (obs.t_spent > obs.t_ref) {
    m.y_abs = obs.t_spent - obs.t_ref;
    m.x_percent = Ratio{100 * m.y_abs, obs.t_ref}.reduced();
  }
  return m;
}

Time predict_memory(const MemoryProfile& profile, Time c_lo, const CheckpointObservation& obs) {
  if (!obs.m_cp || *obs.m_cp <= 0) throw MissingMemoryData("memory model needs a positive m_cp");
  if (profile.m_lo <= 0 || profile.m_pre_cp_lo <= 0) throw MissingMemoryData("memory profile is empty");
  const Wide m_cp = *obs.m_cp;
  // Pr_CP - Pr_LO = (C_used * M(LO) - C(LO) * M_CP) / (M_CP * M(LO))
  const Wide gap = static_cast<Wide>(obs.t_spent) * profile.m_lo - static_cast<Wide>(c_lo) * m_cp;
  if (gap <= 0) return c_lo;
  // M_expected_post = M_CP * M_post(LO) / M_pre(LO); the M_CP factors cancel.
  const Wide num = gap * profile.m_post_cp_lo;
  const Wide den = static_cast<Wide>(profile.m_pre_cp_lo) * profile.m_lo;
  return c_lo + round_half_up_div(num, den);
}

Time predict_total(const PredictionModel& model, Time c_lo, const DelayMetric& metric,
                   const CheckpointObservation& obs, const std::optional<MemoryProfile>& mem) {
  if (c_lo <= 0) throw std::invalid_argument("c_lo must be positive");
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    const Wide num = static_cast<Wide>(lin->k.num) * c_lo * metric.x_percent.num;
    const Wide den = static_cast<Wide>(lin->k.den) * metric.x_percent.den * 100;
    return c_lo + round_half_up_div(num, den);
  }
  if (std::holds_alternative<CompensatoryModel>(model)) return c_lo + metric.y_abs;
  if (!mem) throw MissingMemoryData("memory model needs a memory profile");
  return predict_memory(*mem, c_lo, obs);
}

}  // namespace mcs
