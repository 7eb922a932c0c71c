#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mcs/model.hpp"

namespace mcs {

// Taskset JSON document:
//   {"name": ..., "tasks": [{"id", "level": "HC"|"LC", "c_lo", "c_hi", "period",
//     "priority"?, "deadline"?, "checkpoint"?: {"c_cp_lo", "reference_c_lo"?,
//     "mem"?: {"m_lo", "m_pre_cp_lo", "m_post_cp_lo"}}}]}
// All times are integer microseconds. Tasks come back sorted by priority.
Taskset taskset_from_json(const nlohmann::json& doc);
nlohmann::json taskset_to_json(const Taskset& ts);

Taskset load_taskset(const std::filesystem::path& path);
void save_taskset(const Taskset& ts, const std::filesystem::path& path);

}  // namespace mcs
