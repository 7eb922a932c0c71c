#include "mcs/taskset_io.hpp"

#include <fstream>

namespace mcs {

using nlohmann::json;

namespace {

Time require_time(const json& obj, const char* key) {
  if (!obj.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ParseError(std::string("field '") + key + "' must be an integer");
  Time t = v.get<Time>();
  if (t < 0) throw ParseError(std::string("field '") + key + "' must be non-negative");
  return t;
}

}  // namespace

Taskset taskset_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("tasks") || !doc.at("tasks").is_array()) {
    throw ParseError("taskset document needs a 'tasks' array");
  }
  Taskset ts;
  ts.name = doc.value("name", std::string{});
  for (const json& jt : doc.at("tasks")) {
    if (!jt.is_object()) throw ParseError("task entries must be objects");
    Task t;
    if (!jt.contains("id") || !jt.at("id").is_number_integer()) throw ParseError("task id must be an integer");
    t.id = jt.at("id").get<TaskId>();
    std::string level = jt.value("level", std::string{});
    if (level == "HC") {
      t.level = Criticality::HC;
    } else if (level == "LC") {
      t.level = Criticality::LC;
    } else {
      throw ParseError("task " + std::to_string(t.id) + ": level must be \"HC\" or \"LC\"");
    }
    t.c_lo = require_time(jt, "c_lo");
    t.c_hi = (jt.contains("c_hi") && !jt.at("c_hi").is_null()) ? require_time(jt, "c_hi") : 0;
    t.period = require_time(jt, "period");
    t.deadline = jt.contains("deadline") ? require_time(jt, "deadline") : t.period;
    if (jt.contains("priority") && !jt.at("priority").is_null()) {
      if (!jt.at("priority").is_number_integer()) throw ParseError("priority must be an integer");
      t.priority = jt.at("priority").get<int>();
    }
    if (jt.contains("checkpoint") && !jt.at("checkpoint").is_null()) {
      const json& jc = jt.at("checkpoint");
      CheckpointProfile cp;
      cp.c_cp_lo = require_time(jc, "c_cp_lo");
      cp.reference_c_lo = jc.contains("reference_c_lo") ? require_time(jc, "reference_c_lo") : t.c_lo;
      if (jc.contains("mem") && !jc.at("mem").is_null()) {
        const json& jm = jc.at("mem");
        cp.mem = MemoryProfile{require_time(jm, "m_lo"), require_time(jm, "m_pre_cp_lo"),
                               require_time(jm, "m_post_cp_lo")};
      }
      t.checkpoint = cp;
    }
    ts.tasks.push_back(std::move(t));
  }
  sort_by_priority(ts);
  return ts;
}

json taskset_to_json(const Taskset& ts) {
  json tasks = json::array();
  for (const Task& t : ts.tasks) {
    json jt = {{"id", t.id}, {"level", to_string(t.level)}, {"c_lo", t.c_lo},
               {"c_hi", t.c_hi}, {"period", t.period}};
    if (t.deadline != t.period) jt["deadline"] = t.deadline;
    if (t.priority) jt["priority"] = *t.priority;
    if (t.checkpoint) {
      json jc = {{"c_cp_lo", t.checkpoint->c_cp_lo}};
      if (t.checkpoint->reference_c_lo != t.c_lo) jc["reference_c_lo"] = t.checkpoint->reference_c_lo;
      if (t.checkpoint->mem) {
        const MemoryProfile& m = *t.checkpoint->mem;
        jc["mem"] = {{"m_lo", m.m_lo}, {"m_pre_cp_lo", m.m_pre_cp_lo}, {"m_post_cp_lo", m.m_post_cp_lo}};
      }
      jt["checkpoint"] = jc;
    }
    tasks.push_back(std::move(jt));
  }
  return json{{"name", ts.name}, {"tasks", tasks}};
}

Taskset load_taskset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return taskset_from_json(doc);
}

void save_taskset(const Taskset& ts, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << taskset_to_json(ts).dump(2) << '\n';
}

}  // namespace mcs
