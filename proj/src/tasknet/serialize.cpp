#include <algorithm>

#include "ops/common/hash.hpp"
#include "ops/tasknet/tasknet.hpp"

namespace ops::tasknet {
namespace {

template <typename T>
T field(const Json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key)) {
    throw DocumentError(std::string(where) + ": missing field \"" + key + "\"");
  }
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw DocumentError(std::string(where) + "." + key + ": " + e.what());
  }
}

template <typename T>
T field_or(const Json& j, const char* key, T fallback, const char* where) {
  if (!j.contains(key)) return fallback;
  return field<T>(j, key, where);
}

}  // namespace

Json to_json(const Kpi& k) {
  Json points = Json::array();
  for (const auto& p : k.progress_points) points.push_back(Json::array({p.count, p.percent}));
  return Json{{"id", k.id},
              {"name", k.name},
              {"counter", {{"source", to_string(k.counter.source)}, {"key", k.counter.key}}},
              {"progress_points", points}};
}

Kpi kpi_from_json(const Json& j) {
  Kpi k;
  k.id = field<std::string>(j, "id", "kpi");
  k.name = field_or<std::string>(j, "name", "", "kpi");
  const Json& c = j.contains("counter") ? j["counter"] : Json::object();
  k.counter.source = parse_counter_source(field<std::string>(c, "source", "kpi.counter"));
  k.counter.key = field<std::string>(c, "key", "kpi.counter");
  for (const auto& p : field<Json>(j, "progress_points", "kpi")) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw DocumentError("kpi.progress_points: expected [count, percent] pairs");
    }
    k.progress_points.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return k;
}

Json to_json(const Campaign& c) {
  Json kpis = Json::array();
  for (const auto& k : c.kpis) kpis.push_back(to_json(k));
  return Json{{"id", c.id}, {"name", c.name}, {"goal_ids", c.goal_ids}, {"kpis", kpis}};
}

Campaign campaign_from_json(const Json& j) {
  Campaign c;
  c.id = field<std::string>(j, "id", "campaign");
  c.name = field_or<std::string>(j, "name", "", "campaign");
  c.goal_ids = field_or<std::vector<std::string>>(j, "goal_ids", {}, "campaign");
  if (j.contains("kpis"))
    for (const auto& k : j["kpis"]) c.kpis.push_back(kpi_from_json(k));
  return c;
}

Json to_json(const Goal& g) {
  Json j{{"id", g.id}, {"name", g.name}, {"priority", g.priority}, {"tasks", g.tasks}};
  if (g.condition) j["condition"] = {{"event", to_string(g.condition->event)}};
  if (g.time_window) j["time_window"] = Json::array({g.time_window->start, g.time_window->end});
  Json hist = Json::array();
  for (const auto& h : g.author_history)
    hist.push_back({{"author", h.author}, {"timestamp", h.timestamp}, {"note", h.note}});
  j["author_history"] = hist;
  return j;
}

Goal goal_from_json(const Json& j) {
  Goal g;
  g.id = field<std::string>(j, "id", "goal");
  g.name = field_or<std::string>(j, "name", "", "goal");
  g.priority = field<std::int64_t>(j, "priority", "goal");
  g.tasks = field_or<std::vector<std::string>>(j, "tasks", {}, "goal");
  if (j.contains("condition") && !j["condition"].is_null()) {
    g.condition = EventCondition{parse_event(field<std::string>(j["condition"], "event", "goal.condition"))};
  }
  if (j.contains("time_window") && !j["time_window"].is_null()) {
    const Json& w = j["time_window"];
    if (!w.is_array() || w.size() != 2) throw DocumentError("goal.time_window: expected [start, end]");
    g.time_window = TimeWindow{w[0].get<double>(), w[1].get<double>()};
  }
  if (j.contains("author_history")) {
    for (const auto& h : j["author_history"]) {
      g.author_history.push_back({field_or<std::string>(h, "author", "", "author_history"),
                                  field_or<std::string>(h, "timestamp", "", "author_history"),
                                  field_or<std::string>(h, "note", "", "author_history")});
    }
  }
  return g;
}

Json to_json(const Task& t) {
  Json j{{"id", t.id},
         {"goal_id", t.goal_id},
         {"activity", to_string(t.activity)},
         {"duration_s", t.duration_s},
         {"power_w", t.power_w},
         {"data_rate_mbit_s", t.data_rate_mbit_s},
         {"ordering_after", t.ordering_after},
         {"parameters", t.parameters}};
  if (t.instrument) j["instrument"] = to_string(*t.instrument);
  if (t.pointing_target) {
    j["pointing_target"] = {{"body", t.pointing_target->body},
                            {"lat_deg", t.pointing_target->lat_deg},
                            {"lon_deg", t.pointing_target->lon_deg}};
  }
  return j;
}

Task task_from_json(const Json& j) {
  Task t;
  t.id = field<std::string>(j, "id", "task");
  t.goal_id = field<std::string>(j, "goal_id", "task");
  t.activity = parse_activity(field<std::string>(j, "activity", "task"));
  t.duration_s = field<double>(j, "duration_s", "task");
  t.power_w = field_or<double>(j, "power_w", 0.0, "task");
  t.data_rate_mbit_s = field_or<double>(j, "data_rate_mbit_s", 0.0, "task");
  if (j.contains("instrument") && !j["instrument"].is_null()) {
    t.instrument = parse_instrument(field<std::string>(j, "instrument", "task"));
  }
  if (j.contains("pointing_target") && !j["pointing_target"].is_null()) {
    const Json& p = j["pointing_target"];
    t.pointing_target = TargetRef{field<std::string>(p, "body", "task.pointing_target"),
                                  field_or<double>(p, "lat_deg", 0.0, "task.pointing_target"),
                                  field_or<double>(p, "lon_deg", 0.0, "task.pointing_target")};
  }
  t.ordering_after = field_or<std::vector<std::string>>(j, "ordering_after", {}, "task");
  t.parameters = field_or<std::map<std::string, double>>(j, "parameters", {}, "task");
  return t;
}

Json to_json(const TaskNetwork& net) {
  Json goals = Json::object();
  for (const auto& [id, g] : net.goals) goals[id] = to_json(g);
  Json tasks = Json::object();
  for (const auto& [id, t] : net.tasks) tasks[id] = to_json(t);
  Json campaigns = Json::array();
  for (const auto& c : net.campaigns) campaigns.push_back(to_json(c));
  return Json{{"schema", kSchema},   {"id", net.id},     {"revision", net.revision},
              {"campaigns", campaigns}, {"goals", goals}, {"tasks", tasks}};
}

TaskNetwork network_from_json(const Json& j) {
  require_schema(j, kSchema);
  TaskNetwork net;
  net.id = field<std::string>(j, "id", "tasknet");
  net.revision = field<std::int64_t>(j, "revision", "tasknet");
  if (j.contains("campaigns"))
    for (const auto& c : j["campaigns"]) net.campaigns.push_back(campaign_from_json(c));
  if (j.contains("goals")) {
    if (!j["goals"].is_object()) throw DocumentError("tasknet.goals must be an object keyed by id");
    for (const auto& [key, g] : j["goals"].items()) net.goals.emplace(key, goal_from_json(g));
  }
  if (j.contains("tasks")) {
    if (!j["tasks"].is_object()) throw DocumentError("tasknet.tasks must be an object keyed by id");
    for (const auto& [key, t] : j["tasks"].items()) net.tasks.emplace(key, task_from_json(t));
  }
  return net;
}

std::string serialize(const TaskNetwork& net) { return canonical(to_json(net)); }

TaskNetwork deserialize(const std::string& text) { return network_from_json(parse_json(text, "tasknet")); }

std::string content_hash(const TaskNetwork& net) { return sha256_hex(serialize(net)); }

Json to_json(const Violation& v) {
  return Json{{"kind", to_string(v.kind)}, {"subjects", v.subjects}, {"message", v.message}};
}

Json to_json(const Conflict& c) {
  return Json{{"entity", c.entity}, {"id", c.id}, {"field", c.field}, {"reason", c.reason}};
}

Json to_json(const ChangeSet& c) {
  Json added = Json::array(), removed = Json::array(), modified = Json::array();
  for (const auto& a : c.added) added.push_back({{"entity", a.entity}, {"id", a.id}});
  for (const auto& r : c.removed) removed.push_back({{"entity", r.entity}, {"id", r.id}});
  for (const auto& m : c.modified) {
    modified.push_back(
        {{"entity", m.entity}, {"id", m.id}, {"field", m.field}, {"before", m.before}, {"after", m.after}});
  }
  return Json{{"added", added}, {"removed", removed}, {"modified", modified}};
}

}  // namespace ops::tasknet
