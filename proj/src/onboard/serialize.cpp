#include "ops/common/error.hpp"
#include "ops/onboard/timeline.hpp"

namespace ops::onboard {
namespace {

EntryStatus parse_status(const std::string& s) {
  if (s == "Planned") return EntryStatus::Planned;
  if (s == "Interrupted") return EntryStatus::Interrupted;
  throw DocumentError("unknown entry status \"" + s + "\"");
}

TriggerKind parse_trigger_kind(const std::string& s) {
  for (auto k : {TriggerKind::Initial, TriggerKind::EventDetected, TriggerKind::FaultDetected, TriggerKind::TaskOverrun})
    if (to_string(k) == s) return k;
  throw DocumentError("unknown trigger \"" + s + "\"");
}

FaultKind parse_fault_kind(const std::string& s) {
  if (s == "CameraReset") return FaultKind::CameraReset;
  if (s == "PowerOverdraw") return FaultKind::PowerOverdraw;
  throw DocumentError("unknown fault \"" + s + "\"");
}

Json entries_json(const std::vector<TimelineEntry>& v) {
  Json a = Json::array();
  for (const auto& e : v) a.push_back(to_json(e));
  return a;
}

std::vector<TimelineEntry> entries_from(const Json& j) {
  std::vector<TimelineEntry> v;
  for (const auto& e : j) v.push_back(entry_from_json(e));
  return v;
}

}  // namespace

Json to_json(const TimelineEntry& e) {
  Json j{{"task_id", e.task_id},   {"goal_id", e.goal_id}, {"t_start", e.t_start},
         {"t_end", e.t_end},       {"power_w", e.power_w}, {"data_mbit", e.data_mbit},
         {"downlink", e.downlink}, {"status", to_string(e.status)}};
  if (e.resource) j["resource"] = *e.resource;
  return j;
}

TimelineEntry entry_from_json(const Json& j) {
  TimelineEntry e;
  e.task_id = j.at("task_id").get<std::string>();
  e.goal_id = j.value("goal_id", "");
  e.t_start = j.at("t_start").get<double>();
  e.t_end = j.at("t_end").get<double>();
  if (j.contains("resource")) e.resource = j["resource"].get<std::string>();
  e.power_w = j.value("power_w", 0.0);
  e.data_mbit = j.value("data_mbit", 0.0);
  e.downlink = j.value("downlink", false);
  e.status = parse_status(j.value("status", "Planned"));
  return e;
}

Json to_json(const Timeline& t) {
  Json profile = Json::array();
  for (const auto& p : t.profile) profile.push_back({p.t, p.battery_wh, p.storage_mbit});
  return Json{{"entries", entries_json(t.entries)}, {"profile", profile}};
}

Timeline timeline_from_json(const Json& j) {
  Timeline t;
  t.entries = entries_from(j.at("entries"));
  if (j.contains("profile"))
    for (const auto& p : j["profile"]) t.profile.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
  return t;
}

Json to_json(const Trigger& t) {
  Json j{{"kind", to_string(t.kind)}};
  if (t.event) j["event"] = tasknet::to_string(*t.event);
  if (t.fault) j["fault"] = to_string(*t.fault);
  if (t.instrument) j["instrument"] = tasknet::to_string(*t.instrument);
  if (t.task_id) j["task_id"] = *t.task_id;
  if (t.extend_to) j["extend_to"] = *t.extend_to;
  return j;
}

Trigger trigger_from_json(const Json& j) {
  Trigger t;
  t.kind = parse_trigger_kind(j.at("kind").get<std::string>());
  if (j.contains("event")) t.event = tasknet::parse_event(j["event"].get<std::string>());
  if (j.contains("fault")) t.fault = parse_fault_kind(j["fault"].get<std::string>());
  if (j.contains("instrument")) t.instrument = tasknet::parse_instrument(j["instrument"].get<std::string>());
  if (j.contains("task_id")) t.task_id = j["task_id"].get<std::string>();
  if (j.contains("extend_to")) t.extend_to = j["extend_to"].get<double>();
  return t;
}

Json to_json(const DecisionRecord& r) {
  Json goals = Json::array();
  for (const auto& c : r.considered_goals)
    goals.push_back({{"goal_id", c.goal_id}, {"priority", c.priority}, {"verdict", to_string(c.verdict)}});
  return Json{{"t", r.t},
              {"cycle", r.cycle},
              {"trigger", to_json(r.trigger)},
              {"considered_goals", goals},
              {"plan_diff", {{"added", entries_json(r.plan_diff.added)}, {"removed", entries_json(r.plan_diff.removed)}}}};
}

DecisionRecord decision_from_json(const Json& j) {
  DecisionRecord r;
  r.t = j.at("t").get<double>();
  r.cycle = j.at("cycle").get<int>();
  r.trigger = trigger_from_json(j.at("trigger"));
  for (const auto& c : j.at("considered_goals"))
    r.considered_goals.push_back({c.at("goal_id").get<std::string>(), c.at("priority").get<std::int64_t>(),
                                  parse_verdict(c.at("verdict").get<std::string>())});
  const Json& d = j.at("plan_diff");
  r.plan_diff.added = entries_from(d.at("added"));
  r.plan_diff.removed = entries_from(d.at("removed"));
  return r;
}

Json to_json(const PlannerModel& m) {
  Json inst = Json::array();
  for (const auto& [id, i] : m.instruments) inst.push_back(simcore::to_json(i));
  return Json{{"battery_capacity_wh", m.battery_capacity_wh},
              {"battery_floor_wh", m.battery_floor_wh},
              {"storage_capacity_mbit", m.storage_capacity_mbit},
              {"supply_w", m.supply_w},
              {"bus_load_w", m.bus_load_w},
              {"instruments", inst},
              {"search_step_s", m.search_step_s}};
}

PlannerModel planner_model_from_json(const Json& j) {
  PlannerModel m;
  m.battery_capacity_wh = j.value("battery_capacity_wh", m.battery_capacity_wh);
  m.battery_floor_wh = j.value("battery_floor_wh", m.battery_floor_wh);
  m.storage_capacity_mbit = j.value("storage_capacity_mbit", m.storage_capacity_mbit);
  m.supply_w = j.value("supply_w", m.supply_w);
  m.bus_load_w = j.value("bus_load_w", m.bus_load_w);
  m.search_step_s = j.value("search_step_s", m.search_step_s);
  if (j.contains("instruments"))
    for (const auto& i : j["instruments"]) {
      auto inst = simcore::instrument_from_json(i);
      m.instruments[inst.id] = inst;
    }
  return m;
}

}  // namespace ops::onboard
