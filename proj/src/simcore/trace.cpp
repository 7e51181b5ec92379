#include "ops/simcore/trace.hpp"

#include <sstream>

#include "ops/common/error.hpp"
#include "ops/common/hash.hpp"

namespace ops::simcore {

std::string_view to_string(TaskOutcome o) {
  switch (o) {
    case TaskOutcome::Scheduled: return "Scheduled";
    case TaskOutcome::Executed: return "Executed";
    case TaskOutcome::Skipped: return "Skipped";
    case TaskOutcome::Interrupted: return "Interrupted";
  }
  return "?";
}

std::string_view to_string(GoalOutcome o) {
  switch (o) {
    case GoalOutcome::Executed: return "Executed";
    case GoalOutcome::Skipped: return "Skipped";
    case GoalOutcome::Interrupted: return "Interrupted";
    case GoalOutcome::Inactive: return "Inactive";
  }
  return "?";
}

TaskOutcome parse_task_outcome(std::string_view s) {
  for (auto o : {TaskOutcome::Scheduled, TaskOutcome::Executed, TaskOutcome::Skipped, TaskOutcome::Interrupted})
    if (to_string(o) == s) return o;
  throw DocumentError("unknown task outcome \"" + std::string(s) + "\"");
}

GoalOutcome parse_goal_outcome(std::string_view s) {
  for (auto o : {GoalOutcome::Executed, GoalOutcome::Skipped, GoalOutcome::Interrupted, GoalOutcome::Inactive})
    if (to_string(o) == s) return o;
  throw DocumentError("unknown goal outcome \"" + std::string(s) + "\"");
}

Json manifest_json(const SimTrace& t) {
  Json evrs = Json::array(), products = Json::array(), decisions = Json::array();
  for (const auto& e : t.evrs) evrs.push_back(to_json(e));
  for (const auto& p : t.products) products.push_back(to_json(p));
  for (const auto& d : t.decisions) decisions.push_back(onboard::to_json(d));
  Json tasks = Json::object(), goals = Json::object(), channels = Json::array();
  for (const auto& [id, o] : t.task_outcomes) tasks[id] = to_string(o);
  for (const auto& [id, o] : t.goal_outcomes) goals[id] = to_string(o);
  for (const auto& [name, c] : t.channels) channels.push_back(name);
  Json j{{"schema", kTraceSchema},
         {"net_id", t.net_id},
         {"net_revision", t.net_revision},
         {"seed", t.seed},
         {"horizon_s", t.horizon_s},
         {"channels", channels},
         {"evrs", evrs},
         {"products", products},
         {"decisions", decisions},
         {"task_outcomes", tasks},
         {"goal_outcomes", goals}};
  if (!t.trace_hash.empty()) j["trace_hash"] = t.trace_hash;
  return j;
}

std::string channel_jsonl(const Channel& c) {
  std::string out;
  out.reserve(c.size() * 24);
  for (const auto& s : c) {
    out += "{\"t\":";
    out += Json(s.t).dump();
    out += ",\"v\":";
    out += Json(s.v).dump();
    out += "}\n";
  }
  return out;
}

Channel parse_channel_jsonl(const std::string& text) {
  Channel c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = parse_json(line, "channel sample");
    c.push_back({j.at("t").get<double>(), j.at("v").get<double>()});
  }
  return c;
}

std::string compute_trace_hash(const SimTrace& t) {
  Json m = manifest_json(t);
  m.erase("trace_hash");
  std::string bytes = canonical(m);
  for (const auto& [name, c] : t.channels) {
    bytes += "\n" + name + "\n";
    bytes += channel_jsonl(c);
  }
  return sha256_hex(bytes);
}

namespace {

SimTrace from_manifest(const Json& j) {
  require_schema(j, std::string(kTraceSchema));
  SimTrace t;
  t.net_id = j.at("net_id").get<std::string>();
  t.net_revision = j.at("net_revision").get<std::int64_t>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.horizon_s = j.at("horizon_s").get<double>();
  for (const auto& e : j.at("evrs")) t.evrs.push_back(evr_from_json(e));
  for (const auto& p : j.at("products")) t.products.push_back(product_from_json(p));
  for (const auto& d : j.at("decisions")) t.decisions.push_back(onboard::decision_from_json(d));
  for (const auto& [id, o] : j.at("task_outcomes").items()) t.task_outcomes[id] = parse_task_outcome(o.get<std::string>());
  for (const auto& [id, o] : j.at("goal_outcomes").items()) t.goal_outcomes[id] = parse_goal_outcome(o.get<std::string>());
  t.trace_hash = j.value("trace_hash", "");
  return t;
}

}  // namespace

void write_trace(const SimTrace& t, const std::filesystem::path& dir) {
  for (const auto& [name, c] : t.channels) write_file_atomic(dir / (name + ".jsonl"), channel_jsonl(c));
  write_json_file(dir / "trace.json", manifest_json(t));
}

SimTrace read_trace_manifest(const std::filesystem::path& dir) { return from_manifest(read_json_file(dir / "trace.json")); }

SimTrace read_trace(const std::filesystem::path& dir) {
  const Json m = read_json_file(dir / "trace.json");
  SimTrace t = from_manifest(m);
  for (const auto& name : m.at("channels"))
    t.channels[name.get<std::string>()] = parse_channel_jsonl(read_text_file(dir / (name.get<std::string>() + ".jsonl")));
  return t;
}

Json to_json(const SimTrace& t) {
  Json j = manifest_json(t);
  Json ch = Json::object();
  for (const auto& [name, c] : t.channels) {
    Json arr = Json::array();
    for (const auto& s : c) arr.push_back({s.t, s.v});
    ch[name] = arr;
  }
  j["channel_data"] = ch;
  return j;
}

SimTrace trace_from_json(const Json& j) {
  SimTrace t = from_manifest(j);
  if (j.contains("channel_data"))
    for (const auto& [name, arr] : j["channel_data"].items()) {
      Channel c;
      for (const auto& s : arr) c.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
      t.channels[name] = c;
    }
  return t;
}

}  // namespace ops::simcore
