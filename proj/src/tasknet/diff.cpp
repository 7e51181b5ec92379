#include <set>

#include "ops/tasknet/tasknet.hpp"

namespace ops::tasknet {
namespace {

void diff_entities(const std::string& entity, const std::map<std::string, Json>& a,
                   const std::map<std::string, Json>& b, ChangeSet& out) {
  for (const auto& [id, ja] : a) {
    auto it = b.find(id);
    if (it == b.end()) {
      out.removed.push_back({entity, id});
      continue;
    }
    const Json& jb = it->second;
    std::set<std::string> keys;
    for (const auto& [k, v] : ja.items()) keys.insert(k);
    for (const auto& [k, v] : jb.items()) keys.insert(k);
    for (const auto& k : keys) {
      const Json va = ja.contains(k) ? ja[k] : Json();
      const Json vb = jb.contains(k) ? jb[k] : Json();
      if (va != vb) out.modified.push_back({entity, id, k, va, vb});
    }
  }
  for (const auto& [id, jb] : b)
    if (!a.count(id)) out.added.push_back({entity, id});
}

}  // namespace

ChangeSet diff(const TaskNetwork& a, const TaskNetwork& b) {
  ChangeSet cs;
  auto campaigns = [](const TaskNetwork& n) {
    std::map<std::string, Json> m;
    for (const auto& c : n.campaigns) m.emplace(c.id, to_json(c));
    return m;
  };
  auto goals = [](const TaskNetwork& n) {
    std::map<std::string, Json> m;
    for (const auto& [id, g] : n.goals) m.emplace(id, to_json(g));
    return m;
  };
  auto tasks = [](const TaskNetwork& n) {
    std::map<std::string, Json> m;
    for (const auto& [id, t] : n.tasks) m.emplace(id, to_json(t));
    return m;
  };
  diff_entities("campaign", campaigns(a), campaigns(b), cs);
  diff_entities("goal", goals(a), goals(b), cs);
  diff_entities("task", tasks(a), tasks(b), cs);
  return cs;
}

}  // namespace ops::tasknet
