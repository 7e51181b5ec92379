#include <algorithm>
#include <set>

#include "ops/tasknet/tasknet.hpp"

namespace ops::tasknet {
namespace {

// Fields whose value is a collection merged element-wise rather than as a
// single atomic value.
bool is_set_field(const std::string& entity, const std::string& field) {
  return (entity == "goal" && (field == "tasks" || field == "author_history")) ||
         (entity == "campaign" && field == "goal_ids");
}

Json value_of(const Json& obj, const std::string& key) {
  if (obj.is_object() && obj.contains(key)) return obj[key];
  return Json();  // absent
}

bool contains(const Json& arr, const Json& v) {
  return std::find(arr.begin(), arr.end(), v) != arr.end();
}

// base survivors (not removed by either side), then ours' additions, then theirs'.
Json merge_set(const Json& base, const Json& ours, const Json& theirs) {
  const Json b = base.is_array() ? base : Json::array();
  const Json o = ours.is_array() ? ours : Json::array();
  const Json t = theirs.is_array() ? theirs : Json::array();
  Json out = Json::array();
  for (const auto& v : b)
    if (contains(o, v) && contains(t, v) && !contains(out, v)) out.push_back(v);
  for (const auto& v : o)
    if (!contains(b, v) && !contains(out, v)) out.push_back(v);
  for (const auto& v : t)
    if (!contains(b, v) && !contains(out, v)) out.push_back(v);
  return out;
}

struct EntityMerge {
  std::string entity;
  std::vector<Conflict>* conflicts;

  std::optional<Json> fields(const std::string& id, const Json& b, const Json& o, const Json& t) {
    std::set<std::string> keys;
    for (const Json* src : {&b, &o, &t})
      if (src->is_object())
        for (const auto& [k, v] : src->items()) keys.insert(k);
    Json out = Json::object();
    bool clean = true;
    for (const auto& k : keys) {
      const Json bv = value_of(b, k), ov = value_of(o, k), tv = value_of(t, k);
      Json merged;
      if (is_set_field(entity, k)) {
        merged = merge_set(bv, ov, tv);
      } else if (ov == tv) {
        merged = ov;
      } else if (ov == bv) {
        merged = tv;
      } else if (tv == bv) {
        merged = ov;
      } else {
        conflicts->push_back({entity, id, k, "changed differently on both sides"});
        clean = false;
        continue;
      }
      if (!merged.is_null()) out[k] = merged;
    }
    if (!clean) return std::nullopt;
    return out;
  }

  // Returns the merged object, or an empty optional when deleted/conflicted.
  std::optional<Json> entity3(const std::string& id, const Json* b, const Json* o, const Json* t) {
    if (!b) {
      if (o && !t) return *o;
      if (t && !o) return *t;
      if (!o && !t) return std::nullopt;
      return fields(id, Json::object(), *o, *t);
    }
    if (!o && !t) return std::nullopt;
    if (!o || !t) {
      const Json* kept = o ? o : t;
      if (*kept == *b) return std::nullopt;  // clean delete
      conflicts->push_back({entity, id, "*", std::string("deleted in ") + (o ? "theirs" : "ours") +
                                                 ", modified in " + (o ? "ours" : "theirs")});
      return std::nullopt;
    }
    return fields(id, *b, *o, *t);
  }
};

template <typename Map>
std::map<std::string, Json> as_json_map(const Map& m) {
  std::map<std::string, Json> out;
  for (const auto& [id, v] : m) out.emplace(id, to_json(v));
  return out;
}

std::map<std::string, Json> campaigns_json(const TaskNetwork& n) {
  std::map<std::string, Json> out;
  for (const auto& c : n.campaigns) out.emplace(c.id, to_json(c));
  return out;
}

std::vector<std::string> union_ids(const std::map<std::string, Json>& b, const std::map<std::string, Json>& o,
                                   const std::map<std::string, Json>& t) {
  std::set<std::string> ids;
  for (const auto* m : {&b, &o, &t})
    for (const auto& [id, v] : *m) ids.insert(id);
  return {ids.begin(), ids.end()};
}

const Json* find(const std::map<std::string, Json>& m, const std::string& id) {
  auto it = m.find(id);
  return it == m.end() ? nullptr : &it->second;
}

}  // namespace

MergeResult merge(const TaskNetwork& base, const TaskNetwork& ours, const TaskNetwork& theirs) {
  if (ours.id != base.id || theirs.id != base.id) {
    throw DivergentAncestry("networks " + ours.id + " / " + theirs.id + " do not share base " + base.id);
  }
  if (ours.revision < base.revision || theirs.revision < base.revision) {
    throw DivergentAncestry("revisions " + std::to_string(ours.revision) + " / " + std::to_string(theirs.revision) +
                            " do not descend from base revision " + std::to_string(base.revision));
  }

  MergeResult result;
  if (ours == theirs || theirs == base) {
    result.merged = ours;
    return result;
  }
  if (ours == base) {
    result.merged = theirs;
    return result;
  }

  TaskNetwork merged;
  merged.id = base.id;
  merged.revision = std::max(ours.revision, theirs.revision) + 1;

  {
    EntityMerge em{"goal", &result.conflicts};
    const auto b = as_json_map(base.goals), o = as_json_map(ours.goals), t = as_json_map(theirs.goals);
    for (const auto& id : union_ids(b, o, t))
      if (auto j = em.entity3(id, find(b, id), find(o, id), find(t, id))) merged.goals.emplace(id, goal_from_json(*j));
  }
  {
    EntityMerge em{"task", &result.conflicts};
    const auto b = as_json_map(base.tasks), o = as_json_map(ours.tasks), t = as_json_map(theirs.tasks);
    for (const auto& id : union_ids(b, o, t))
      if (auto j = em.entity3(id, find(b, id), find(o, id), find(t, id))) merged.tasks.emplace(id, task_from_json(*j));
  }
  {
    EntityMerge em{"campaign", &result.conflicts};
    const auto b = campaigns_json(base), o = campaigns_json(ours), t = campaigns_json(theirs);
    // Preserve base order, then ours' and theirs' new campaigns.
    std::vector<std::string> order;
    for (const auto* n : {&base, &ours, &theirs})
      for (const auto& c : n->campaigns)
        if (std::find(order.begin(), order.end(), c.id) == order.end()) order.push_back(c.id);
    for (const auto& id : order)
      if (auto j = em.entity3(id, find(b, id), find(o, id), find(t, id))) merged.campaigns.push_back(campaign_from_json(*j));
  }

  // Edits that merge cleanly field-by-field can still break references or
  // the priority total order; surface those as conflicts too.
  if (!result.conflicts.empty()) return result;
  for (const auto& v : validate(merged)) {
    if (is_referential(v.kind)) {
      result.conflicts.push_back({"network", v.subjects.empty() ? merged.id : v.subjects.front(), "references",
                                  v.message});
    } else if (v.kind == ViolationKind::DuplicatePriority) {
      std::string ids;
      for (const auto& s : v.subjects) ids += (ids.empty() ? "" : ",") + s;
      result.conflicts.push_back({"goal", ids, "priority", v.message});
    }
  }

  if (result.conflicts.empty()) result.merged = std::move(merged);
  return result;
}

}  // namespace ops::tasknet
