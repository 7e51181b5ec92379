#pragma once

#include <string>
#include <vector>

#include "ops/common/error.hpp"
#include "ops/common/json_io.hpp"
#include "ops/tasknet/types.hpp"

namespace ops::tasknet {

inline constexpr const char* kSchema = "tasknet/1";

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  IdMismatch,
  MissingGoal,
  DuplicateGoalRef,
  MissingTask,
  TaskGoalMismatch,
  DanglingOrdering,
  CyclicOrdering,
  DuplicatePriority,
  NegativePriority,
  NonPositiveDuration,
  NegativeResource,
  InvalidWindow,
  WindowOverflow,
  InvalidKpi,
};

std::string_view to_string(ViolationKind k);
bool is_referential(ViolationKind k);

struct Violation {
  ViolationKind kind;
  std::vector<std::string> subjects;
  std::string message;
};

/// Empty iff every invariant holds and every ordering chain fits inside its
/// goals' time windows. Violations are data, never exceptions.
std::vector<Violation> validate(const TaskNetwork& net);

// ---------------------------------------------------------------------------
// Three-way merge

OPS_DEFINE_ERROR(DivergentAncestry, "DIVERGENT_ANCESTRY");

struct Conflict {
  std::string entity;  // "goal", "task", "campaign", "network"
  std::string id;
  std::string field;
  std::string reason;
  bool operator==(const Conflict&) const = default;
};

struct MergeResult {
  std::optional<TaskNetwork> merged;
  std::vector<Conflict> conflicts;
  bool ok() const { return conflicts.empty(); }
};

/// Per-field three-way merge at goal/task/campaign granularity. Throws
/// DivergentAncestry when ours/theirs do not descend from base.
MergeResult merge(const TaskNetwork& base, const TaskNetwork& ours, const TaskNetwork& theirs);

// ---------------------------------------------------------------------------
// Diff

struct EntityRef {
  std::string entity;
  std::string id;
  bool operator==(const EntityRef&) const = default;
};

struct FieldChange {
  std::string entity;
  std::string id;
  std::string field;
  Json before;
  Json after;
};

struct ChangeSet {
  std::vector<EntityRef> added;
  std::vector<EntityRef> removed;
  std::vector<FieldChange> modified;
  bool empty() const { return added.empty() && removed.empty() && modified.empty(); }
};

ChangeSet diff(const TaskNetwork& a, const TaskNetwork& b);

// ---------------------------------------------------------------------------
// KPIs

/// Piecewise-linear progress in percent, clamped to [0, 100].
double kpi_progress(const Kpi& kpi, double count);

// ---------------------------------------------------------------------------
// Serialization (canonical form: sorted keys, schema "tasknet/1")

Json to_json(const TaskNetwork& net);
TaskNetwork network_from_json(const Json& j);
std::string serialize(const TaskNetwork& net);
TaskNetwork deserialize(const std::string& text);
/// SHA-256 of the canonical bytes.
std::string content_hash(const TaskNetwork& net);

Json to_json(const Goal& g);
Json to_json(const Task& t);
Json to_json(const Campaign& c);
Json to_json(const Kpi& k);
Goal goal_from_json(const Json& j);
Task task_from_json(const Json& j);
Campaign campaign_from_json(const Json& j);
Kpi kpi_from_json(const Json& j);

Json to_json(const Violation& v);
Json to_json(const Conflict& c);
Json to_json(const ChangeSet& c);

}  // namespace ops::tasknet
