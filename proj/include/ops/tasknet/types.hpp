#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ops::tasknet {

enum class ActivityKind { MapSwath, TargetedImage, SpectrometerObs, MagSurvey, Downlink, EngineBurn, Slew, Idle };

enum class InstrumentId { WAC, NAC, SubMmSpec, PlasmaParticles };

/// Named onboard events a conditional goal may wait on.
enum class EventKind { PlumeDetected, StormDetected, ReconnectionDetected, CameraReset };

enum class CounterSource { Evr, Product, Goal };

std::string_view to_string(ActivityKind k);
std::string_view to_string(InstrumentId k);
std::string_view to_string(EventKind k);
std::string_view to_string(CounterSource k);

// The parsers throw DocumentError on unknown names.
ActivityKind parse_activity(std::string_view s);
InstrumentId parse_instrument(std::string_view s);
EventKind parse_event(std::string_view s);
CounterSource parse_counter_source(std::string_view s);

struct TargetRef {
  std::string body;
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  bool operator==(const TargetRef&) const = default;
};

/// Mission-elapsed seconds, [start, end].
struct TimeWindow {
  double start = 0.0;
  double end = 0.0;
  double length() const { return end - start; }
  bool operator==(const TimeWindow&) const = default;
};

struct EventCondition {
  EventKind event = EventKind::PlumeDetected;
  bool operator==(const EventCondition&) const = default;
};

struct AuthorNote {
  std::string author;
  std::string timestamp;
  std::string note;
  bool operator==(const AuthorNote&) const = default;
};

struct Goal {
  std::string id;
  std::string name;
  std::int64_t priority = 0;  // higher = more important
  std::vector<std::string> tasks;
  std::optional<EventCondition> condition;
  std::optional<TimeWindow> time_window;
  std::vector<AuthorNote> author_history;
  bool operator==(const Goal&) const = default;
};

struct Task {
  std::string id;
  std::string goal_id;
  ActivityKind activity = ActivityKind::Idle;
  double duration_s = 0.0;
  double power_w = 0.0;
  double data_rate_mbit_s = 0.0;
  std::optional<InstrumentId> instrument;
  std::optional<TargetRef> pointing_target;
  std::vector<std::string> ordering_after;
  std::map<std::string, double> parameters;  // e.g. exposure_time, n_stack

  double parameter(const std::string& key, double fallback) const {
    auto it = parameters.find(key);
    return it == parameters.end() ? fallback : it->second;
  }
  bool operator==(const Task&) const = default;
};

struct CounterRef {
  CounterSource source = CounterSource::Evr;
  std::string key;  // EVR code, product kind, or goal id
  bool operator==(const CounterRef&) const = default;
};

struct ProgressPoint {
  double count = 0.0;
  double percent = 0.0;
  bool operator==(const ProgressPoint&) const = default;
};

struct Kpi {
  std::string id;
  std::string name;
  CounterRef counter;
  std::vector<ProgressPoint> progress_points;
  bool operator==(const Kpi&) const = default;
};

struct Campaign {
  std::string id;
  std::string name;
  std::vector<std::string> goal_ids;
  std::vector<Kpi> kpis;
  bool operator==(const Campaign&) const = default;
};

/// Immutable once built; a new revision is a new value.
struct TaskNetwork {
  std::string id;
  std::int64_t revision = 0;
  std::vector<Campaign> campaigns;
  std::map<std::string, Goal> goals;
  std::map<std::string, Task> tasks;
  bool operator==(const TaskNetwork&) const = default;

  /// Goals ordered by scheduling precedence: goals containing an EngineBurn
  /// task first, then strictly descending priority, ties broken by id.
  std::vector<const Goal*> goals_by_precedence() const;
  /// Same ordering as goals_by_precedence, ids only.
  std::vector<std::string> goal_order() const;
  std::vector<const Kpi*> kpis() const;
};

/// Instruments are exclusive; activities without an instrument serialize on
/// a shared subsystem ("telecom" for downlink, "attitude" for burns and
/// slews). Idle tasks reserve nothing.
std::optional<std::string> exclusive_resource(const Task& t);

bool is_imaging(ActivityKind k);
bool is_engineering(const Goal& g, const TaskNetwork& net);

}  // namespace ops::tasknet
