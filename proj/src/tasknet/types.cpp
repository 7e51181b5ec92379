#include "ops/tasknet/types.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "ops/common/error.hpp"

namespace ops::tasknet {
namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<ActivityKind, 8> kActivities{{
    {ActivityKind::MapSwath, "MapSwath"},
    {ActivityKind::TargetedImage, "TargetedImage"},
    {ActivityKind::SpectrometerObs, "SpectrometerObs"},
    {ActivityKind::MagSurvey, "MagSurvey"},
    {ActivityKind::Downlink, "Downlink"},
    {ActivityKind::EngineBurn, "EngineBurn"},
    {ActivityKind::Slew, "Slew"},
    {ActivityKind::Idle, "Idle"},
}};

constexpr NameTable<InstrumentId, 4> kInstruments{{
    {InstrumentId::WAC, "WAC"},
    {InstrumentId::NAC, "NAC"},
    {InstrumentId::SubMmSpec, "SubMmSpec"},
    {InstrumentId::PlasmaParticles, "PlasmaParticles"},
}};

constexpr NameTable<EventKind, 4> kEvents{{
    {EventKind::PlumeDetected, "PlumeDetected"},
    {EventKind::StormDetected, "StormDetected"},
    {EventKind::ReconnectionDetected, "ReconnectionDetected"},
    {EventKind::CameraReset, "CameraReset"},
}};

constexpr NameTable<CounterSource, 3> kCounters{{
    {CounterSource::Evr, "evr"},
    {CounterSource::Product, "product"},
    {CounterSource::Goal, "goal"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const NameTable<E, N>& table, E value) {
  for (const auto& [e, name] : table)
    if (e == value) return name;
  return "?";
}

template <typename E, std::size_t N>
E parse_name(const NameTable<E, N>& table, std::string_view s, const char* what) {
  for (const auto& [e, name] : table)
    if (name == s) return e;
  throw DocumentError(std::string("unknown ") + what + " \"" + std::string(s) + "\"");
}

}  // namespace

std::string_view to_string(ActivityKind k) { return name_of(kActivities, k); }
std::string_view to_string(InstrumentId k) { return name_of(kInstruments, k); }
std::string_view to_string(EventKind k) { return name_of(kEvents, k); }
std::string_view to_string(CounterSource k) { return name_of(kCounters, k); }

ActivityKind parse_activity(std::string_view s) { return parse_name(kActivities, s, "activity"); }
InstrumentId parse_instrument(std::string_view s) { return parse_name(kInstruments, s, "instrument"); }
EventKind parse_event(std::string_view s) { return parse_name(kEvents, s, "event"); }
CounterSource parse_counter_source(std::string_view s) { return parse_name(kCounters, s, "counter source"); }

bool is_imaging(ActivityKind k) { return k == ActivityKind::MapSwath || k == ActivityKind::TargetedImage; }

bool is_engineering(const Goal& g, const TaskNetwork& net) {
  return std::any_of(g.tasks.begin(), g.tasks.end(), [&](const std::string& tid) {
    auto it = net.tasks.find(tid);
    return it != net.tasks.end() && it->second.activity == ActivityKind::EngineBurn;
  });
}

std::vector<const Goal*> TaskNetwork::goals_by_precedence() const {
  std::vector<const Goal*> out;
  out.reserve(goals.size());
  for (const auto& [id, g] : goals) out.push_back(&g);
  std::stable_sort(out.begin(), out.end(), [this](const Goal* a, const Goal* b) {
    const bool ea = is_engineering(*a, *this);
    const bool eb = is_engineering(*b, *this);
    if (ea != eb) return ea;
    if (a->priority != b->priority) return a->priority > b->priority;
    return a->id < b->id;
  });
  return out;
}

std::vector<std::string> TaskNetwork::goal_order() const {
  std::vector<std::string> ids;
  for (const Goal* g : goals_by_precedence()) ids.push_back(g->id);
  return ids;
}

std::vector<const Kpi*> TaskNetwork::kpis() const {
  std::vector<const Kpi*> out;
  for (const auto& c : campaigns)
    for (const auto& k : c.kpis) out.push_back(&k);
  return out;
}

std::optional<std::string> exclusive_resource(const Task& t) {
  if (t.instrument) return std::string(to_string(*t.instrument));
  switch (t.activity) {
    case ActivityKind::Downlink:
      return std::string("telecom");
    case ActivityKind::EngineBurn:
    case ActivityKind::Slew:
      return std::string("attitude");
    case ActivityKind::Idle:
      return std::nullopt;
    default:
      return std::string("bus");
  }
}

}  // namespace ops::tasknet
