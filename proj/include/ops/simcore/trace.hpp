#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ops/common/json_io.hpp"
#include "ops/onboard/timeline.hpp"
#include "ops/simcore/spacecraft.hpp"

namespace ops::simcore {

inline constexpr std::string_view kTraceSchema = "simtrace/1";

enum class TaskOutcome { Scheduled, Executed, Skipped, Interrupted };
enum class GoalOutcome { Executed, Skipped, Interrupted, Inactive };

std::string_view to_string(TaskOutcome o);
std::string_view to_string(GoalOutcome o);
TaskOutcome parse_task_outcome(std::string_view s);
GoalOutcome parse_goal_outcome(std::string_view s);

struct ChannelSample {
  double t = 0.0;
  double v = 0.0;
  bool operator==(const ChannelSample&) const = default;
};

using Channel = std::vector<ChannelSample>;

// Standard channel names.
namespace channel {
inline constexpr const char* kBattery = "battery_wh";
inline constexpr const char* kStorage = "storage_mbit";
inline constexpr const char* kTemperature = "temperature_c";
inline constexpr const char* kMagField = "mag_field_nT";
inline constexpr const char* kPowerLoad = "power_load_w";
inline constexpr const char* kPlumeDetector = "detector.plume";
inline constexpr const char* kMagMode = "mag_mode";
}  // namespace channel

struct SimTrace {
  std::string net_id;
  std::int64_t net_revision = 0;
  std::uint64_t seed = 0;
  double horizon_s = 0.0;
  std::map<std::string, Channel> channels;
  std::vector<Evr> evrs;
  std::vector<DataProduct> products;
  std::vector<onboard::DecisionRecord> decisions;
  std::map<std::string, TaskOutcome> task_outcomes;
  std::map<std::string, GoalOutcome> goal_outcomes;
  std::string trace_hash;

  bool operator==(const SimTrace&) const = default;
};

/// Manifest document without channel samples.
Json manifest_json(const SimTrace& t);
/// One `{"t":…,"v":…}` object per line.
std::string channel_jsonl(const Channel& c);
Channel parse_channel_jsonl(const std::string& text);

/// SHA-256 over the canonical manifest (sans hash) followed by each channel's
/// name and JSONL bytes in name order.
std::string compute_trace_hash(const SimTrace& t);

/// Writes `trace.json` plus `<channel>.jsonl` into `dir`.
void write_trace(const SimTrace& t, const std::filesystem::path& dir);
SimTrace read_trace(const std::filesystem::path& dir);
/// Reads only the manifest (no channels).
SimTrace read_trace_manifest(const std::filesystem::path& dir);

/// Self-contained single-document form used by the HTTP API.
Json to_json(const SimTrace& t);
SimTrace trace_from_json(const Json& j);

}  // namespace ops::simcore
