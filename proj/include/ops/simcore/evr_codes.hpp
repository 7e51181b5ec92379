#pragma once

#include <array>
#include <string_view>

#include "ops/simcore/spacecraft.hpp"

// Stable EVR identifiers. registry/evr_codes.json mirrors this table and a
// unit test keeps the two in sync.
namespace ops::simcore::evr {

inline constexpr std::string_view kPlanUpdated = "PLAN_UPDATED";
inline constexpr std::string_view kTaskStart = "TASK_START";
inline constexpr std::string_view kTaskEnd = "TASK_END";
inline constexpr std::string_view kTaskInterrupted = "TASK_INTERRUPTED";
inline constexpr std::string_view kTaskOverrun = "TASK_OVERRUN";
inline constexpr std::string_view kPlumeDetected = "PLUME_DETECTED";
inline constexpr std::string_view kStormDetected = "STORM_DETECTED";
inline constexpr std::string_view kReconnectionDetected = "RECONNECTION_DETECTED";
inline constexpr std::string_view kCameraReset = "CAMERA_RESET";
inline constexpr std::string_view kCameraRecovered = "CAMERA_RECOVERED";
inline constexpr std::string_view kPowerFdir = "POWER_FDIR_INTERRUPT";
inline constexpr std::string_view kMagModeChanged = "MAG_MODE_CHANGED";
inline constexpr std::string_view kExposureTuned = "EXPOSURE_TUNED";
inline constexpr std::string_view kBudgetLimited = "AUTONOMY_BUDGET_LIMITED";
inline constexpr std::string_view kStorageFull = "STORAGE_FULL";

struct CodeInfo {
  std::string_view code;
  EvrLevel level;
};

inline constexpr std::array<CodeInfo, 15> kRegistry{{
    {kPlanUpdated, EvrLevel::INFO},
    {kTaskStart, EvrLevel::INFO},
    {kTaskEnd, EvrLevel::INFO},
    {kTaskInterrupted, EvrLevel::WARN},
    {kTaskOverrun, EvrLevel::WARN},
    {kPlumeDetected, EvrLevel::INFO},
    {kStormDetected, EvrLevel::INFO},
    {kReconnectionDetected, EvrLevel::INFO},
    {kCameraReset, EvrLevel::ERROR},
    {kCameraRecovered, EvrLevel::INFO},
    {kPowerFdir, EvrLevel::WARN},
    {kMagModeChanged, EvrLevel::INFO},
    {kExposureTuned, EvrLevel::INFO},
    {kBudgetLimited, EvrLevel::WARN},
    {kStorageFull, EvrLevel::WARN},
}};

constexpr EvrLevel level_of(std::string_view code) {
  for (const auto& c : kRegistry)
    if (c.code == code) return c.level;
  return EvrLevel::INFO;
}

}  // namespace ops::simcore::evr
