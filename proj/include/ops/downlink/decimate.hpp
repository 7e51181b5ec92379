#pragma once

#include <limits>
#include <map>
#include <string>

#include "ops/common/json_io.hpp"
#include "ops/simcore/trace.hpp"

namespace ops::downlink {

/// A trace as received on the ground. Task and goal outcomes are present only
/// when the engineering outcome product made it into the downlink.
struct DownlinkTrace {
  simcore::SimTrace trace;
  std::map<std::string, double> received_fraction;  // "evrs", "products", "channel.<name>"

  bool has_outcome_product() const;
  bool operator==(const DownlinkTrace&) const = default;
};

struct DecimationPolicy {
  /// Minimum spacing between kept samples per channel; 0 keeps every sample.
  std::map<std::string, double> channel_period_s;
  double default_period_s = 0.0;
};

inline constexpr double kUnlimitedBudget = std::numeric_limits<double>::infinity();
inline constexpr const char* kOutcomeProductKind = "engineering.task_outcomes";

/// EVRs and decision records always go down; channels are thinned to the
/// policy rate; products are admitted in descending priority until the first
/// one that does not fit, so a larger budget never drops a product.
DownlinkTrace decimate(const simcore::SimTrace& full, double budget_mbit, const DecimationPolicy& policy = {});

/// Full-bandwidth downlink of a trace.
DownlinkTrace full_downlink(const simcore::SimTrace& full);

Json to_json(const DownlinkTrace& d);
DownlinkTrace downlink_from_json(const Json& j);

}  // namespace ops::downlink
