#pragma once

#include <map>
#include <string>
#include <vector>

#include "ops/downlink/decimate.hpp"
#include "ops/infer/report.hpp"

namespace ops::downlink {

struct Incon {
  double t_epoch = 0.0;
  std::map<std::string, infer::StateEstimate> state;
  std::map<std::string, std::vector<double>> discrete;  // posterior at the epoch
  std::vector<infer::Anomaly> open_anomalies;
};

/// Time of the last received channel sample (EVRs if no channel data).
double last_epoch(const DownlinkTrace& actual);

/// State at the last telemetry epoch from the inference report. Sigmas are
/// floored at 1e-12 so every estimate carries positive uncertainty.
Incon build_incon(const DownlinkTrace& actual, const infer::InferenceReport& report);

Json to_json(const Incon& i);

}  // namespace ops::downlink
