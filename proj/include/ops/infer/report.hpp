#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ops/infer/explain.hpp"

namespace ops::infer {

inline constexpr const char* kReportSchema = "inference/1";

struct StateEstimate {
  double ml = 0.0;
  std::optional<double> sigma;
  bool operator==(const StateEstimate&) const = default;
};

struct HypothesisSummary {
  int rank = 0;
  double accumulated_error = 0.0;
  double weight = 0.0;  // normalized exp(-error) over the enumerated set
  std::vector<std::string> detached;
  bool converged = true;
  bool operator==(const HypothesisSummary&) const = default;
};

struct InferenceReport {
  double bin_s = 0.0;
  int n_bins = 0;
  std::map<std::string, std::vector<StateEstimate>> series;  // per-timestep continuous, index = bin
  std::map<std::string, StateEstimate> globals;
  std::map<std::string, std::vector<std::vector<double>>> posterior;  // per-timestep discrete, [bin][value]
  std::map<std::string, std::vector<double>> global_posterior;
  std::vector<HypothesisSummary> hypotheses;
  std::vector<Anomaly> anomalies;
  Json explanations = Json::array();

  /// Estimate of a continuous variable at time t (nearest bin, clamped).
  std::optional<StateEstimate> estimate_at(const std::string& name, double t) const;
};

InferenceReport make_report(const InferenceResult& r, const ExplanationReport& explanations = {},
                            std::size_t top_n = 5);

Json to_json(const InferenceReport& r);
InferenceReport report_from_json(const Json& j);

}  // namespace ops::infer
