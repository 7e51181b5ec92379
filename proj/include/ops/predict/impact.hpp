#pragma once

#include <map>
#include <string>
#include <vector>

#include "ops/predict/cluster.hpp"

namespace ops::predict {

struct Delta {
  double before = 0.0;
  double after = 0.0;
  double delta = 0.0;
  bool operator==(const Delta&) const = default;
};

struct SignatureDelta {
  std::string key;  // signature_key; missing on one side counts as 0
  Delta likelihood;
  bool operator==(const SignatureDelta&) const = default;
};

struct ImpactReport {
  std::string before_batch, after_batch;
  std::vector<SignatureDelta> signatures;  // sorted by key
  std::map<std::string, Delta> goal_executed;  // P(goal Executed)
  std::map<std::string, Delta> kpi_mean;
  bool operator==(const ImpactReport&) const = default;
};

/// Probability that `goal` executed, summed over clusters (0 when absent).
double executed_likelihood(const ClusterSet& s, const std::string& goal);

ImpactReport summarize_impact(const ClusterSet& before, const ClusterSet& after);

Json to_json(const ImpactReport& r);

}  // namespace ops::predict
