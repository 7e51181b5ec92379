#pragma once

#include <map>
#include <string>
#include <vector>

#include "ops/common/error.hpp"
#include "ops/downlink/decimate.hpp"
#include "ops/predict/cluster.hpp"
#include "ops/tasknet/types.hpp"

namespace ops::downlink {

OPS_DEFINE_ERROR(RevisionMismatch, "REVISION_MISMATCH");

enum class SignatureSource { Products, Evrs };
std::string_view to_string(SignatureSource s);

/// Goal outcomes from the outcome product when downlinked, else rebuilt from
/// task and detection EVRs.
predict::Signature reconstruct_signature(const DownlinkTrace& actual, const tasknet::TaskNetwork& net,
                                         SignatureSource* source = nullptr);

/// Number of goals whose outcome differs.
int signature_distance(const predict::Signature& a, const predict::Signature& b);

/// Σ over (channel, bin) of ((actual bin median - p50) / max(p95 - p05, 1e-9))².
/// Only bins present in both the actual trace and the cluster envelope count.
double channel_residual(const DownlinkTrace& actual, const predict::OutcomeCluster& c, double dt_bin,
                        std::map<std::string, double>* per_channel = nullptr);

struct ClusterRank {
  std::size_t cluster = 0;
  std::string signature_key;
  double likelihood = 0.0;
  int signature_distance = 0;
  double channel_residual = 0.0;
  bool operator==(const ClusterRank&) const = default;
};

struct MatchReport {
  std::size_t best_cluster = 0;
  int signature_distance = 0;
  double channel_residual = 0.0;
  std::map<std::string, double> channel_residuals;  // best cluster, per channel
  predict::Signature signature;
  SignatureSource source = SignatureSource::Products;
  std::vector<ClusterRank> ranking;  // by (distance, residual, cluster index)
  bool operator==(const MatchReport&) const = default;
};

/// Throws RevisionMismatch when the trace and clusters come from different
/// net revisions, ArgumentError when there are no clusters.
MatchReport match_cluster(const DownlinkTrace& actual, const predict::ClusterSet& clusters,
                          const tasknet::TaskNetwork& net);

struct EvrDelta {
  std::string code;
  std::size_t actual = 0;
  predict::CountRange expected;
  std::vector<simcore::Evr> evrs;  // surplus: the actual EVRs with this code
  bool operator==(const EvrDelta&) const = default;
};

struct EvrDiff {
  std::vector<EvrDelta> surplus;  // actual count above the cluster's max
  std::vector<EvrDelta> missing;  // actual count below the cluster's min
  std::vector<std::string> surplus_codes() const;
  std::vector<std::string> missing_codes() const;
  bool empty() const { return surplus.empty() && missing.empty(); }
};

EvrDiff evr_diff(const DownlinkTrace& actual, const predict::OutcomeCluster& cluster);

Json to_json(const MatchReport& r);
Json to_json(const EvrDiff& d);

}  // namespace ops::downlink
