#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ops/common/json_io.hpp"
#include "ops/simcore/trace.hpp"
#include "ops/tasknet/types.hpp"

namespace ops::predict {

/// Goal outcomes in scheduling precedence order.
using Signature = std::vector<std::pair<std::string, simcore::GoalOutcome>>;

Signature signature_of(const simcore::SimTrace& trace, const tasknet::TaskNetwork& net);
std::string signature_key(const Signature& s);

/// Raw counter value a KPI maps to progress: EVRs with the code, products of
/// the kind, or 1 when the goal executed.
double kpi_count(const tasknet::CounterRef& counter, const simcore::SimTrace& trace);

/// What clustering needs from one completed run.
struct RunSummary {
  std::size_t index = 0;
  std::string trace_hash;
  Signature signature;
  std::map<std::string, double> kpi_percent;
  std::map<std::string, std::size_t> evr_counts;
  std::map<std::string, simcore::Channel> channels;
};

RunSummary summarize_run(std::size_t index, const simcore::SimTrace& trace, const tasknet::TaskNetwork& net);

struct Band {
  double t = 0.0;  // bin start
  double min = 0.0, p05 = 0.0, p50 = 0.0, p95 = 0.0, max = 0.0;
  std::size_t n = 0;
  bool operator==(const Band&) const = default;
};

struct Stats {
  double mean = 0.0, std = 0.0, min = 0.0, max = 0.0;
  bool operator==(const Stats&) const = default;
};

struct CountRange {
  std::size_t min = 0, max = 0;
  bool operator==(const CountRange&) const = default;
};

struct OutcomeCluster {
  Signature signature;
  std::vector<std::size_t> run_ids;
  double likelihood = 0.0;
  std::map<std::string, std::vector<Band>> envelopes;
  std::map<std::string, Stats> kpi_stats;
  /// Per EVR code, member count range (codes absent from a member count as 0).
  std::map<std::string, CountRange> evr_counts;
  bool operator==(const OutcomeCluster&) const = default;
};

struct ClusterSet {
  std::string batch_id;
  std::string net_id;
  std::int64_t net_revision = 0;
  double dt_bin = 10.0;
  std::size_t n_runs = 0;
  std::size_t n_failed = 0;
  std::map<std::string, Stats> kpi_stats;  // over all completed runs
  std::vector<OutcomeCluster> clusters;    // descending likelihood
  bool operator==(const ClusterSet&) const = default;
};

/// Nearest-rank quantile of an ascending-sorted, non-empty range.
double nearest_rank(const std::vector<double>& sorted, double p);

/// Per-bin bands over the samples of `members` whose time falls in
/// [k·dt_bin, (k+1)·dt_bin). Bins with no samples are omitted.
std::vector<Band> envelope_serial(const std::vector<const simcore::Channel*>& members, double dt_bin);
/// Same result with bins computed in an OpenMP loop.
std::vector<Band> envelope_parallel(const std::vector<const simcore::Channel*>& members, double dt_bin);

Stats stats_of(const std::vector<double>& xs);

/// Groups runs by exact signature. Likelihood is the member fraction of
/// completed runs. Ties in likelihood order by signature key.
ClusterSet cluster(const std::vector<RunSummary>& runs, double dt_bin = 10.0, std::size_t n_failed = 0);

inline constexpr const char* kClustersSchema = "clusters/1";

Json to_json(const Signature& s);
Signature signature_from_json(const Json& j);
Json to_json(const OutcomeCluster& c);
OutcomeCluster outcome_cluster_from_json(const Json& j);
Json to_json(const ClusterSet& s);
ClusterSet cluster_set_from_json(const Json& j);

}  // namespace ops::predict
