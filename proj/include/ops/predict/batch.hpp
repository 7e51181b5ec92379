#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ops/predict/cluster.hpp"
#include "ops/predict/variability.hpp"
#include "ops/simcore/config.hpp"
#include "ops/simcore/trace.hpp"
#include "ops/tasknet/types.hpp"

namespace ops::predict {

/// Bounded multi-producer multi-consumer queue. push() waits while full and
/// never drops; pop() waits while empty and returns nullopt once closed and
/// drained.
template <typename T>
class WorkQueue {
 public:
  explicit WorkQueue(std::size_t capacity) : capacity_(capacity < 1 ? 1 : capacity) {}

  void push(T item) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_; });
    items_.push_back(std::move(item));
    not_empty_.notify_one();
  }

  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
  }

  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable not_full_, not_empty_;
  std::deque<T> items_;
  bool closed_ = false;
};

enum class RunStatus { Pending, Completed, Failed };
std::string_view to_string(RunStatus s);
RunStatus parse_run_status(std::string_view s);

struct RunRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> values;
  RunStatus status = RunStatus::Pending;
  std::string trace_hash;
  std::string error;
  bool operator==(const RunRecord&) const = default;
};

inline constexpr const char* kManifestSchema = "batch/1";

struct BatchManifest {
  std::string batch_id;
  std::string net_id;
  std::int64_t net_revision = 0;
  std::string spec_hash;
  std::string config_hash;
  Sampler sampler = Sampler::MonteCarlo;
  std::size_t n_runs = 0;
  std::uint64_t master_seed = 0;
  double dt_bin = 10.0;
  std::vector<RunRecord> runs;
  bool operator==(const BatchManifest&) const = default;

  std::size_t n_done() const;
  bool complete() const { return runs.size() == n_runs && n_done() == n_runs; }
};

Json to_json(const BatchManifest& m);
BatchManifest manifest_from_json(const Json& j);

struct BatchRequest {
  tasknet::TaskNetwork net;
  simcore::SimConfig config;
  VariabilitySpec spec;
  std::size_t n = 1;
  Sampler sampler = Sampler::MonteCarlo;
  std::uint64_t master_seed = 0;
  double dt_bin = 10.0;
};

/// Content id of the request; worker count is deliberately not part of it.
std::string batch_id_of(const BatchRequest& r);

/// Receives completed traces. Called concurrently from worker threads with
/// distinct indices.
using TraceSink = std::function<void(std::size_t index, const simcore::SimTrace&)>;
using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

struct BatchResult {
  BatchManifest manifest;
  std::vector<RunSummary> summaries;  // completed runs, ascending index
  ClusterSet clusters() const;
};

/// One generator thread enqueues samples on a bounded queue; `workers`
/// threads run the simulator. Per-run exceptions mark the run Failed and the
/// batch continues. Results do not depend on the worker count.
BatchResult run_batch(const BatchRequest& request, std::size_t workers, const TraceSink& sink = {},
                      const ProgressFn& progress = {});

// ---------------------------------------------------------------------------
// Batch directory: manifest.json, request.json, runs/<index>/, clusters.json

TraceSink directory_sink(const std::filesystem::path& batch_dir);
void write_batch(const std::filesystem::path& batch_dir, const BatchRequest& request, const BatchResult& result);
Json to_json(const BatchRequest& r);
BatchRequest batch_request_from_json(const Json& j);

/// Rebuilds summaries from stored run traces and re-clusters.
ClusterSet recluster(const std::filesystem::path& batch_dir);

}  // namespace ops::predict
