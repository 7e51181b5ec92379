#include "ops/predict/batch.hpp"

#include <atomic>
#include <thread>

#include "ops/common/hash.hpp"
#include "ops/simcore/simulator.hpp"
#include "ops/tasknet/tasknet.hpp"

namespace ops::predict {

std::size_t BatchManifest::n_done() const {
  return static_cast<std::size_t>(
      std::count_if(runs.begin(), runs.end(), [](const RunRecord& r) { return r.status != RunStatus::Pending; }));
}

std::string batch_id_of(const BatchRequest& r) { return sha256_hex(canonical(to_json(r))).substr(0, 16); }

ClusterSet BatchResult::clusters() const {
  std::size_t failed = 0;
  for (const auto& r : manifest.runs) failed += r.status == RunStatus::Failed;
  auto set = cluster(summaries, manifest.dt_bin, failed);
  set.batch_id = manifest.batch_id;
  set.net_id = manifest.net_id;
  set.net_revision = manifest.net_revision;
  return set;
}

BatchResult run_batch(const BatchRequest& request, std::size_t workers, const TraceSink& sink,
                      const ProgressFn& progress) {
  if (workers < 1) throw ArgumentError("workers must be at least 1");
  if (!(request.dt_bin > 0.0)) throw ArgumentError("dt_bin must be positive");
  const auto id = batch_id_of(request);
  const auto samples = sample(request.spec, request.master_seed, request.n, request.sampler, id);
  const auto config = declare_variables(request.config, request.spec);

  BatchResult result;
  auto& m = result.manifest;
  m.batch_id = id;
  m.net_id = request.net.id;
  m.net_revision = request.net.revision;
  m.spec_hash = sha256_hex(canonical(to_json(request.spec)));
  m.config_hash = sha256_hex(canonical(simcore::to_json(request.config)));
  m.sampler = request.sampler;
  m.n_runs = request.n;
  m.master_seed = request.master_seed;
  m.dt_bin = request.dt_bin;
  m.runs.resize(request.n);
  for (std::size_t i = 0; i < request.n; ++i) m.runs[i] = {i, samples[i].seed, samples[i].values, RunStatus::Pending, "", ""};

  std::vector<std::optional<RunSummary>> slots(request.n);
  WorkQueue<std::size_t> queue(2 * workers);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mu;

  auto work = [&] {
    while (auto i = queue.pop()) {
      auto& rec = m.runs[*i];
      try {
        const auto trace = simcore::run(request.net, config, samples[*i]);
        if (sink) sink(*i, trace);
        slots[*i] = summarize_run(*i, trace, request.net);
        rec.trace_hash = trace.trace_hash;
        rec.status = RunStatus::Completed;
      } catch (const std::exception& e) {
        rec.status = RunStatus::Failed;
        rec.error = e.what();
      }
      const auto n = ++done;
      if (progress) {
        std::lock_guard lock(progress_mu);
        progress(n, request.n);
      }
    }
  };

  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  std::thread generator([&] {
    for (std::size_t i = 0; i < request.n; ++i) queue.push(i);
    queue.close();
  });
  generator.join();
  for (auto& t : pool) t.join();

  for (auto& s : slots)
    if (s) result.summaries.push_back(std::move(*s));
  return result;
}

TraceSink directory_sink(const std::filesystem::path& batch_dir) {
  return [batch_dir](std::size_t index, const simcore::SimTrace& trace) {
    simcore::write_trace(trace, batch_dir / "runs" / std::to_string(index));
  };
}

void write_batch(const std::filesystem::path& batch_dir, const BatchRequest& request, const BatchResult& result) {
  std::filesystem::create_directories(batch_dir);
  write_json_file(batch_dir / "request.json", to_json(request));
  write_json_file(batch_dir / "clusters.json", to_json(result.clusters()));
  write_json_file(batch_dir / "manifest.json", to_json(result.manifest));
}

ClusterSet recluster(const std::filesystem::path& batch_dir) {
  const auto request = batch_request_from_json(read_json_file(batch_dir / "request.json"));
  BatchResult result;
  result.manifest = manifest_from_json(read_json_file(batch_dir / "manifest.json"));
  for (const auto& r : result.manifest.runs) {
    if (r.status != RunStatus::Completed) continue;
    const auto trace = simcore::read_trace(batch_dir / "runs" / std::to_string(r.index));
    result.summaries.push_back(summarize_run(r.index, trace, request.net));
  }
  return result.clusters();
}

}  // namespace ops::predict
