#include <algorithm>
#include <cmath>

#include "ops/predict/cluster.hpp"

namespace ops::predict {
namespace {

std::vector<std::vector<double>> gather(const std::vector<const simcore::Channel*>& members, double dt_bin) {
  std::vector<std::vector<double>> bins;
  for (const auto* c : members)
    for (const auto& s : *c) {
      const auto k = static_cast<std::size_t>(std::floor(s.t / dt_bin + 1e-9));
      if (k >= bins.size()) bins.resize(k + 1);
      bins[k].push_back(s.v);
    }
  return bins;
}

Band band_of(std::vector<double>& values, std::size_t k, double dt_bin) {
  std::sort(values.begin(), values.end());
  Band b;
  b.t = static_cast<double>(k) * dt_bin;
  b.min = values.front();
  b.p05 = nearest_rank(values, 0.05);
  b.p50 = nearest_rank(values, 0.50);
  b.p95 = nearest_rank(values, 0.95);
  b.max = values.back();
  b.n = values.size();
  return b;
}

std::vector<Band> compact(std::vector<Band>& bands, const std::vector<std::vector<double>>& bins) {
  std::vector<Band> out;
  for (std::size_t k = 0; k < bins.size(); ++k)
    if (!bins[k].empty()) out.push_back(bands[k]);
  return out;
}

}  // namespace

double nearest_rank(const std::vector<double>& sorted, double p) {
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::vector<Band> envelope_serial(const std::vector<const simcore::Channel*>& members, double dt_bin) {
  auto bins = gather(members, dt_bin);
  std::vector<Band> bands(bins.size());
  for (std::size_t k = 0; k < bins.size(); ++k)
    if (!bins[k].empty()) bands[k] = band_of(bins[k], k, dt_bin);
  return compact(bands, bins);
}

std::vector<Band> envelope_parallel(const std::vector<const simcore::Channel*>& members, double dt_bin) {
  auto bins = gather(members, dt_bin);
  std::vector<Band> bands(bins.size());
  const auto n = static_cast<std::int64_t>(bins.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t k = 0; k < n; ++k)
    if (!bins[k].empty()) bands[k] = band_of(bins[k], static_cast<std::size_t>(k), dt_bin);
  return compact(bands, bins);
}

}  // namespace ops::predict
