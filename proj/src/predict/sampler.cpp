#include <cmath>
#include <numeric>

#include "ops/common/rng.hpp"
#include "ops/predict/variability.hpp"

namespace ops::predict {

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t index) {
  return mix_seed(master_seed, static_cast<std::uint64_t>(index));
}

std::vector<simcore::ScenarioSample> sample(const VariabilitySpec& spec, std::uint64_t master_seed, std::size_t n,
                                            Sampler sampler, const std::string& batch_id) {
  if (n < 1) throw ArgumentError("sample count must be at least 1");
  validate(spec);
  std::vector<simcore::ScenarioSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].seed = run_seed(master_seed, i);
    out[i].batch_id = batch_id;
    out[i].index = static_cast<std::int64_t>(i);
  }
  const double below_one = std::nextafter(1.0, 0.0);
  for (const auto& e : spec.entries) {
    if (sampler == Sampler::MonteCarlo) {
      const auto base = stream_seed(master_seed, "mc." + e.path);
      for (std::size_t i = 0; i < n; ++i) {
        Rng rng(mix_seed(base, i));
        out[i].values[e.path] = quantile(e.dist, rng.uniform_open());
      }
    } else {
      Rng rng(master_seed, "lhs." + e.path);
      std::vector<std::size_t> strata(n);
      std::iota(strata.begin(), strata.end(), 0);
      for (std::size_t i = n; i > 1; --i) std::swap(strata[i - 1], strata[rng.below(i)]);
      for (std::size_t i = 0; i < n; ++i) {
        const double u = (static_cast<double>(strata[i]) + rng.uniform_open()) / static_cast<double>(n);
        out[i].values[e.path] = quantile(e.dist, std::min(u, below_one));
      }
    }
  }
  return out;
}

}  // namespace ops::predict
