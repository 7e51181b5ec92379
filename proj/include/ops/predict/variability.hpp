#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "ops/common/error.hpp"
#include "ops/common/json_io.hpp"
#include "ops/simcore/config.hpp"

namespace ops::predict {

inline constexpr const char* kSpecSchema = "variability/1";

OPS_DEFINE_ERROR(ArgumentError, "INVALID_ARGUMENT");

struct Gaussian {
  double mean = 0.0;
  double std = 1.0;
  bool operator==(const Gaussian&) const = default;
};

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
  bool operator==(const Uniform&) const = default;
};

/// Finite distribution over numeric values (keys ordered ascending).
struct Discrete {
  std::map<double, double> probs;
  bool operator==(const Discrete&) const = default;
};

using Distribution = std::variant<Gaussian, Uniform, Discrete>;

struct VariabilityEntry {
  std::string path;
  Distribution dist;
  bool operator==(const VariabilityEntry&) const = default;
};

struct VariabilitySpec {
  std::vector<VariabilityEntry> entries;
  bool operator==(const VariabilitySpec&) const = default;
};

enum class Sampler { MonteCarlo, LatinHypercube };

std::string_view to_string(Sampler s);
/// Accepts "mc"/"lhs" as well as the full names.
Sampler parse_sampler(std::string_view s);

/// Throws DocumentError on a non-positive std, lo >= hi, Discrete
/// probabilities that are negative or do not sum to 1 within 1e-12, or a
/// repeated path.
void validate(const VariabilitySpec& spec);

/// Inverse CDF at u in (0, 1).
double quantile(const Distribution& d, double u);

/// Per-run seed of run `index`.
std::uint64_t run_seed(std::uint64_t master_seed, std::size_t index);

/// Monte Carlo draws every path from its own sub-stream, indexed by run so a
/// batch can be extended without changing earlier runs. Latin hypercube puts
/// each path's n draws in the n equiprobable strata exactly once, with an
/// independent stratum permutation per path.
std::vector<simcore::ScenarioSample> sample(const VariabilitySpec& spec, std::uint64_t master_seed, std::size_t n,
                                            Sampler sampler, const std::string& batch_id = "");

Json to_json(const Distribution& d);
Distribution distribution_from_json(const Json& j);
Json to_json(const VariabilitySpec& s);
VariabilitySpec spec_from_json(const Json& j);

/// Adds every spec path to the config's variable set so a sample missing one
/// is rejected by the simulator.
simcore::SimConfig declare_variables(simcore::SimConfig config, const VariabilitySpec& spec);

}  // namespace ops::predict
