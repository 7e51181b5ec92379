#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace ops {

std::uint64_t splitmix64(std::uint64_t& state);

/// Stateless 64-bit mixer; `mix(a, b)` is the per-run seed derivation.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Seed of the named sub-stream of `seed`. Adding a new stream name never
/// perturbs the draws of existing ones.
std::uint64_t stream_seed(std::uint64_t seed, std::string_view name);

/// xoshiro256** with portable transforms. All variates are produced from
/// uniform draws through explicit formulas, so sequences are identical on
/// every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::string_view stream) : Rng(stream_seed(seed, stream)) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t poisson(double mean);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::array<std::uint64_t, 4> s_{};
};

/// Standard normal quantile function.
double normal_quantile(double p);
/// Standard normal CDF.
double normal_cdf(double z);

}  // namespace ops
