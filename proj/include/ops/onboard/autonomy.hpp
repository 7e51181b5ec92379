#pragma once

#include <string_view>

#include "ops/common/json_io.hpp"
#include "ops/common/rng.hpp"

namespace ops::onboard {

enum class DetectorKind { Plume, Storm, Reconnection };

struct Detector {
  DetectorKind kind = DetectorKind::Plume;
  double threshold = 1.0;
  double p_fp = 0.0;
  double p_fn = 0.0;
};

std::string_view to_string(DetectorKind k);
DetectorKind parse_detector_kind(std::string_view s);
Json to_json(const Detector& d);
Detector detector_from_json(const Json& j);

/// Noisy detector: the truth flipped with probability p_fn (true) or p_fp (false).
bool detect(const Detector& d, bool truth, Rng& rng);

enum class MagMode { LosslessHighRate, BinnedLowRate };
std::string_view to_string(MagMode m);

/// High-rate lossless recording when the windowed field variance reaches the threshold.
MagMode adapt_mag_mode(double window_variance, double threshold);

struct ExposureParams {
  double exposure_time = 1.0;
  double n_stack = 1.0;
  bool operator==(const ExposureParams&) const = default;
};

struct ExposureDecision {
  ExposureParams params;
  bool budget_limited = false;  // caller emits AUTONOMY_BUDGET_LIMITED
};

/// Doubling search over n_stack. Noise scales as 1/sqrt(n_stack), product
/// size as n_stack * data_per_obs_mbit.
ExposureDecision tune_exposure(double noise_level, double target_noise, double downlink_budget_mbit,
                               const ExposureParams& current, double data_per_obs_mbit);

}  // namespace ops::onboard
