#include "ops/onboard/autonomy.hpp"

#include <cmath>

#include "ops/common/error.hpp"

namespace ops::onboard {

std::string_view to_string(DetectorKind k) {
  switch (k) {
    case DetectorKind::Plume: return "plume";
    case DetectorKind::Storm: return "storm";
    case DetectorKind::Reconnection: return "reconnection";
  }
  return "?";
}

DetectorKind parse_detector_kind(std::string_view s) {
  for (auto k : {DetectorKind::Plume, DetectorKind::Storm, DetectorKind::Reconnection})
    if (to_string(k) == s) return k;
  throw DocumentError("unknown detector kind \"" + std::string(s) + "\"");
}

Json to_json(const Detector& d) {
  return Json{{"kind", to_string(d.kind)}, {"threshold", d.threshold}, {"p_fp", d.p_fp}, {"p_fn", d.p_fn}};
}

Detector detector_from_json(const Json& j) {
  Detector d;
  d.kind = parse_detector_kind(j.at("kind").get<std::string>());
  d.threshold = j.value("threshold", 1.0);
  d.p_fp = j.value("p_fp", 0.0);
  d.p_fn = j.value("p_fn", 0.0);
  if (d.p_fp < 0 || d.p_fp > 1 || d.p_fn < 0 || d.p_fn > 1)
    throw DocumentError("detector " + std::string(to_string(d.kind)) + ": rates must lie in [0,1]");
  return d;
}

bool detect(const Detector& d, bool truth, Rng& rng) {
  // Always draw so the stream position does not depend on the truth value.
  const double u = rng.uniform();
  return truth ? !(u < d.p_fn) : u < d.p_fp;
}

std::string_view to_string(MagMode m) {
  return m == MagMode::LosslessHighRate ? "LosslessHighRate" : "BinnedLowRate";
}

MagMode adapt_mag_mode(double window_variance, double threshold) {
  return window_variance >= threshold ? MagMode::LosslessHighRate : MagMode::BinnedLowRate;
}

ExposureDecision tune_exposure(double noise_level, double target_noise, double downlink_budget_mbit,
                               const ExposureParams& current, double data_per_obs_mbit) {
  ExposureDecision out{current, false};
  if (noise_level <= target_noise) return out;

  auto fits = [&](double n) { return n * data_per_obs_mbit <= downlink_budget_mbit; };
  auto noise_at = [&](double n) { return noise_level * std::sqrt(current.n_stack / n); };

  double n = current.n_stack;
  double best_fit = fits(n) ? n : 0.0;
  // Noise falls monotonically and size grows, so stop at the first stack
  // that meets the target or the first that breaks the budget.
  for (int i = 0; i < 32; ++i) {
    n *= 2.0;
    if (!fits(n)) break;
    best_fit = n;
    if (noise_at(n) <= target_noise) {
      out.params.n_stack = n;
      return out;
    }
  }
  out.budget_limited = true;
  if (best_fit > 0.0) {
    out.params.n_stack = best_fit;
  } else {
    double m = current.n_stack;
    while (m > 1.0 && !fits(m)) m = std::max(1.0, std::floor(m / 2.0));
    out.params.n_stack = m;
  }
  return out;
}

}  // namespace ops::onboard
