#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ops/simcore/spacecraft.hpp"

namespace ops::simcore {

inline constexpr double kTritonRadiusKm = 1353.4;
inline constexpr double kTritonGm = 1427.6;  // km^3/s^2

struct EphemerisRow {
  double t = 0.0;
  Vec3 spacecraft{};
  Vec3 triton{};
  Vec3 neptune{};
};

/// Time-ordered table with linear interpolation (clamped at the ends).
class Ephemeris {
 public:
  explicit Ephemeris(std::vector<EphemerisRow> rows);

  const std::vector<EphemerisRow>& rows() const { return rows_; }
  double t_begin() const { return rows_.front().t; }
  double t_end() const { return rows_.back().t; }
  EphemerisRow at(double t) const;

  static Ephemeris parse_csv(const std::string& text);
  static Ephemeris load_csv(const std::filesystem::path& path);
  std::string to_csv() const;

 private:
  std::vector<EphemerisRow> rows_;
};

/// Unpowered hyperbolic pass of Triton (held at the origin) in the x-y plane,
/// periapsis on +x at t_closest.
Ephemeris hyperbolic_flyby(double closest_approach_km, double v_inf_km_s, double t_closest_s, double t_begin,
                           double t_end, double step_s, double gm = kTritonGm);

struct ViewConstraints {
  double max_range_km = std::numeric_limits<double>::infinity();
  double min_elevation_deg = -90.0;
  double body_radius_km = kTritonRadiusKm;
};

/// Range from a surface point (body-fixed axes aligned with the inertial frame).
double target_range_km(const EphemerisRow& row, double lat_deg, double lon_deg, double radius_km);
/// Elevation of the spacecraft above the local horizon of the surface point.
double target_elevation_deg(const EphemerisRow& row, double lat_deg, double lon_deg, double radius_km);

/// Maximal intervals where both constraints hold, ends refined by bisection
/// to well under a second.
std::vector<std::pair<double, double>> observation_windows(const Ephemeris& eph, double lat_deg, double lon_deg,
                                                           const ViewConstraints& c);

}  // namespace ops::simcore
