#include "ops/simcore/ephemeris.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ops/common/error.hpp"
#include "ops/common/json_io.hpp"

namespace ops::simcore {
namespace {

constexpr const char* kHeader = "t_s,sc_x,sc_y,sc_z,tr_x,tr_y,tr_z,ne_x,ne_y,ne_z";

Vec3 lerp(const Vec3& a, const Vec3& b, double f) {
  return {a[0] + (b[0] - a[0]) * f, a[1] + (b[1] - a[1]) * f, a[2] + (b[2] - a[2]) * f};
}

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

struct Surface {
  Vec3 point;
  Vec3 normal;
};

Surface surface(const EphemerisRow& row, double lat_deg, double lon_deg, double radius_km) {
  const double lat = lat_deg * std::numbers::pi / 180.0, lon = lon_deg * std::numbers::pi / 180.0;
  const Vec3 n{std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
  return {{row.triton[0] + radius_km * n[0], row.triton[1] + radius_km * n[1], row.triton[2] + radius_km * n[2]}, n};
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace

Ephemeris::Ephemeris(std::vector<EphemerisRow> rows) : rows_(std::move(rows)) {
  if (rows_.size() < 2) throw DocumentError("ephemeris needs at least two rows");
  for (std::size_t i = 1; i < rows_.size(); ++i)
    if (!(rows_[i].t > rows_[i - 1].t)) throw DocumentError("ephemeris times must be strictly increasing");
}

EphemerisRow Ephemeris::at(double t) const {
  if (t <= rows_.front().t) return rows_.front();
  if (t >= rows_.back().t) return rows_.back();
  auto it = std::upper_bound(rows_.begin(), rows_.end(), t, [](double v, const EphemerisRow& r) { return v < r.t; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double f = (t - a.t) / (b.t - a.t);
  return {t, lerp(a.spacecraft, b.spacecraft, f), lerp(a.triton, b.triton, f), lerp(a.neptune, b.neptune, f)};
}

Ephemeris Ephemeris::parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != kHeader)
    throw DocumentError(std::string("ephemeris header must be ") + kHeader);
  std::vector<EphemerisRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::array<double, 10> v{};
    std::istringstream fields(line);
    std::string cell;
    std::size_t n = 0;
    while (std::getline(fields, cell, ',')) {
      if (n >= v.size()) throw DocumentError("ephemeris line " + std::to_string(lineno) + ": too many columns");
      try {
        std::size_t used = 0;
        v[n] = std::stod(trim(cell), &used);
      } catch (const std::exception&) {
        throw DocumentError("ephemeris line " + std::to_string(lineno) + ": bad number \"" + cell + "\"");
      }
      ++n;
    }
    if (n != v.size()) throw DocumentError("ephemeris line " + std::to_string(lineno) + ": expected 10 columns");
    rows.push_back({v[0], {v[1], v[2], v[3]}, {v[4], v[5], v[6]}, {v[7], v[8], v[9]}});
  }
  return Ephemeris(std::move(rows));
}

Ephemeris Ephemeris::load_csv(const std::filesystem::path& path) { return parse_csv(read_text_file(path)); }

std::string Ephemeris::to_csv() const {
  std::string out = std::string(kHeader) + "\n";
  auto num = [](double d) { return Json(d).dump(); };
  for (const auto& r : rows_) {
    out += num(r.t);
    for (const Vec3* v : {&r.spacecraft, &r.triton, &r.neptune})
      for (double c : *v) out += "," + num(c);
    out += "\n";
  }
  return out;
}

Ephemeris hyperbolic_flyby(double closest_approach_km, double v_inf_km_s, double t_closest_s, double t_begin,
                           double t_end, double step_s, double gm) {
  const double a = -gm / (v_inf_km_s * v_inf_km_s);
  const double e = 1.0 + closest_approach_km * v_inf_km_s * v_inf_km_s / gm;
  const double n = std::sqrt(gm / (-a * -a * -a));
  std::vector<EphemerisRow> rows;
  const Vec3 neptune{354759.0, 0.0, 0.0};  // Triton's mean orbital distance
  for (double t = t_begin; t <= t_end + 1e-9; t += step_s) {
    const double m = n * (t - t_closest_s);
    double h = std::asinh(m / e);
    for (int i = 0; i < 50; ++i) {
      const double f = e * std::sinh(h) - h - m;
      const double step = f / (e * std::cosh(h) - 1.0);
      h -= step;
      if (std::abs(step) < 1e-14) break;
    }
    const double x = a * (std::cosh(h) - e);
    const double y = -a * std::sqrt(e * e - 1.0) * std::sinh(h);
    rows.push_back({t, {x, y, 0.0}, {0.0, 0.0, 0.0}, neptune});
  }
  return Ephemeris(std::move(rows));
}

double target_range_km(const EphemerisRow& row, double lat_deg, double lon_deg, double radius_km) {
  const auto s = surface(row, lat_deg, lon_deg, radius_km);
  return norm({row.spacecraft[0] - s.point[0], row.spacecraft[1] - s.point[1], row.spacecraft[2] - s.point[2]});
}

double target_elevation_deg(const EphemerisRow& row, double lat_deg, double lon_deg, double radius_km) {
  const auto s = surface(row, lat_deg, lon_deg, radius_km);
  const Vec3 d{row.spacecraft[0] - s.point[0], row.spacecraft[1] - s.point[1], row.spacecraft[2] - s.point[2]};
  const double r = norm(d);
  if (r == 0.0) return 90.0;
  const double sin_el = (d[0] * s.normal[0] + d[1] * s.normal[1] + d[2] * s.normal[2]) / r;
  return std::asin(std::clamp(sin_el, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

std::vector<std::pair<double, double>> observation_windows(const Ephemeris& eph, double lat_deg, double lon_deg,
                                                           const ViewConstraints& c) {
  // Signed margin: non-negative exactly when both constraints hold.
  auto margin = [&](double t) {
    const auto row = eph.at(t);
    const double range_margin = c.max_range_km - target_range_km(row, lat_deg, lon_deg, c.body_radius_km);
    const double elev_margin = target_elevation_deg(row, lat_deg, lon_deg, c.body_radius_km) - c.min_elevation_deg;
    return std::min(range_margin, elev_margin);
  };
  auto refine = [&](double lo, double hi) {  // margin(lo) and margin(hi) differ in sign
    const bool lo_ok = margin(lo) >= 0;
    while (hi - lo > 1e-3) {
      const double mid = 0.5 * (lo + hi);
      ((margin(mid) >= 0) == lo_ok ? lo : hi) = mid;
    }
    return lo_ok ? lo : hi;  // last instant inside / first instant inside
  };

  // Scan at every table row and at most 10 s apart in between.
  std::vector<double> ts;
  const auto& rows = eph.rows();
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double a = rows[i].t, b = rows[i + 1].t;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / 10.0)));
    for (int k = 0; k < n; ++k) ts.push_back(a + (b - a) * k / n);
  }
  ts.push_back(rows.back().t);

  std::vector<std::pair<double, double>> out;
  bool inside = margin(ts.front()) >= 0;
  double start = ts.front();
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const bool now = margin(ts[i]) >= 0;
    if (now && !inside) start = refine(ts[i - 1], ts[i]);
    if (!now && inside) out.emplace_back(start, refine(ts[i - 1], ts[i]));
    inside = now;
  }
  if (inside) out.emplace_back(start, ts.back());
  return out;
}

}  // namespace ops::simcore
