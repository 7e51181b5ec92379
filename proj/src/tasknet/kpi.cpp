#include <algorithm>

#include "ops/tasknet/tasknet.hpp"

namespace ops::tasknet {

double kpi_progress(const Kpi& kpi, double count) {
  const auto& pts = kpi.progress_points;
  if (pts.empty()) return 0.0;
  double pct;
  if (count <= pts.front().count) {
    pct = pts.front().percent;
  } else if (count >= pts.back().count) {
    pct = pts.back().percent;
  } else {
    auto hi = std::upper_bound(pts.begin(), pts.end(), count,
                               [](double c, const ProgressPoint& p) { return c < p.count; });
    auto lo = hi - 1;
    const double f = (count - lo->count) / (hi->count - lo->count);
    pct = lo->percent + f * (hi->percent - lo->percent);
  }
  return std::clamp(pct, 0.0, 100.0);
}

}  // namespace ops::tasknet
