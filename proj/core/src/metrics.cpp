#include "kropina/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kropina {

double discrete_frechet(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  const size_t na = a.size(), nb = b.size();
  if (na == 0 || nb == 0) return std::numeric_limits<double>::infinity();
  std::vector<double> prev(nb), cur(nb);
  for (size_t j = 0; j < nb; ++j) {
    const double d = (a[0] - b[j]).norm();
    prev[j] = j == 0 ? d : std::max(prev[j - 1], d);
  }
  for (size_t i = 1; i < na; ++i) {
    for (size_t j = 0; j < nb; ++j) {
      const double d = (a[i] - b[j]).norm();
      double reach;
      if (j == 0) {
        reach = prev[0];
      } else {
        reach = std::min({prev[j], prev[j - 1], cur[j - 1]});
      }
      cur[j] = std::max(reach, d);
    }
    std::swap(prev, cur);
  }
  return prev[nb - 1];
}

std::vector<Vec> resample_by_arclength(const std::vector<Vec>& pts, int m) {
  if (pts.size() < 2 || m < 2) return pts;
  std::vector<double> cum(pts.size(), 0.0);
  for (size_t i = 1; i < pts.size(); ++i) {
    cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
  }
  const double total = cum.back();
  std::vector<Vec> out;
  out.reserve(m);
  if (total == 0) {
    out.assign(m, pts.front());
    return out;
  }
  size_t seg = 0;
  for (int k = 0; k < m; ++k) {
    const double target = total * k / (m - 1);
    while (seg + 1 < cum.size() - 1 && cum[seg + 1] < target) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double th = len > 0 ? (target - cum[seg]) / len : 0.0;
    out.push_back(pts[seg] + th * (pts[seg + 1] - pts[seg]));
  }
  return out;
}

double trace_distance(const std::vector<Vec>& a, const std::vector<Vec>& b, int m) {
  return discrete_frechet(resample_by_arclength(a, m), resample_by_arclength(b, m));
}

double sup_distance(const Trajectory& a, const Trajectory& b) {
  if (a.samples.empty() || b.samples.empty()) {
    return std::numeric_limits<double>::infinity();
  }
  bool same_grid = a.samples.size() == b.samples.size();
  if (same_grid) {
    for (size_t i = 0; i < a.samples.size(); ++i) {
      if (std::abs(a.samples[i].t - b.samples[i].t) >
          1e-12 * std::max(1.0, std::abs(a.samples[i].t))) {
        same_grid = false;
        break;
      }
    }
  }
  double worst = 0.0;
  if (same_grid) {
    for (size_t i = 0; i < a.samples.size(); ++i) {
      worst = std::max(worst, (a.samples[i].x - b.samples[i].x).norm());
    }
    return worst;
  }

  // interpolate b at a's times over the common span
  const double lo = std::max(a.t_begin(), b.t_begin());
  const double hi = std::min(a.t_end(), b.t_end());
  size_t j = 0;
  for (const auto& smp : a.samples) {
    const double t = smp.t;
    if (t < lo || t > hi) continue;
    while (j + 1 < b.samples.size() && b.samples[j + 1].t < t) ++j;
    const auto& b0 = b.samples[j];
    const auto& b1 = b.samples[std::min(j + 1, b.samples.size() - 1)];
    const double span = b1.t - b0.t;
    const double th = span > 0 ? std::clamp((t - b0.t) / span, 0.0, 1.0) : 0.0;
    const Vec xb = b0.x + th * (b1.x - b0.x);
    worst = std::max(worst, (smp.x - xb).norm());
  }
  return worst;
}

}  // namespace kropina
