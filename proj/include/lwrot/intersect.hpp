#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace lwrot {

struct PlanarPoint {
  double x;
  double z;
};

/// A transversal crossing of two non-adjacent polyline segments, located at
/// parameters s_i < s_j of the curve.
struct SelfIntersection {
  double s_i;
  double s_j;
  PlanarPoint point;
};

namespace detail {

inline double cross(double ax, double az, double bx, double bz) {
  return ax * bz - az * bx;
}

}  // namespace detail

/// Sort-and-sweep over segment x-extents, then exact pairwise segment tests.
/// `s` gives the curve parameter of each vertex (same length as `pts`).
inline std::vector<SelfIntersection> polyline_self_intersections(
    std::span<const PlanarPoint> pts, std::span<const double> s,
    double tol = 1e-10) {
  std::vector<SelfIntersection> out;
  if (pts.size() < 4) return out;
  const std::size_t n_seg = pts.size() - 1;

  struct Box {
    double x_lo, x_hi, z_lo, z_hi;
  };
  std::vector<Box> boxes(n_seg);
  for (std::size_t i = 0; i < n_seg; ++i) {
    const PlanarPoint& p = pts[i];
    const PlanarPoint& q = pts[i + 1];
    boxes[i] = {std::min(p.x, q.x) - tol, std::max(p.x, q.x) + tol,
                std::min(p.z, q.z) - tol, std::max(p.z, q.z) + tol};
  }
  std::vector<std::size_t> order(n_seg);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return boxes[a].x_lo < boxes[b].x_lo ||
           (boxes[a].x_lo == boxes[b].x_lo && a < b);
  });

  for (std::size_t oi = 0; oi < n_seg; ++oi) {
    const std::size_t i = order[oi];
    for (std::size_t oj = oi + 1; oj < n_seg; ++oj) {
      const std::size_t j = order[oj];
      if (boxes[j].x_lo > boxes[i].x_hi) break;
      const std::size_t lo = std::min(i, j);
      const std::size_t hi = std::max(i, j);
      if (hi - lo < 2) continue;
      if (boxes[j].z_lo > boxes[i].z_hi || boxes[i].z_lo > boxes[j].z_hi) {
        continue;
      }
      const PlanarPoint& p = pts[lo];
      const double rx = pts[lo + 1].x - p.x, rz = pts[lo + 1].z - p.z;
      const PlanarPoint& q = pts[hi];
      const double wx = pts[hi + 1].x - q.x, wz = pts[hi + 1].z - q.z;
      const double denom = detail::cross(rx, rz, wx, wz);
      const double len = std::hypot(rx, rz) * std::hypot(wx, wz);
      if (std::abs(denom) <= 1e-14 * len) continue;  // parallel: not transversal
      const double qpx = q.x - p.x, qpz = q.z - p.z;
      const double t = detail::cross(qpx, qpz, wx, wz) / denom;
      const double u = detail::cross(qpx, qpz, rx, rz) / denom;
      // Half-open in the segment parameter so a crossing through a shared
      // vertex is reported once.
      if (t < 0.0 || t >= 1.0 || u < 0.0 || u >= 1.0) continue;
      SelfIntersection hit;
      hit.s_i = s[lo] + t * (s[lo + 1] - s[lo]);
      hit.s_j = s[hi] + u * (s[hi + 1] - s[hi]);
      hit.point = {p.x + t * rx, p.z + t * rz};
      out.push_back(hit);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const SelfIntersection& a, const SelfIntersection& b) {
              return a.s_i < b.s_i || (a.s_i == b.s_i && a.s_j < b.s_j);
            });
  return out;
}

}  // namespace lwrot
