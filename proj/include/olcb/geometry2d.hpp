#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "olcb/error.hpp"
#include "olcb/numeric.hpp"

namespace olcb {

using Vec2 = Eigen::Vector2d;

/// A convex polygon as a CCW vertex loop.
using Polygon = std::vector<Vec2>;

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline double polygon_area(const Polygon& poly) {
  double twice = 0.0;
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    twice += cross2(poly[i], poly[(i + 1) % m]);
  }
  return 0.5 * twice;
}

inline Vec2 polygon_centroid(const Polygon& poly) {
  double twice = 0.0;
  Vec2 acc = Vec2::Zero();
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % m];
    const double c = cross2(p, q);
    twice += c;
    acc += c * (p + q);
  }
  if (std::fabs(twice) < 1e-300) throw ValidationError("polygon_centroid: degenerate polygon");
  return acc / (3.0 * twice);
}

/// Monotone-chain convex hull, CCW. Collinear points on the hull boundary
/// are dropped.
inline Polygon convex_hull_2d(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) {
                          return (a - b).norm() < 1e-14;
                        }),
            pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return pts;
  std::vector<Vec2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross2(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 1e-14) --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross2(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 1e-14) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

/// Clips a convex polygon against the halfplane {y : n.y <= b}.
inline Polygon clip_halfplane(const Polygon& poly, const Vec2& n, double b) {
  Polygon out;
  const std::size_t m = poly.size();
  if (m == 0) return out;
  out.reserve(m + 2);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % m];
    const double dp = n.dot(p) - b;
    const double dq = n.dot(q) - b;
    if (dp <= 0.0) out.push_back(p);
    if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) {
      out.push_back(p + (dp / (dp - dq)) * (q - p));
    }
  }
  return out;
}

/// Length of the chord {y : e.y = tau} through a convex polygon, measured
/// along the line. Zero outside the projection range.
inline double chord_length(const Polygon& poly, const Vec2& e, double tau) {
  const std::size_t m = poly.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const Vec2 w(-e.y(), e.x());
  bool found = false;
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % m];
    const double dp = e.dot(p) - tau;
    const double dq = e.dot(q) - tau;
    if (dp == 0.0) {
      const double s = w.dot(p);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
      found = true;
    }
    if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) {
      const Vec2 x = p + (dp / (dp - dq)) * (q - p);
      const double s = w.dot(x);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
      found = true;
    }
  }
  return found ? std::max(0.0, hi - lo) : 0.0;
}

/// Vertical extent [t_lo, t_hi] of the polygon above the point xi on the
/// axis w, i.e. the chord {xi*w + t*u} in the (w,u) frame.
inline std::optional<std::pair<double, double>> chord_interval(const Polygon& poly, const Vec2& w,
                                                               const Vec2& u, double xi) {
  const std::size_t m = poly.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  bool found = false;
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % m];
    const double dp = w.dot(p) - xi;
    const double dq = w.dot(q) - xi;
    if (dp == 0.0) {
      const double t = u.dot(p);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
      found = true;
    }
    if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) {
      const Vec2 x = p + (dp / (dp - dq)) * (q - p);
      const double t = u.dot(x);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
      found = true;
    }
  }
  if (!found) return std::nullopt;
  return std::make_pair(lo, hi);
}

struct Halfplane {
  Vec2 normal;   // unit
  double offset;  // {y : normal.y <= offset}
};

/// Intersection of halfplanes with strictly positive offsets, via polar
/// duality: the region is the polar of the hull of normal/offset points.
/// Returns the CCW vertex polygon.
inline Polygon halfplane_intersection(const std::vector<Halfplane>& planes) {
  std::vector<Vec2> dual;
  dual.reserve(planes.size());
  for (const auto& hp : planes) {
    if (hp.offset <= 0.0) {
      throw OriginNotInterior("halfplane_intersection: nonpositive offset");
    }
    dual.push_back(hp.normal / hp.offset);
  }
  Polygon hull = convex_hull_2d(dual);
  if (hull.size() < 3) throw ValidationError("halfplane_intersection: unbounded or degenerate");
  Polygon out;
  out.reserve(hull.size());
  const std::size_t m = hull.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % m];
    // vertex v solves a.v = 1, b.v = 1
    const double det = cross2(a, b);
    if (std::fabs(det) < 1e-300) continue;
    out.push_back(Vec2(b.y() - a.y(), a.x() - b.x()) / det);
  }
  return convex_hull_2d(out);
}

/// Sum over vertices of the triangle (prev, v, next) areas. Subtracting it
/// from the polygon area gives a certified lower bound on the area of any
/// convex body touching every edge line from inside.
inline double vertex_cap_area(const Polygon& poly) {
  const std::size_t m = poly.size();
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& a = poly[(i + m - 1) % m];
    const Vec2& b = poly[i];
    const Vec2& c = poly[(i + 1) % m];
    total += 0.5 * std::fabs(cross2(b - a, c - a));
  }
  return total;
}

}  // namespace olcb
