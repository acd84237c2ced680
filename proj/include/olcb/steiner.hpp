#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <tuple>
#include <queue>
#include <random>
#include <vector>

#include "olcb/body.hpp"
#include "olcb/centroid.hpp"
#include "olcb/error.hpp"
#include "olcb/geometry2d.hpp"
#include "olcb/geometry3d.hpp"
#include "olcb/numeric.hpp"
#include "olcb/orlicz.hpp"

namespace olcb {

namespace detail {

// Boundary of a CCW convex polygon split into lower/upper chains over the
// axis xi = a.y, heights measured along b = rot90(a). Edges with xi
// increasing lie on the lower sheet.
struct ChainDecomposition {
  std::vector<double> xi;  // sorted unique breakpoints
  std::vector<double> lo, hi;
};

inline ChainDecomposition chain_decompose(const Polygon& poly, const Vec2& a) {
  const Vec2 b(-a.y(), a.x());
  const std::size_t m = poly.size();
  std::vector<std::pair<double, double>> lower, upper;  // (xi, t) polylines
  double scale = 0.0;
  for (const auto& v : poly) scale = std::max(scale, v.norm());
  const double tol = 1e-14 * std::max(1.0, scale);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % m];
    const double xp = a.dot(p), xq = a.dot(q);
    if (xq > xp + tol) {
      lower.emplace_back(xp, b.dot(p));
      lower.emplace_back(xq, b.dot(q));
    } else if (xq < xp - tol) {
      upper.emplace_back(xp, b.dot(p));
      upper.emplace_back(xq, b.dot(q));
    }
  }
  if (lower.empty() || upper.empty()) {
    throw ValidationError("chain_decompose: degenerate polygon");
  }
  // the boundary walk may start mid-chain; each chain is monotone in xi,
  // so sorting restores the polyline order
  std::sort(lower.begin(), lower.end());
  std::sort(upper.begin(), upper.end());
  lower.erase(std::unique(lower.begin(), lower.end(),
                          [&](auto& s, auto& t) { return std::fabs(s.first - t.first) <= tol; }),
              lower.end());
  upper.erase(std::unique(upper.begin(), upper.end(),
                          [&](auto& s, auto& t) { return std::fabs(s.first - t.first) <= tol; }),
              upper.end());

  ChainDecomposition out;
  out.xi.reserve(lower.size() + upper.size());
  for (const auto& [x, t] : lower) out.xi.push_back(x);
  for (const auto& [x, t] : upper) out.xi.push_back(x);
  std::sort(out.xi.begin(), out.xi.end());
  out.xi.erase(std::unique(out.xi.begin(), out.xi.end(),
                           [&](double s, double t) { return std::fabs(s - t) <= tol; }),
               out.xi.end());
  // clamp to the common span; extremes are shared endpoints of both chains
  const double xmin = std::max(lower.front().first, upper.front().first);
  const double xmax = std::min(lower.back().first, upper.back().first);
  out.xi.erase(std::remove_if(out.xi.begin(), out.xi.end(),
                              [&](double x) { return x < xmin - tol || x > xmax + tol; }),
               out.xi.end());
  if (out.xi.size() < 2) throw ValidationError("chain_decompose: empty span");
  out.xi.front() = xmin;
  out.xi.back() = xmax;

  auto interp = [](const std::vector<std::pair<double, double>>& chain, double x) {
    auto it = std::lower_bound(chain.begin(), chain.end(), x,
                               [](const auto& seg, double v) { return seg.first < v; });
    if (it == chain.begin()) return chain.front().second;
    if (it == chain.end()) return chain.back().second;
    const auto& [x1, t1] = *(it - 1);
    const auto& [x2, t2] = *it;
    if (x2 - x1 <= 0.0) return t1;
    const double w = (x - x1) / (x2 - x1);
    return t1 + w * (t2 - t1);
  };
  out.lo.resize(out.xi.size());
  out.hi.resize(out.xi.size());
  std::size_t pl = 0, pu = 0;
  for (std::size_t k = 0; k < out.xi.size(); ++k) {
    const double x = out.xi[k];
    // two-pointer walk; interp falls back to binary search on rare ties
    while (pl + 1 < lower.size() && lower[pl + 1].first < x) ++pl;
    while (pu + 1 < upper.size() && upper[pu + 1].first < x) ++pu;
    out.lo[k] = interp(lower, x);
    out.hi[k] = interp(upper, x);
    if (out.hi[k] < out.lo[k]) std::swap(out.hi[k], out.lo[k]);
  }
  return out;
}

/// Greedy concavity-preserving pruning of a concave height graph
/// (xi_k, s_k): drops breakpoints while the total removed area (both
/// sheets, hence 2x the graph triangles) stays within the budget.
/// Returns the removed area.
inline double prune_concave_graph(std::vector<double>& xi, std::vector<double>& s,
                                  double budget) {
  const std::size_t n = xi.size();
  if (n < 3 || budget <= 0.0) return 0.0;
  std::vector<int> prev(n), next(n), version(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    prev[i] = static_cast<int>(i) - 1;
    next[i] = static_cast<int>(i) + 1;
  }
  next[n - 1] = -1;
  auto tri_area2 = [&](int k) {
    const int p = prev[k], q = next[k];
    if (p < 0 || q < 0) return std::numeric_limits<double>::infinity();
    const double ax = xi[k] - xi[p], ay = s[k] - s[p];
    const double bx = xi[q] - xi[p], by = s[q] - s[p];
    return std::fabs(ax * by - ay * bx);  // = 2 * triangle = removed body area
  };
  using Entry = std::pair<double, std::pair<int, int>>;  // (area, (idx, version))
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    heap.push({tri_area2(static_cast<int>(i)), {static_cast<int>(i), 0}});
  }
  double removed = 0.0;
  while (!heap.empty()) {
    const auto [area, idx_ver] = heap.top();
    const auto [k, ver] = idx_ver;
    heap.pop();
    if (version[k] != ver || prev[k] < 0 || next[k] < 0) continue;
    if (std::fabs(area - tri_area2(k)) > 1e-18 + 1e-12 * area) {
      heap.push({tri_area2(k), {k, ++version[k]}});
      continue;
    }
    if (removed + area > budget) break;
    removed += area;
    const int p = prev[k], q = next[k];
    next[p] = q;
    prev[q] = p;
    version[k] = -1;
    if (prev[p] >= 0) heap.push({tri_area2(p), {p, ++version[p]}});
    if (next[q] >= 0) heap.push({tri_area2(q), {q, ++version[q]}});
  }
  std::vector<double> nxi, ns;
  nxi.reserve(n);
  ns.reserve(n);
  for (int k = 0; k >= 0; k = next[k]) {
    nxi.push_back(xi[k]);
    ns.push_back(s[k]);
  }
  xi.swap(nxi);
  s.swap(ns);
  return removed;
}

}  // namespace detail

inline void require_unit(const Vec& u) {
  if (std::fabs(u.norm() - 1.0) > kUnitNormTol) {
    throw DomainError("direction must be a unit vector (|norm - 1| <= 1e-12)");
  }
}

/// Half-chord length sigma(y') and chord midpoint height m(y') of a 2D
/// polytope over the scalar coordinate xi on the axis w = rot90(u).
inline std::pair<double, double> sigma_midline_2d(const Body& body, const Vec& u, double xi) {
  require_unit(u);
  const Vec2 uu(u[0], u[1]);
  const Vec2 w(-u[1], u[0]);
  const auto iv = chord_interval(body.polygon(), w, uu, xi);
  if (!iv) throw BoundaryPoint("sigma_midline_2d: xi outside the projection");
  return {0.5 * (iv->second - iv->first), 0.5 * (iv->second + iv->first)};
}

struct SteinerResult {
  Body body;
  double pruned_area = 0.0;  // area removed by sigma simplification
};

/// Steiner symmetrization S_u K for 2D polytopes: every chord parallel to
/// u is recentered on u-perp. Exact up to the (accounted) pruning budget.
inline SteinerResult steiner_symmetrize_2d(const Body& body, const Vec& u,
                                           double prune_budget = 0.0) {
  require_unit(u);
  if (body.dim() != 2) throw DimensionUnsupported("steiner_symmetrize_2d: need n = 2");
  const Polygon poly = body.polygon();
  const Vec2 w(-u[1], u[0]);
  // decompose over xi = w.y with heights along rot90(w) = -u, then negate
  detail::ChainDecomposition cd = detail::chain_decompose(poly, w);
  const std::size_t m = cd.xi.size();
  std::vector<double> sigma(m);
  for (std::size_t k = 0; k < m; ++k) {
    sigma[k] = std::max(0.0, 0.5 * (cd.hi[k] - cd.lo[k]));
  }
  double pruned = 0.0;
  if (prune_budget > 0.0) {
    pruned = detail::prune_concave_graph(cd.xi, sigma, prune_budget);
  }
  const std::size_t mm = cd.xi.size();
  Mat verts(2 * mm, 2);
  int count = 0;
  const Vec2 uu(u[0], u[1]);
  for (std::size_t k = 0; k < mm; ++k) {
    const Vec2 p = cd.xi[k] * w + sigma[k] * uu;
    verts(count, 0) = p.x();
    verts(count, 1) = p.y();
    ++count;
  }
  for (std::size_t k = mm; k-- > 0;) {
    if (sigma[k] == 0.0) continue;  // endpoints with zero chord already added
    const Vec2 p = cd.xi[k] * w - sigma[k] * uu;
    verts(count, 0) = p.x();
    verts(count, 1) = p.y();
    ++count;
  }
  return {Body::polytope(verts.topRows(count)), pruned};
}

/// 3D Steiner symmetrization: K_u from the projected face structure,
/// sigma as half the gap between the upper and lower face envelopes,
/// evaluated on every envelope breakpoint candidate.
inline SteinerResult steiner_symmetrize_3d(const Body& body, const Vec& u) {
  require_unit(u);
  if (body.dim() != 3) throw DimensionUnsupported("steiner_symmetrize_3d: need n = 3");
  const Polyhedron& poly = body.polyhedron3();
  const Vec3 uu(u[0], u[1], u[2]);
  const Vec3 t1 = uu.unitOrthogonal();
  const Vec3 t2 = uu.cross(t1);

  const Mat& normals = body.halfspace_normals();
  const Vec& offsets = body.halfspace_offsets();
  auto chord = [&](const Vec2& yp) -> std::optional<std::pair<double, double>> {
    const Vec3 base = yp.x() * t1 + yp.y() * t2;
    double thi = std::numeric_limits<double>::infinity();
    double tlo = -thi;
    for (int i = 0; i < offsets.size(); ++i) {
      const Vec3 a(normals(i, 0), normals(i, 1), normals(i, 2));
      const double au = a.dot(uu);
      const double rest = offsets[i] - a.dot(base);
      if (au > 1e-12) {
        thi = std::min(thi, rest / au);
      } else if (au < -1e-12) {
        tlo = std::max(tlo, rest / au);
      } else if (rest < -1e-10) {
        return std::nullopt;  // outside a u-parallel facet
      }
    }
    if (!(thi >= tlo - 1e-10)) return std::nullopt;
    return std::make_pair(tlo, thi);
  };

  // candidate breakpoints: projected vertices + crossings of projected edges
  std::vector<Vec2> candidates;
  for (const auto& v : poly.verts) candidates.emplace_back(t1.dot(v), t2.dot(v));
  const auto edges = poly.edges();
  std::vector<std::pair<Vec2, Vec2>> proj_edges;
  proj_edges.reserve(edges.size());
  for (const auto& [i, j] : edges) {
    proj_edges.emplace_back(Vec2(t1.dot(poly.verts[i]), t2.dot(poly.verts[i])),
                            Vec2(t1.dot(poly.verts[j]), t2.dot(poly.verts[j])));
  }
  for (std::size_t a = 0; a < proj_edges.size(); ++a) {
    for (std::size_t b = a + 1; b < proj_edges.size(); ++b) {
      const Vec2 p = proj_edges[a].first, r = proj_edges[a].second - proj_edges[a].first;
      const Vec2 q = proj_edges[b].first, s = proj_edges[b].second - proj_edges[b].first;
      const double den = cross2(r, s);
      if (std::fabs(den) < 1e-14) continue;
      const double tt = cross2(q - p, s) / den;
      const double ss = cross2(q - p, r) / den;
      if (tt < -1e-12 || tt > 1.0 + 1e-12 || ss < -1e-12 || ss > 1.0 + 1e-12) continue;
      candidates.push_back(p + tt * r);
    }
  }

  std::vector<Vec3> out_pts;
  out_pts.reserve(2 * candidates.size());
  for (const auto& yp : candidates) {
    const auto iv = chord(yp);
    if (!iv) continue;
    const double sigma = std::max(0.0, 0.5 * (iv->second - iv->first));
    const Vec3 base = yp.x() * t1 + yp.y() * t2;
    out_pts.push_back(base + sigma * uu);
    if (sigma > 0.0) out_pts.push_back(base - sigma * uu);
  }
  Mat verts(out_pts.size(), 3);
  for (std::size_t i = 0; i < out_pts.size(); ++i) verts.row(i) = out_pts[i];
  return {Body::polytope(verts), 0.0};
}

inline SteinerResult steiner_symmetrize(const Body& body, const Vec& u,
                                        double prune_budget = 0.0) {
  require_unit(u);
  if (body.kind() == BodyKind::Ball) return {body, 0.0};  // fixed point
  if (body.kind() == BodyKind::Ellipsoid) {
    // chords parallel to u recenter under the volume-preserving shear
    // A = I - u u' + u (u'Q)/(u'Qu), Q = M^{-1}; S_u E = A E
    const Mat q = body.ellipsoid_shape().inverse();
    const Vec qu = q * u;
    const Mat a = Mat::Identity(body.dim(), body.dim()) - u * u.transpose() +
                  u * (qu.transpose() / u.dot(qu));
    return {Body::ellipsoid(a * body.ellipsoid_shape() * a.transpose()), 0.0};
  }
  if (body.dim() == 2) return steiner_symmetrize_2d(body, u, prune_budget);
  if (body.dim() == 3) return steiner_symmetrize_3d(body, u);
  throw DimensionUnsupported("steiner_symmetrize: n in {2,3} only");
}

struct GraphFunctionsResult {
  double overgraph = 0.0;   // g_u(y')
  double undergraph = 0.0;  // f_u(y')
  Vec minimizer_g;          // x'_1 attaining g via the support formula
  Vec minimizer_f;          // x'_2
};

namespace detail {

// min over xi of max_j(intercept_j + slope_j * xi), exact for the convex
// upper envelope of lines: the optimum equals the best crossing value of
// an opposite-slope pair.
inline std::pair<double, double> min_upper_envelope(const std::vector<double>& slope,
                                                    const std::vector<double>& intercept) {
  const std::size_t n = slope.size();
  double best = -std::numeric_limits<double>::infinity();
  double best_xi = 0.0;
  bool has_nonneg = false, has_nonpos = false;
  for (std::size_t j = 0; j < n; ++j) {
    if (slope[j] >= 0) has_nonneg = true;
    if (slope[j] <= 0) has_nonpos = true;
  }
  if (!has_nonneg || !has_nonpos) {
    throw ValidationError("min_upper_envelope: unbounded below");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (slope[j] == 0.0 && intercept[j] > best) {
      best = intercept[j];
      best_xi = 0.0;
    }
    for (std::size_t k = j + 1; k < n; ++k) {
      if (!(slope[j] < 0.0 && slope[k] > 0.0) && !(slope[k] < 0.0 && slope[j] > 0.0)) continue;
      const double xi = (intercept[k] - intercept[j]) / (slope[j] - slope[k]);
      const double val = intercept[j] + slope[j] * xi;
      if (val > best) {
        best = val;
        best_xi = xi;
      }
    }
  }
  return {best, best_xi};
}

}  // namespace detail

/// Overgraph/undergraph at y' (a point of u-perp, given as an n-vector
/// orthogonal to u), computed two ways: by direct chord intersection and
/// by the support-function minimization
///   g_u(y') = min_{x' in u-perp} h(K, x'+u) - x'.y'.
/// The two routes must agree within 1e-6; minimizers are returned and, for
/// |y'| <= r_K/2, checked against the bound |x'_i| <= 2 R_K / r_K.
inline GraphFunctionsResult graph_functions(const Body& body, const Vec& u, const Vec& yp) {
  require_unit(u);
  if (std::fabs(u.dot(yp)) > 1e-9) {
    throw DomainError("graph_functions: y' must lie in u-perp");
  }
  const int n = body.dim();

  // direct chord: K cap { y' + t u }
  double g_direct, f_direct;
  if (body.kind() == BodyKind::Ball) {
    const double r = body.ball_radius();
    const double d2 = r * r - yp.squaredNorm();
    if (d2 <= 1e-12 * r * r) throw BoundaryPoint("graph_functions: y' on the boundary of K_u");
    g_direct = f_direct = std::sqrt(d2);
  } else if (body.kind() == BodyKind::Ellipsoid) {
    const Mat minv = body.ellipsoid_shape().inverse();
    const double a = u.dot(minv * u);
    const double b = u.dot(minv * yp);
    const double c = yp.dot(minv * yp) - 1.0;
    const double disc = b * b - a * c;
    if (disc <= 1e-14) throw BoundaryPoint("graph_functions: y' on the boundary of K_u");
    g_direct = (-b + std::sqrt(disc)) / a;
    f_direct = (b + std::sqrt(disc)) / a;
  } else {
    const Mat& normals = body.halfspace_normals();
    const Vec& offsets = body.halfspace_offsets();
    double thi = std::numeric_limits<double>::infinity();
    double tlo = -thi;
    for (int i = 0; i < offsets.size(); ++i) {
      const double au = normals.row(i).dot(u);
      const double rest = offsets[i] - normals.row(i).dot(yp);
      if (au > 1e-12) {
        thi = std::min(thi, rest / au);
      } else if (au < -1e-12) {
        tlo = std::max(tlo, rest / au);
      } else if (rest < 1e-10) {
        throw BoundaryPoint("graph_functions: y' outside the relative interior of K_u");
      }
    }
    if (!(thi - tlo > 1e-10)) {
      throw BoundaryPoint("graph_functions: y' outside the relative interior of K_u");
    }
    g_direct = thi;
    f_direct = -tlo;
  }

  // support-function minimization route
  GraphFunctionsResult out;
  out.overgraph = g_direct;
  out.undergraph = f_direct;
  const auto [r_k, big_r] = body.inradius_outradius();

  auto minimize = [&](double sign_u) -> std::pair<double, Vec> {
    // objective over x' in u-perp: h(K, x' + sign_u * u) - x'.y'
    if (body.kind() == BodyKind::SupportSampled) {
      throw DimensionUnsupported("graph_functions: sampled bodies are not supported");
    }
    if (body.kind() == BodyKind::Polytope) {
      const Mat& verts = body.vertices();
      if (n == 2) {
        const Vec2 w(-u[1], u[0]);
        std::vector<double> slope(verts.rows()), intercept(verts.rows());
        const double eta = w[0] * yp[0] + w[1] * yp[1];
        for (int j = 0; j < verts.rows(); ++j) {
          const Vec2 v(verts(j, 0), verts(j, 1));
          slope[j] = v.dot(w) - eta;
          intercept[j] = sign_u * (v.x() * u[0] + v.y() * u[1]);
        }
        auto [val, xi] = detail::min_upper_envelope(slope, intercept);
        Vec x1(2);
        x1 << xi * w[0], xi * w[1];
        return {val, x1};
      }
      // n == 3: exact 2-variable LP by vertex enumeration of the epigraph
      const Vec3 uu(u[0], u[1], u[2]);
      const Vec3 t1 = uu.unitOrthogonal();
      const Vec3 t2 = uu.cross(t1);
      const int vn = static_cast<int>(verts.rows());
      std::vector<Eigen::Vector2d> grad(vn);
      std::vector<double> cst(vn);
      const Eigen::Vector2d ypp(t1.dot(Vec3(yp[0], yp[1], yp[2])),
                                t2.dot(Vec3(yp[0], yp[1], yp[2])));
      for (int j = 0; j < vn; ++j) {
        const Vec3 v(verts(j, 0), verts(j, 1), verts(j, 2));
        grad[j] = Eigen::Vector2d(v.dot(t1) - ypp.x(), v.dot(t2) - ypp.y());
        cst[j] = sign_u * v.dot(uu);
      }
      // objective F(z) = max_j cst_j + grad_j . z ; enumerate candidate
      // vertices from constraint pairs/triples
      double best_val = std::numeric_limits<double>::infinity();
      Eigen::Vector2d best_z(0, 0);
      auto consider = [&](const Eigen::Vector2d& z) {
        double val = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < vn; ++j) val = std::max(val, cst[j] + grad[j].dot(z));
        if (val < best_val) {
          best_val = val;
          best_z = z;
        }
      };
      consider(Eigen::Vector2d(0, 0));
      for (int j = 0; j < vn; ++j) {
        for (int k = j + 1; k < vn; ++k) {
          for (int l = k + 1; l < vn; ++l) {
            // stationary point of max(j,k,l): solve the 3x3 equal-value system
            Eigen::Matrix2d A;
            A.row(0) = (grad[j] - grad[k]).transpose();
            A.row(1) = (grad[j] - grad[l]).transpose();
            Eigen::Vector2d rhs(cst[k] - cst[j], cst[l] - cst[j]);
            const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
            if (std::fabs(det) < 1e-13) continue;
            consider(A.inverse() * rhs);
          }
        }
      }
      Vec x1(3);
      const Vec3 zz = best_z.x() * t1 + best_z.y() * t2;
      x1 << zz.x(), zz.y(), zz.z();
      return {best_val, x1};
    }
    // smooth bodies: golden-section over scalar xi (2D) or cyclic descent (3D)
    auto objective = [&](const Vec& xp) { return body.support(xp + sign_u * u) - xp.dot(yp); };
    if (n == 2) {
      const Vec2 w(-u[1], u[0]);
      auto obj1 = [&](double xi) {
        Vec xp(2);
        xp << xi * w[0], xi * w[1];
        return objective(xp);
      };
      double lo = -8.0 * big_r / r_k, hi = 8.0 * big_r / r_k;
      const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
      double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
      for (int it = 0; it < 200; ++it) {
        if (obj1(c) < obj1(d)) {
          hi = d;
        } else {
          lo = c;
        }
        c = hi - gr * (hi - lo);
        d = lo + gr * (hi - lo);
        if (hi - lo < 1e-12) break;
      }
      const double xi = 0.5 * (lo + hi);
      Vec x1(2);
      x1 << xi * w[0], xi * w[1];
      return {obj1(xi), x1};
    }
    const Vec3 uu(u[0], u[1], u[2]);
    const Vec3 t1 = uu.unitOrthogonal();
    const Vec3 t2 = uu.cross(t1);
    Eigen::Vector2d z(0, 0);
    const double span = 8.0 * big_r / r_k;
    auto obj2 = [&](const Eigen::Vector2d& zz) {
      const Vec3 xp3 = zz.x() * t1 + zz.y() * t2;
      Vec xp(3);
      xp << xp3.x(), xp3.y(), xp3.z();
      return objective(xp);
    };
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int round = 0; round < 60; ++round) {
      for (int axis = 0; axis < 2; ++axis) {
        double lo = z[axis] - span, hi = z[axis] + span;
        double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
        for (int it = 0; it < 90; ++it) {
          Eigen::Vector2d zc = z, zd = z;
          zc[axis] = c;
          zd[axis] = d;
          if (obj2(zc) < obj2(zd)) {
            hi = d;
          } else {
            lo = c;
          }
          c = hi - gr * (hi - lo);
          d = lo + gr * (hi - lo);
          if (hi - lo < 1e-13) break;
        }
        z[axis] = 0.5 * (lo + hi);
      }
    }
    const Vec3 xp3 = z.x() * t1 + z.y() * t2;
    Vec x1(3);
    x1 << xp3.x(), xp3.y(), xp3.z();
    return {obj2(z), x1};
  };

  auto [g_min, x1] = minimize(+1.0);
  auto [f_min, x2] = minimize(-1.0);
  out.minimizer_g = x1;
  out.minimizer_f = x2;

  const double scale = std::max(1.0, std::max(std::fabs(g_direct), std::fabs(f_direct)));
  if (std::fabs(g_min - g_direct) > 1e-6 * scale || std::fabs(f_min - f_direct) > 1e-6 * scale) {
    throw Error("graph_functions: chord and support-minimization routes disagree");
  }
  if (yp.norm() <= 0.5 * r_k) {
    const double bound = 2.0 * big_r / r_k + 1e-6;
    if (x1.norm() > bound || x2.norm() > bound) {
      throw Error("graph_functions: minimizer escapes the 2R/r bound");
    }
  }
  return out;
}

struct MapsCheckReport {
  double chi2_s = 0.0;
  double p_value_s = 0.0;
  double chi2_t = 0.0;
  double p_value_t = 0.0;
  double t_roundtrip_max = 0.0;  // max |T(T(y)) - y|
  int bins = 0;
  std::size_t samples = 0;
  bool pass(double alpha = 0.01) const { return p_value_s > alpha && p_value_t > alpha; }
};

namespace detail {

// two-sample chi-square over shared spatial bins; sparse bins are pooled
inline std::pair<double, double> chi_square_two_sample(const std::vector<double>& n1,
                                                       const std::vector<double>& n2) {
  const double total1 = std::accumulate(n1.begin(), n1.end(), 0.0);
  const double total2 = std::accumulate(n2.begin(), n2.end(), 0.0);
  const double k1 = std::sqrt(total2 / total1);
  const double k2 = std::sqrt(total1 / total2);
  double chi2 = 0.0;
  int used = 0;
  double pool1 = 0.0, pool2 = 0.0;
  auto add = [&](double a, double b) {
    if (a + b <= 0.0) return;
    const double d = k1 * a - k2 * b;
    chi2 += d * d / (a + b);
    ++used;
  };
  for (std::size_t i = 0; i < n1.size(); ++i) {
    if (n1[i] + n2[i] < 10.0) {
      pool1 += n1[i];
      pool2 += n2[i];
    } else {
      add(n1[i], n2[i]);
    }
  }
  add(pool1, pool2);
  const int dof = std::max(1, used - 1);
  return {chi2, chi_square_sf(chi2, dof)};
}

inline std::vector<double> bin_points(const std::vector<Vec>& pts, const Vec& lo, const Vec& hi,
                                      int per_axis) {
  const int n = static_cast<int>(lo.size());
  int total = 1;
  for (int i = 0; i < n; ++i) total *= per_axis;
  std::vector<double> counts(total, 0.0);
  for (const auto& p : pts) {
    int idx = 0;
    for (int i = 0; i < n; ++i) {
      const double f = (p[i] - lo[i]) / (hi[i] - lo[i]);
      int b = static_cast<int>(f * per_axis);
      b = std::clamp(b, 0, per_axis - 1);
      idx = idx * per_axis + b;
    }
    counts[idx] += 1.0;
  }
  return counts;
}

}  // namespace detail

/// Empirical check that the chord maps preserve measure: S pushes mu^K forward to
/// mu^{S_u K} and T preserves mu^K; T is an exact involution.
inline MapsCheckReport maps_S_T_check(const Body& body, const Vec& u, std::size_t sample_count,
                                      std::uint64_t seed = 7) {
  require_unit(u);
  if (body.kind() != BodyKind::Polytope || (body.dim() != 2 && body.dim() != 3)) {
    throw DimensionUnsupported("maps_S_T_check: need a 2D or 3D polytope");
  }
  const int n = body.dim();
  const Body sk = steiner_symmetrize(body, u).body;

  auto decompose = [&](const Vec& y) {
    const double t_full = u.dot(y);
    const Vec yp = y - t_full * u;
    // chord of K through y' via the halfspace structure
    const Mat& normals = body.halfspace_normals();
    const Vec& offsets = body.halfspace_offsets();
    double thi = std::numeric_limits<double>::infinity();
    double tlo = -thi;
    for (int i = 0; i < offsets.size(); ++i) {
      const double au = normals.row(i).dot(u);
      const double rest = offsets[i] - normals.row(i).dot(yp);
      if (au > 1e-12) {
        thi = std::min(thi, rest / au);
      } else if (au < -1e-12) {
        tlo = std::max(tlo, rest / au);
      }
    }
    const double mid = 0.5 * (thi + tlo);
    return std::make_tuple(yp, mid, t_full - mid);
  };

  std::mt19937_64 rng(seed);
  std::vector<Vec> s_mapped(sample_count), s_direct(sample_count);
  std::vector<Vec> t_mapped(sample_count), t_direct(sample_count);
  double roundtrip = 0.0;
  for (std::size_t i = 0; i < sample_count; ++i) {
    const Vec y = body.sample(rng);
    const auto [yp, mid, t] = decompose(y);
    s_mapped[i] = yp + t * u;
    const Vec ty = yp + (mid - t) * u;
    t_mapped[i] = ty;
    const auto [yp2, mid2, t2] = decompose(ty);
    const Vec tty = yp2 + (mid2 - t2) * u;
    roundtrip = std::max(roundtrip, (tty - y).norm());
    s_direct[i] = sk.sample(rng);
    t_direct[i] = body.sample(rng);
  }

  const int per_axis = n == 2 ? 10 : 4;  // 100 bins in 2D, 64 in 3D
  const auto [rs, big_rs] = sk.inradius_outradius();
  const auto [rk, big_rk] = body.inradius_outradius();
  Vec lo_s = Vec::Constant(n, -big_rs), hi_s = Vec::Constant(n, big_rs);
  Vec lo_k = Vec::Constant(n, -big_rk), hi_k = Vec::Constant(n, big_rk);

  MapsCheckReport rep;
  rep.samples = sample_count;
  rep.bins = 1;
  for (int i = 0; i < n; ++i) rep.bins *= per_axis;
  auto [c1, p1] = detail::chi_square_two_sample(
      detail::bin_points(s_mapped, lo_s, hi_s, per_axis),
      detail::bin_points(s_direct, lo_s, hi_s, per_axis));
  rep.chi2_s = c1;
  rep.p_value_s = p1;
  auto [c2, p2] = detail::chi_square_two_sample(
      detail::bin_points(t_mapped, lo_k, hi_k, per_axis),
      detail::bin_points(t_direct, lo_k, hi_k, per_axis));
  rep.chi2_t = c2;
  rep.p_value_t = p2;
  rep.t_roundtrip_max = roundtrip;
  return rep;
}

struct SteinerInequalityResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs; must be >= 0
};

/// Steiner support inequality: h(Gamma(S_u K), x'_1/2 + x'_2/2 + u)
///              <= h(Gamma K, x'_1 + u)/2 + h(Gamma K, x'_2 - u)/2.
inline SteinerInequalityResult steiner_support_inequality_check(
    const Body& body, const Vec& u, const Vec& x1p, const Vec& x2p, const OrliczFunction& phi,
    const WeightFunction& omega, const CentroidOptions& opts = {}) {
  require_unit(u);
  if (std::fabs(u.dot(x1p)) > 1e-9 || std::fabs(u.dot(x2p)) > 1e-9) {
    throw DomainError("steiner_support_inequality_check: x'_1, x'_2 must lie in u-perp");
  }
  const Body sk = steiner_symmetrize(body, u).body;
  SteinerInequalityResult out;
  out.lhs = centroid_support(sk, phi, omega, 0.5 * x1p + 0.5 * x2p + u, opts);
  const double h1 = centroid_support(body, phi, omega, x1p + u, opts);
  const double h2 = centroid_support(body, phi, omega, x2p - u, opts);
  out.rhs = 0.5 * h1 + 0.5 * h2;
  out.slack = out.rhs - out.lhs;
  return out;
}

struct InclusionCheckResult {
  double max_violation = 0.0;   // max over directions of h(Gamma(S_u K)) - h(S_u(outer))
  double eps_grid = 0.0;        // solver-tolerance part of the contract
  double detection_limit = 0.0; // how much of a true violation the outer bracket could hide
  double gamma_sk_volume_outer = 0.0;
  double gamma_k_volume_outer = 0.0;
  double gamma_sk_volume_inner = 0.0;
  double gamma_k_volume_inner = 0.0;
};

/// Symmetrization inclusion: Gamma(S_u K) inside S_u(Gamma K), checked through
/// the grid outer polytope of Gamma K (a superset, so the test is
/// one-sided up to solver tolerance).
inline InclusionCheckResult symmetrization_inclusion_check(const Body& body, const Vec& u,
                                                    const OrliczFunction& phi,
                                                    const WeightFunction& omega,
                                                    const Mat& test_dirs,
                                                    const CentroidOptions& opts = {}) {
  require_unit(u);
  if (body.dim() != 2) {
    throw DimensionUnsupported("symmetrization_inclusion_check: implemented for n = 2");
  }
  const Body sk = steiner_symmetrize(body, u).body;
  const CentroidBody gamma_k(body, phi, omega, opts);
  const CentroidBody gamma_sk(sk, phi, omega, opts);

  const Body outer_gamma_k_poly = Body::polytope(
      [&] {
        const Polygon p = gamma_k.outer().polygon();
        Mat v(p.size(), 2);
        for (std::size_t i = 0; i < p.size(); ++i) {
          v(i, 0) = p[i].x();
          v(i, 1) = p[i].y();
        }
        return v;
      }());
  const Body su_outer = steiner_symmetrize(outer_gamma_k_poly, u).body;

  InclusionCheckResult out;
  const auto [rg, big_rg] = gamma_k.outer().inradius_outradius();
  for (int i = 0; i < test_dirs.rows(); ++i) {
    const Vec v = test_dirs.row(i).transpose();
    const double lhs = centroid_support(sk, phi, omega, v, opts);
    const double rhs = su_outer.support(v);
    out.max_violation = std::max(out.max_violation, lhs - rhs);
    // how far the outer polytope can exceed the true support of Gamma K
    double h_lb = 0.0;
    for (int j = 0; j < gamma_k.grid_size(); ++j) {
      const double cosang = gamma_k.directions().row(j).dot(v);
      if (cosang <= 0.0) continue;
      const double hj = gamma_k.supports()[j];
      const double tangential = std::sqrt(std::max(big_rg * big_rg - hj * hj, 0.0));
      h_lb = std::max(h_lb, hj * cosang - tangential * std::sqrt(std::max(1.0 - cosang * cosang, 0.0)));
    }
    const double h_out = gamma_k.outer().support(v);
    out.detection_limit = std::max(out.detection_limit, h_out - h_lb);
  }
  out.eps_grid = 2.0 * (gamma_k.support_uncertainty() + gamma_sk.support_uncertainty()) + 1e-8;

  // bracketed volume comparison |Gamma(S_u K)| <= |Gamma K|
  std::vector<double> dk(gamma_k.grid_size()), dsk(gamma_sk.grid_size());
  for (int i = 0; i < gamma_k.grid_size(); ++i) {
    dk[i] = std::max(gamma_k.reports()[i].lambda_uncertainty, 1e-12);
  }
  for (int i = 0; i < gamma_sk.grid_size(); ++i) {
    dsk[i] = std::max(gamma_sk.reports()[i].lambda_uncertainty, 1e-12);
  }
  const auto [ik, ok] = detail::support_volume_bracket_2d(gamma_k.directions(),
                                                          gamma_k.supports(), dk);
  const auto [isk, osk] = detail::support_volume_bracket_2d(gamma_sk.directions(),
                                                            gamma_sk.supports(), dsk);
  out.gamma_k_volume_inner = ik;
  out.gamma_k_volume_outer = ok;
  out.gamma_sk_volume_inner = isk;
  out.gamma_sk_volume_outer = osk;
  return out;
}

struct TraceStep {
  int step = 0;
  Vec direction;
  double volume = 0.0;         // exact volume after the step (post-pruning)
  double ball_distance = 0.0;  // max over grid |h(u) - r|, r = (|K|/w_n)^(1/n)
  int vertex_count = 0;
  double pruned_area = 0.0;       // area removed by simplification this step
  double accounted_drift = 0.0;   // |vol + cumulative pruned - vol_0| / vol_0
};

struct SymmetrizationTrace {
  double initial_volume = 0.0;
  double ball_radius = 0.0;  // radius of the volume-matched ball
  std::vector<TraceStep> steps;
  double max_accounted_drift = 0.0;
};

struct ScheduleOptions {
  int ball_distance_grid = 256;
  double prune_budget = 1e-9;  // area error allowed per step
  std::uint64_t seed = 1;
};

/// Deterministic direction schedule: coordinate axes first, then random
/// rational multiples of pi. Consecutive repeats are jittered by 1e-3 rad.
inline std::vector<Vec> direction_schedule(int dim, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> denom(5, 64);
  std::vector<Vec> dirs;
  dirs.reserve(count);
  for (int i = 0; i < count; ++i) {
    Vec u(dim);
    if (i < 2 * dim) {
      u.setZero();
      u[i % dim] = 1.0;
    } else if (dim == 2) {
      const int q = denom(rng);
      std::uniform_int_distribution<int> numer(1, q - 1);
      const double th = kPi * numer(rng) / q;
      u << std::cos(th), std::sin(th);
    } else {
      const int q1 = denom(rng), q2 = denom(rng);
      std::uniform_int_distribution<int> n1(1, q1 - 1), n2(1, 2 * q2 - 1);
      const double th = kPi * n1(rng) / q1;
      const double ph = kPi * n2(rng) / q2;
      u << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
    }
    if (!dirs.empty() && std::fabs(std::fabs(dirs.back().dot(u)) - 1.0) < 1e-9) {
      // jitter a consecutive repeat by 1e-3 radians
      Vec t = dim == 2 ? Vec(Vec2(-u[1], u[0])) : Vec(Vec3(u[0], u[1], u[2]).unitOrthogonal());
      u = (u * std::cos(1e-3) + t * std::sin(1e-3)).normalized();
    }
    dirs.push_back(u);
  }
  return dirs;
}

/// Iterated symmetrization along a schedule, recording volume, distance to
/// the volume-matched ball, and the pruning account. `per_step` (optional)
/// receives each intermediate body.
inline SymmetrizationTrace symmetrization_schedule(
    const Body& body, int step_count, const ScheduleOptions& opts = {},
    const std::function<void(int, const Body&)>& per_step = nullptr) {
  if (body.dim() != 2 && body.dim() != 3) {
    throw DimensionUnsupported("symmetrization_schedule: n in {2,3} only");
  }
  SymmetrizationTrace trace;
  const double vol0 = body.volume_exact();
  trace.initial_volume = vol0;
  trace.ball_radius = std::pow(vol0 / unit_ball_volume(body.dim()), 1.0 / body.dim());
  const Mat grid = body.dim() == 2 ? uniform_circle_grid(opts.ball_distance_grid)
                                   : fibonacci_sphere_grid(opts.ball_distance_grid);

  Body current = body;
  double cumulative_pruned = 0.0;
  const auto dirs = direction_schedule(body.dim(), step_count, opts.seed);
  for (int i = 0; i < step_count; ++i) {
    SteinerResult res = steiner_symmetrize(current, dirs[i], opts.prune_budget);
    current = res.body;
    cumulative_pruned += res.pruned_area;
    TraceStep st;
    st.step = i + 1;
    st.direction = dirs[i];
    st.volume = current.volume_exact();
    st.vertex_count = static_cast<int>(current.vertices().rows());
    st.pruned_area = res.pruned_area;
    st.accounted_drift = std::fabs(st.volume + cumulative_pruned - vol0) / vol0;
    double dist = 0.0;
    for (int g = 0; g < grid.rows(); ++g) {
      dist = std::max(dist,
                      std::fabs(current.support(grid.row(g).transpose()) - trace.ball_radius));
    }
    st.ball_distance = dist;
    trace.max_accounted_drift = std::max(trace.max_accounted_drift, st.accounted_drift);
    trace.steps.push_back(st);
    if (per_step) per_step(i + 1, current);
  }
  return trace;
}

}  // namespace olcb
