#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "olcb/error.hpp"
#include "olcb/geometry2d.hpp"
#include "olcb/numeric.hpp"

namespace olcb {

using Vec3 = Eigen::Vector3d;

/// Convex polyhedron as a vertex list plus triangular faces with outward
/// normals. Coplanar triangles are kept; `planes()` dedupes them.
struct Polyhedron {
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> faces;  // CCW from outside

  Vec3 face_normal(std::size_t f) const {
    const auto& t = faces[f];
    return (verts[t[1]] - verts[t[0]]).cross(verts[t[2]] - verts[t[0]]);
  }

  double volume() const {
    double six = 0.0;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const auto& t = faces[f];
      six += verts[t[0]].dot((verts[t[1]]).cross(verts[t[2]]));
    }
    return six / 6.0;
  }

  Vec3 centroid() const {
    // volume-weighted centroid of origin-fan tetrahedra
    double six = 0.0;
    Vec3 acc = Vec3::Zero();
    for (const auto& t : faces) {
      const double v = verts[t[0]].dot(verts[t[1]].cross(verts[t[2]]));
      six += v;
      acc += v * (verts[t[0]] + verts[t[1]] + verts[t[2]]) / 4.0;
    }
    if (std::fabs(six) < 1e-300) throw ValidationError("centroid: degenerate polyhedron");
    return acc / six;
  }

  /// Unique supporting planes (unit normal, offset), merged across
  /// coplanar triangles.
  std::vector<std::pair<Vec3, double>> planes() const {
    std::vector<std::pair<Vec3, double>> out;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      Vec3 n = face_normal(f);
      const double len = n.norm();
      if (len < 1e-300) continue;
      n /= len;
      const double b = n.dot(verts[faces[f][0]]);
      bool dup = false;
      for (const auto& [m, c] : out) {
        if ((m - n).norm() < 1e-9 && std::fabs(c - b) < 1e-9) {
          dup = true;
          break;
        }
      }
      if (!dup) out.emplace_back(n, b);
    }
    return out;
  }

  /// Undirected edge list as index pairs (i < j).
  std::vector<std::pair<int, int>> edges() const {
    std::set<std::pair<int, int>> e;
    for (const auto& t : faces) {
      for (int k = 0; k < 3; ++k) {
        int a = t[k], b = t[(k + 1) % 3];
        if (a > b) std::swap(a, b);
        e.emplace(a, b);
      }
    }
    return {e.begin(), e.end()};
  }
};

namespace detail {

inline double signed_dist(const Vec3& n, double d, const Vec3& p) { return n.dot(p) - d; }

}  // namespace detail

/// Incremental convex hull of a 3D point set. Throws ValidationError on
/// degenerate (affinely dependent) input.
inline Polyhedron convex_hull_3d(const std::vector<Vec3>& input) {
  std::vector<Vec3> pts = input;
  const std::size_t n = pts.size();
  if (n < 4) throw ValidationError("convex_hull_3d: need at least 4 points");

  // initial simplex: spread points
  std::size_t i0 = 0, i1 = 0;
  double best = -1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double d = (pts[i] - pts[0]).squaredNorm();
    if (d > best) {
      best = d;
      i1 = i;
    }
  }
  if (best < 1e-24) throw ValidationError("convex_hull_3d: coincident points");
  std::size_t i2 = 0;
  best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (pts[i] - pts[i0]).cross(pts[i] - pts[i1]).squaredNorm();
    if (d > best) {
      best = d;
      i2 = i;
    }
  }
  if (best < 1e-24) throw ValidationError("convex_hull_3d: collinear points");
  const Vec3 nrm = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]);
  std::size_t i3 = 0;
  best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::fabs(nrm.dot(pts[i] - pts[i0]));
    if (d > best) {
      best = d;
      i3 = i;
    }
  }
  const double scale = std::sqrt((pts[i1] - pts[i0]).squaredNorm());
  if (best < 1e-12 * scale * scale) {
    throw ValidationError("convex_hull_3d: coplanar points (affinely dependent)");
  }

  struct Face {
    std::array<int, 3> v;
    Vec3 n;  // unit outward
    double d;
    bool alive = true;
  };
  std::vector<Face> faces;
  auto make_face = [&](int a, int b, int c, const Vec3& inside) {
    Face f;
    f.v = {a, b, c};
    Vec3 nn = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
    const double len = nn.norm();
    if (len < 1e-300) nn = Vec3::UnitZ();
    else nn /= len;
    double dd = nn.dot(pts[a]);
    if (detail::signed_dist(nn, dd, inside) > 0) {
      std::swap(f.v[1], f.v[2]);
      nn = -nn;
      dd = -dd;
    }
    f.n = nn;
    f.d = dd;
    return f;
  };
  const Vec3 inside0 = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) / 4.0;
  faces.push_back(make_face(i0, i1, i2, inside0));
  faces.push_back(make_face(i0, i1, i3, inside0));
  faces.push_back(make_face(i0, i2, i3, inside0));
  faces.push_back(make_face(i1, i2, i3, inside0));

  const double eps = 1e-10 * std::max(1.0, scale);
  for (std::size_t p = 0; p < n; ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    // collect faces visible from pts[p]
    std::vector<std::size_t> visible;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (faces[f].alive && detail::signed_dist(faces[f].n, faces[f].d, pts[p]) > eps) {
        visible.push_back(f);
      }
    }
    if (visible.empty()) continue;
    // horizon = edges shared by exactly one visible face
    std::map<std::pair<int, int>, std::pair<int, int>> edge_count;
    for (std::size_t f : visible) {
      const auto& t = faces[f].v;
      for (int k = 0; k < 3; ++k) {
        const int a = t[k], b = t[(k + 1) % 3];
        auto key = std::minmax(a, b);
        auto it = edge_count.find({key.first, key.second});
        if (it == edge_count.end()) {
          edge_count[{key.first, key.second}] = {a, b};  // oriented as in face
        } else {
          edge_count.erase(it);
        }
      }
    }
    for (std::size_t f : visible) faces[f].alive = false;
    for (const auto& [key, oriented] : edge_count) {
      faces.push_back(make_face(oriented.first, oriented.second, static_cast<int>(p), inside0));
    }
  }

  // compact: keep alive faces, reindex used vertices
  Polyhedron out;
  std::map<int, int> remap;
  for (const auto& f : faces) {
    if (!f.alive) continue;
    std::array<int, 3> tri;
    for (int k = 0; k < 3; ++k) {
      auto it = remap.find(f.v[k]);
      if (it == remap.end()) {
        it = remap.emplace(f.v[k], static_cast<int>(out.verts.size())).first;
        out.verts.push_back(pts[f.v[k]]);
      }
      tri[k] = it->second;
    }
    out.faces.push_back(tri);
  }
  if (out.verts.size() < 4) throw ValidationError("convex_hull_3d: degenerate hull");
  return out;
}

/// Polygonal cross-section area of a convex polyhedron with the plane
/// {y : e.y = tau}, e unit.
inline double section_area(const Polyhedron& poly, const Vec3& e, double tau) {
  std::vector<Vec3> pts;
  for (const auto& [a, b] : poly.edges()) {
    const double da = e.dot(poly.verts[a]) - tau;
    const double db = e.dot(poly.verts[b]) - tau;
    if (da == 0.0) pts.push_back(poly.verts[a]);
    if (db == 0.0) pts.push_back(poly.verts[b]);
    if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
      pts.push_back(poly.verts[a] + (da / (da - db)) * (poly.verts[b] - poly.verts[a]));
    }
  }
  if (pts.size() < 3) return 0.0;
  // basis of the plane
  Vec3 w1 = e.unitOrthogonal();
  Vec3 w2 = e.cross(w1);
  std::vector<Vec2> flat;
  flat.reserve(pts.size());
  for (const auto& p : pts) flat.emplace_back(w1.dot(p), w2.dot(p));
  const Polygon hull = convex_hull_2d(flat);
  if (hull.size() < 3) return 0.0;
  return std::fabs(polygon_area(hull));
}

/// Intersection of halfspaces {y : n_i.y <= b_i} with b_i > 0, via polar
/// duality (hull of n_i/b_i).
inline Polyhedron halfspace_intersection_3d(const std::vector<std::pair<Vec3, double>>& planes) {
  std::vector<Vec3> dual;
  dual.reserve(planes.size());
  for (const auto& [n, b] : planes) {
    if (b <= 0.0) throw OriginNotInterior("halfspace_intersection_3d: nonpositive offset");
    dual.push_back(n / b);
  }
  const Polyhedron dual_hull = convex_hull_3d(dual);
  // each dual face (a,b,c) maps to the primal vertex v with a.v=b.v=c.v=1
  std::vector<Vec3> verts;
  verts.reserve(dual_hull.faces.size());
  for (const auto& t : dual_hull.faces) {
    Eigen::Matrix3d M;
    M.row(0) = dual_hull.verts[t[0]];
    M.row(1) = dual_hull.verts[t[1]];
    M.row(2) = dual_hull.verts[t[2]];
    Eigen::FullPivLU<Eigen::Matrix3d> lu(M);
    if (!lu.isInvertible()) continue;
    verts.push_back(lu.solve(Vec3::Ones()));
  }
  return convex_hull_3d(verts);
}

}  // namespace olcb
