#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "olcb/body.hpp"
#include "olcb/error.hpp"
#include "olcb/numeric.hpp"

namespace olcb {

/// Random convex polygon: sorted uniform angles, radii uniform in
/// [0.3, 1], hulled; redrawn until the inradius clears the floor.
inline Body random_polygon(std::mt19937_64& rng, int vertex_count, double inradius_floor = 0.1) {
  if (vertex_count < 3) throw DomainError("random_polygon: need at least 3 vertices");
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> radius(0.3, 1.0);
  for (int attempt = 0; attempt < 4096; ++attempt) {
    std::vector<double> th(vertex_count);
    for (auto& a : th) a = angle(rng);
    std::sort(th.begin(), th.end());
    Mat verts(vertex_count, 2);
    for (int i = 0; i < vertex_count; ++i) {
      const double r = radius(rng);
      verts(i, 0) = r * std::cos(th[i]);
      verts(i, 1) = r * std::sin(th[i]);
    }
    try {
      Body b = Body::polytope(verts);
      if (b.inradius_outradius().first >= inradius_floor) return b;
    } catch (const Error&) {
      // degenerate draw; retry
    }
  }
  throw Error("random_polygon: could not satisfy the inradius floor");
}

inline Body regular_polygon(int sides, double radius = 1.0) {
  if (sides < 3) throw DomainError("regular_polygon: need at least 3 sides");
  Mat verts(sides, 2);
  for (int i = 0; i < sides; ++i) {
    const double th = 2.0 * kPi * i / sides;
    verts(i, 0) = radius * std::cos(th);
    verts(i, 1) = radius * std::sin(th);
  }
  return Body::polytope(verts);
}

/// Random origin-centered ellipse with semiaxes in [0.5, 2].
inline Body random_ellipse(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> axis(0.5, 2.0);
  std::uniform_real_distribution<double> angle(0.0, kPi);
  const double a = axis(rng), b = axis(rng), th = angle(rng);
  Mat rot(2, 2);
  rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  Mat diag = Mat::Zero(2, 2);
  diag(0, 0) = a * a;
  diag(1, 1) = b * b;
  return Body::ellipsoid(rot * diag * rot.transpose());
}

/// Random 3D convex polytope from points at radii [0.4, 1] on the sphere.
inline Body random_polytope_3d(std::mt19937_64& rng, int vertex_count,
                               double inradius_floor = 0.1) {
  if (vertex_count < 4) throw DomainError("random_polytope_3d: need at least 4 vertices");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> radius(0.4, 1.0);
  for (int attempt = 0; attempt < 4096; ++attempt) {
    Mat verts(vertex_count, 3);
    for (int i = 0; i < vertex_count; ++i) {
      Eigen::Vector3d d(gauss(rng), gauss(rng), gauss(rng));
      d.normalize();
      verts.row(i) = radius(rng) * d;
    }
    try {
      Body b = Body::polytope(verts);
      if (b.inradius_outradius().first >= inradius_floor) return b;
    } catch (const Error&) {
    }
  }
  throw Error("random_polytope_3d: could not satisfy the inradius floor");
}

}  // namespace olcb
