#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "olcb/error.hpp"
#include "olcb/numeric.hpp"

namespace olcb {

/// M unit directions at uniform angles on the circle, starting at e_1.
/// For even M the second half is the exact negation of the first, so
/// antipodal pairs match bitwise.
inline Eigen::MatrixXd uniform_circle_grid(int m) {
  if (m < 2) throw DomainError("uniform_circle_grid: need m >= 2");
  Eigen::MatrixXd dirs(m, 2);
  const int half = m % 2 == 0 ? m / 2 : m;
  for (int k = 0; k < half; ++k) {
    const double th = 2.0 * kPi * k / m;
    dirs(k, 0) = std::cos(th);
    dirs(k, 1) = std::sin(th);
  }
  for (int k = half; k < m; ++k) {
    dirs(k, 0) = -dirs(k - half, 0);
    dirs(k, 1) = -dirs(k - half, 1);
  }
  return dirs;
}

/// Deterministic Fibonacci-sphere grid of M unit directions in R^3.
inline Eigen::MatrixXd fibonacci_sphere_grid(int m) {
  if (m < 2) throw DomainError("fibonacci_sphere_grid: need m >= 2");
  Eigen::MatrixXd dirs(m, 3);
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  for (int k = 0; k < m; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / m;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double th = 2.0 * kPi * k / golden;
    dirs(k, 0) = r * std::cos(th);
    dirs(k, 1) = r * std::sin(th);
    dirs(k, 2) = z;
  }
  return dirs;
}

/// Icosphere vertex directions: subdivided icosahedron, antipodally
/// symmetric. Vertex counts by level: 12, 42, 162, 642, 2562.
inline Eigen::MatrixXd icosphere_grid(int level) {
  if (level < 0 || level > 6) throw DomainError("icosphere_grid: level out of range");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find({key.first, key.second});
      if (it != midpoint.end()) return it->second;
      Eigen::Vector3d m = (verts[a] + verts[b]).normalized();
      const int idx = static_cast<int>(verts.size());
      verts.push_back(m);
      midpoint[{key.first, key.second}] = idx;
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(4 * faces.size());
    for (const auto& f : faces) {
      const int a = mid(f[0], f[1]);
      const int b = mid(f[1], f[2]);
      const int c = mid(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    faces.swap(next);
  }
  Eigen::MatrixXd dirs(verts.size(), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) dirs.row(i) = verts[i];
  return dirs;
}

/// Smallest icosphere level whose vertex count is >= m.
inline int icosphere_level_for(int m) {
  int count = 12;
  for (int level = 0; level <= 6; ++level) {
    if (count >= m) return level;
    count = 4 * count - 6;  // 12, 42, 162, 642, 2562, ...
  }
  throw DomainError("icosphere_level_for: m too large");
}

}  // namespace olcb
