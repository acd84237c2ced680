#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "olcb/direction_grid.hpp"
#include "olcb/error.hpp"
#include "olcb/geometry2d.hpp"
#include "olcb/geometry3d.hpp"
#include "olcb/numeric.hpp"

namespace olcb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class BodyKind { Polytope, Ball, Ellipsoid, SupportSampled };

inline const char* body_kind_name(BodyKind k) {
  switch (k) {
    case BodyKind::Polytope: return "polytope";
    case BodyKind::Ball: return "ball";
    case BodyKind::Ellipsoid: return "ellipsoid";
    case BodyKind::SupportSampled: return "support_sampled";
  }
  return "?";
}

struct VolumeEstimate {
  double value = 0.0;
  double std_error = 0.0;  // zero for exact backends
  bool exact = true;
};

/// A star/convex body with the origin in its interior. Immutable after
/// construction; all queries are const and thread-safe.
///
/// Representations:
///  - Polytope: V-rep vertices (CCW loop in 2D, triangulated hull in 3D)
///    plus the derived H-rep of unit outward normals and offsets.
///  - Ball(r), Ellipsoid(M): exact; support is sqrt(u' M u).
///  - SupportSampled: direction grid + support values; the body denoted is
///    the convex closure, i.e. the intersection of the grid halfspaces.
class Body {
 public:
  static Body polytope(const Mat& vertices) {
    Body b;
    b.kind_ = BodyKind::Polytope;
    b.n_ = static_cast<int>(vertices.cols());
    if (vertices.rows() < b.n_ + 1) {
      throw ValidationError("polytope: too few vertices");
    }
    if (b.n_ == 2) {
      b.init_polygon(vertices);
    } else if (b.n_ == 3) {
      b.init_polyhedron(vertices);
    } else {
      throw DimensionUnsupported("polytope: only n in {2,3} supported");
    }
    b.validate_polytope();
    return b;
  }

  static Body ball(int n, double radius) {
    if (radius <= 0.0) throw ValidationError("ball: radius must be positive");
    if (n < 1) throw ValidationError("ball: dimension must be positive");
    Body b;
    b.kind_ = BodyKind::Ball;
    b.n_ = n;
    b.radius_ = radius;
    return b;
  }

  static Body ellipsoid(const Mat& shape) {
    Body b;
    b.kind_ = BodyKind::Ellipsoid;
    b.n_ = static_cast<int>(shape.rows());
    if (shape.cols() != b.n_) throw ValidationError("ellipsoid: shape must be square");
    if (!shape.isApprox(shape.transpose(), 1e-10)) {
      throw ValidationError("ellipsoid: shape must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(shape);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw ValidationError("ellipsoid: shape must be positive definite");
    }
    b.shape_ = 0.5 * (shape + shape.transpose());
    b.shape_eigs_ = es.eigenvalues();
    b.shape_sqrt_ = es.operatorSqrt();
    b.shape_inv_ = b.shape_.inverse();
    return b;
  }

  static Body support_sampled(const Mat& dirs, const Vec& values) {
    Body b;
    b.kind_ = BodyKind::SupportSampled;
    b.n_ = static_cast<int>(dirs.cols());
    if (dirs.rows() != values.size() || dirs.rows() < b.n_ + 1) {
      throw ValidationError("support_sampled: grid/value size mismatch");
    }
    for (int i = 0; i < dirs.rows(); ++i) {
      if (std::fabs(dirs.row(i).norm() - 1.0) > kUnitNormTol) {
        throw ValidationError("support_sampled: grid direction " + std::to_string(i) +
                              " is not unit");
      }
      if (values[i] <= 0.0) {
        throw OriginNotInterior("support_sampled: nonpositive support value at index " +
                                std::to_string(i));
      }
    }
    b.grid_dirs_ = dirs;
    b.grid_vals_ = values;
    if (b.n_ == 2 || b.n_ == 3) b.build_sampled_closure();
    return b;
  }

  /// Sampled representation of an arbitrary body on the deterministic
  /// low-discrepancy grid (uniform angles in 2D, Fibonacci sphere in 3D).
  static Body sample_support(const Body& src, int grid_size) {
    Mat dirs;
    if (src.dim() == 2) {
      dirs = uniform_circle_grid(grid_size);
    } else if (src.dim() == 3) {
      dirs = fibonacci_sphere_grid(grid_size);
    } else {
      throw DimensionUnsupported("sample_support: only n in {2,3}");
    }
    Vec vals(dirs.rows());
    for (int i = 0; i < dirs.rows(); ++i) vals[i] = src.support(dirs.row(i));
    return support_sampled(dirs, vals);
  }

  int dim() const { return n_; }
  BodyKind kind() const { return kind_; }

  double ball_radius() const { return radius_; }
  const Mat& ellipsoid_shape() const { return shape_; }
  const Mat& vertices() const { return verts_; }
  const Mat& halfspace_normals() const { return hs_normals_; }
  const Vec& halfspace_offsets() const { return hs_offsets_; }
  const Polyhedron& polyhedron() const { return poly3_; }
  const Mat& sample_grid_dirs() const { return grid_dirs_; }
  const Vec& sample_grid_values() const { return grid_vals_; }

  /// h_K(x) = max_{y in K} x.y; positively homogeneous, accepts any x != 0.
  double support(const Vec& x) const {
    check_dir(x);
    switch (kind_) {
      case BodyKind::Ball:
        return radius_ * x.norm();
      case BodyKind::Ellipsoid:
        return std::sqrt(x.dot(shape_ * x));
      case BodyKind::Polytope:
        return (verts_ * x).maxCoeff();
      case BodyKind::SupportSampled: {
        if (closure_verts_.rows() > 0) return (closure_verts_ * x).maxCoeff();
        // no closure available (n >= 4): nearest grid direction
        int best = 0;
        (grid_dirs_ * (x / x.norm())).maxCoeff(&best);
        return grid_vals_[best] * x.norm();
      }
    }
    throw Error("support: unreachable");
  }

  /// rho_K(x) = max{ lambda > 0 : lambda x in K }.
  double radial(const Vec& x) const {
    check_dir(x);
    switch (kind_) {
      case BodyKind::Ball:
        return radius_ / x.norm();
      case BodyKind::Ellipsoid:
        return 1.0 / std::sqrt(x.dot(shape_inv_ * x));
      case BodyKind::Polytope:
        return radial_from_halfspaces(hs_normals_, hs_offsets_, x);
      case BodyKind::SupportSampled:
        return radial_from_halfspaces(grid_dirs_, grid_vals_, x);
    }
    throw Error("radial: unreachable");
  }

  /// (r_K, R_K) from Eq. (2.1): extreme values of the radial function.
  std::pair<double, double> inradius_outradius() const {
    switch (kind_) {
      case BodyKind::Ball:
        return {radius_, radius_};
      case BodyKind::Ellipsoid:
        return {std::sqrt(shape_eigs_.minCoeff()), std::sqrt(shape_eigs_.maxCoeff())};
      case BodyKind::Polytope: {
        const double r = hs_offsets_.minCoeff();  // unit normals
        double rmax = 0.0;
        for (int i = 0; i < verts_.rows(); ++i) rmax = std::max(rmax, verts_.row(i).norm());
        return {r, rmax};
      }
      case BodyKind::SupportSampled: {
        // grid min/max; resolution is recorded in grid_size()
        const double r = grid_vals_.minCoeff();
        double rmax = 0.0;
        for (int i = 0; i < grid_dirs_.rows(); ++i) {
          rmax = std::max(rmax, radial(grid_dirs_.row(i)));
        }
        return {r, rmax};
      }
    }
    throw Error("inradius_outradius: unreachable");
  }

  int grid_size() const { return static_cast<int>(grid_dirs_.rows()); }

  /// Exact volume. Throws DimensionUnsupported where no closed form or
  /// polytope decomposition applies.
  double volume_exact() const {
    switch (kind_) {
      case BodyKind::Ball:
        return unit_ball_volume(n_) * std::pow(radius_, n_);
      case BodyKind::Ellipsoid:
        return unit_ball_volume(n_) * std::sqrt(shape_.determinant());
      case BodyKind::Polytope:
        if (n_ == 2) return std::fabs(polygon_area(polygon()));
        if (n_ == 3) return poly3_.volume();
        throw DimensionUnsupported("volume_exact: polytope with n >= 4");
      case BodyKind::SupportSampled:
        if (n_ == 2) return std::fabs(polygon_area(closure_polygon_));
        if (n_ == 3) return closure_poly3_.volume();
        throw DimensionUnsupported("volume_exact: sampled body with n >= 4");
    }
    throw Error("volume_exact: unreachable");
  }

  /// Volume with Monte Carlo fallback (rejection sampling in the bounding
  /// box of R_K) where no exact backend exists.
  VolumeEstimate volume(std::uint64_t mc_samples = 1000000, std::uint64_t seed = 20240811) const {
    try {
      return {volume_exact(), 0.0, true};
    } catch (const DimensionUnsupported&) {
      return monte_carlo_volume(mc_samples, seed);
    }
  }

  VolumeEstimate monte_carlo_volume(std::uint64_t samples, std::uint64_t seed) const {
    const double big_r = inradius_outradius().second;
    const double box = std::pow(2.0 * big_r, n_);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-big_r, big_r);
    std::uint64_t hits = 0;
    Vec y(n_);
    for (std::uint64_t s = 0; s < samples; ++s) {
      for (int i = 0; i < n_; ++i) y[i] = unif(rng);
      if (contains(y)) ++hits;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(samples);
    const double se = box * std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(samples));
    return {box * p, se, false};
  }

  bool contains(const Vec& y, double tol = kGeomEps) const {
    switch (kind_) {
      case BodyKind::Ball:
        return y.norm() <= radius_ + tol;
      case BodyKind::Ellipsoid:
        return y.dot(shape_inv_ * y) <= 1.0 + tol;
      case BodyKind::Polytope:
        return ((hs_normals_ * y - hs_offsets_).array() <= tol).all();
      case BodyKind::SupportSampled:
        return ((grid_dirs_ * y - grid_vals_).array() <= tol).all();
    }
    throw Error("contains: unreachable");
  }

  /// AK for invertible A, staying in the same representation class where
  /// it is closed under linear maps.
  Body apply_linear(const Mat& A) const {
    if (A.rows() != n_ || A.cols() != n_) throw SingularMap("apply_linear: shape mismatch");
    const double det = A.determinant();
    if (std::fabs(det) <= 1e-12) throw SingularMap("apply_linear: |det A| too small");
    switch (kind_) {
      case BodyKind::Ball: {
        const Mat aat = A * A.transpose();
        if (aat.isApprox(aat(0, 0) * Mat::Identity(n_, n_), 1e-12)) {
          return ball(n_, radius_ * std::sqrt(aat(0, 0)));
        }
        return ellipsoid(radius_ * radius_ * aat);
      }
      case BodyKind::Ellipsoid:
        return ellipsoid(A * shape_ * A.transpose());
      case BodyKind::Polytope:
        return polytope(verts_ * A.transpose());
      case BodyKind::SupportSampled: {
        // h(AK, u) = h(K, A'u) on the same grid
        Vec vals(grid_dirs_.rows());
        for (int i = 0; i < grid_dirs_.rows(); ++i) {
          vals[i] = support(A.transpose() * grid_dirs_.row(i).transpose());
        }
        return support_sampled(grid_dirs_, vals);
      }
    }
    throw Error("apply_linear: unreachable");
  }

  /// Uniform sample from the body. Exact for polytopes (simplex fan from
  /// the centroid) and balls/ellipsoids; rejection sampling otherwise.
  Vec sample(std::mt19937_64& rng) const {
    switch (kind_) {
      case BodyKind::Ball:
        return sample_unit_ball(rng) * radius_;
      case BodyKind::Ellipsoid:
        return shape_sqrt_ * sample_unit_ball(rng);
      case BodyKind::Polytope:
        return n_ == 2 ? sample_polygon(rng) : sample_polyhedron(rng);
      case BodyKind::SupportSampled: {
        const double big_r = inradius_outradius().second;
        std::uniform_real_distribution<double> unif(-big_r, big_r);
        Vec y(n_);
        for (int tries = 0; tries < 1000000; ++tries) {
          for (int i = 0; i < n_; ++i) y[i] = unif(rng);
          if (contains(y, 0.0)) return y;
        }
        throw Error("sample: rejection sampling failed");
      }
    }
    throw Error("sample: unreachable");
  }

  /// 2D vertex loop (CCW). Polytope and sampled-closure bodies only.
  Polygon polygon() const {
    require_dim(2);
    if (kind_ == BodyKind::SupportSampled) return closure_polygon_;
    if (kind_ != BodyKind::Polytope) {
      throw ValidationError("polygon: body has no polygonal representation");
    }
    Polygon p;
    p.reserve(verts_.rows());
    for (int i = 0; i < verts_.rows(); ++i) p.emplace_back(verts_(i, 0), verts_(i, 1));
    return p;
  }

  const Polyhedron& polyhedron3() const {
    require_dim(3);
    if (kind_ == BodyKind::SupportSampled) return closure_poly3_;
    if (kind_ != BodyKind::Polytope) {
      throw ValidationError("polyhedron3: body has no polyhedral representation");
    }
    return poly3_;
  }

 private:
  Body() = default;

  void check_dir(const Vec& x) const {
    if (x.size() != n_) throw DomainError("direction has wrong dimension");
    if (x.norm() < 1e-300) throw ZeroDirection("zero direction");
  }

  void require_dim(int d) const {
    if (n_ != d) throw DimensionUnsupported("operation requires n = " + std::to_string(d));
  }

  static double radial_from_halfspaces(const Mat& normals, const Vec& offsets, const Vec& x) {
    for (int i = 0; i < offsets.size(); ++i) {
      if (offsets[i] <= 0.0) throw OriginNotInterior("radial: origin not interior");
    }
    double best = std::numeric_limits<double>::infinity();
    const Vec proj = normals * x;
    for (int i = 0; i < proj.size(); ++i) {
      if (proj[i] > 0.0) best = std::min(best, offsets[i] / proj[i]);
    }
    if (!std::isfinite(best)) throw ValidationError("radial: unbounded direction");
    return best;
  }

  void init_polygon(const Mat& vertices) {
    std::vector<Vec2> pts;
    pts.reserve(vertices.rows());
    for (int i = 0; i < vertices.rows(); ++i) pts.emplace_back(vertices(i, 0), vertices(i, 1));
    Polygon hull = convex_hull_2d(pts);
    if (hull.size() < 3) {
      throw ValidationError("polytope: vertices are affinely dependent (collinear)");
    }
    verts_.resize(hull.size(), 2);
    hs_normals_.resize(hull.size(), 2);
    hs_offsets_.resize(hull.size());
    for (std::size_t i = 0; i < hull.size(); ++i) {
      verts_(i, 0) = hull[i].x();
      verts_(i, 1) = hull[i].y();
    }
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const Vec2 a = hull[i];
      const Vec2 b = hull[(i + 1) % hull.size()];
      Vec2 edge = b - a;
      Vec2 nrm(edge.y(), -edge.x());  // outward for CCW loops
      const double len = nrm.norm();
      if (len < 1e-14) throw ValidationError("polytope: zero-length edge");
      nrm /= len;
      hs_normals_(i, 0) = nrm.x();
      hs_normals_(i, 1) = nrm.y();
      hs_offsets_[i] = nrm.dot(a);
    }
    build_fan_weights_2d();
  }

  void init_polyhedron(const Mat& vertices) {
    std::vector<Vec3> pts;
    pts.reserve(vertices.rows());
    for (int i = 0; i < vertices.rows(); ++i) {
      pts.emplace_back(vertices(i, 0), vertices(i, 1), vertices(i, 2));
    }
    poly3_ = convex_hull_3d(pts);
    verts_.resize(poly3_.verts.size(), 3);
    for (std::size_t i = 0; i < poly3_.verts.size(); ++i) verts_.row(i) = poly3_.verts[i];
    const auto planes = poly3_.planes();
    hs_normals_.resize(planes.size(), 3);
    hs_offsets_.resize(planes.size());
    for (std::size_t i = 0; i < planes.size(); ++i) {
      hs_normals_.row(i) = planes[i].first;
      hs_offsets_[i] = planes[i].second;
    }
    build_fan_weights_3d();
  }

  void validate_polytope() {
    for (int i = 0; i < hs_offsets_.size(); ++i) {
      if (hs_offsets_[i] <= 0.0) {
        throw OriginNotInterior("polytope: halfspace " + std::to_string(i) +
                                " has nonpositive offset");
      }
    }
    // V-rep / H-rep consistency; strided once the full product of checks
    // would exceed ~4e6 pairs (long symmetrization traces)
    const long long pairs =
        static_cast<long long>(verts_.rows()) * static_cast<long long>(hs_offsets_.size());
    const int stride = std::max<long long>(1, pairs / 4000000);
    for (int v = 0; v < verts_.rows(); v += stride) {
      for (int i = 0; i < hs_offsets_.size(); ++i) {
        const double slack = hs_normals_.row(i).dot(verts_.row(v)) - hs_offsets_[i];
        if (slack > kGeomEps) {
          throw ValidationError("polytope: vertex " + std::to_string(v) +
                                " violates halfspace " + std::to_string(i));
        }
      }
    }
    if (n_ == 2) {
      // each edge halfspace is supported by its own two vertices
      for (int i = 0; i < hs_offsets_.size(); ++i) {
        const int j = (i + 1) % static_cast<int>(verts_.rows());
        const double reach = std::max(hs_normals_.row(i).dot(verts_.row(i)),
                                      hs_normals_.row(i).dot(verts_.row(j)));
        if (reach < hs_offsets_[i] - kGeomEps) {
          throw ValidationError("polytope: halfspace " + std::to_string(i) +
                                " is not supporting");
        }
      }
    } else {
      for (int i = 0; i < hs_offsets_.size(); ++i) {
        const double reach = (verts_ * hs_normals_.row(i).transpose()).maxCoeff();
        if (reach < hs_offsets_[i] - kGeomEps) {
          throw ValidationError("polytope: halfspace " + std::to_string(i) +
                                " is not supporting");
        }
      }
    }
  }

  void build_sampled_closure() {
    if (n_ == 2) {
      std::vector<Halfplane> planes;
      planes.reserve(grid_dirs_.rows());
      for (int i = 0; i < grid_dirs_.rows(); ++i) {
        planes.push_back({Vec2(grid_dirs_(i, 0), grid_dirs_(i, 1)), grid_vals_[i]});
      }
      closure_polygon_ = halfplane_intersection(planes);
      closure_verts_.resize(closure_polygon_.size(), 2);
      for (std::size_t i = 0; i < closure_polygon_.size(); ++i) {
        closure_verts_(i, 0) = closure_polygon_[i].x();
        closure_verts_(i, 1) = closure_polygon_[i].y();
      }
    } else {
      std::vector<std::pair<Vec3, double>> planes;
      planes.reserve(grid_dirs_.rows());
      for (int i = 0; i < grid_dirs_.rows(); ++i) {
        planes.emplace_back(Vec3(grid_dirs_(i, 0), grid_dirs_(i, 1), grid_dirs_(i, 2)),
                            grid_vals_[i]);
      }
      closure_poly3_ = halfspace_intersection_3d(planes);
      closure_verts_.resize(closure_poly3_.verts.size(), 3);
      for (std::size_t i = 0; i < closure_poly3_.verts.size(); ++i) {
        closure_verts_.row(i) = closure_poly3_.verts[i];
      }
    }
  }

  void build_fan_weights_2d() {
    const int m = static_cast<int>(verts_.rows());
    Vec2 c(0, 0);
    for (int i = 0; i < m; ++i) c += Vec2(verts_(i, 0), verts_(i, 1));
    c /= m;
    fan_center_ = Vec(2);
    fan_center_ << c.x(), c.y();
    fan_cum_.clear();
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      const Vec2 a(verts_(i, 0), verts_(i, 1));
      const Vec2 b(verts_((i + 1) % m, 0), verts_((i + 1) % m, 1));
      total += 0.5 * std::fabs(cross2(a - c, b - c));
      fan_cum_.push_back(total);
    }
  }

  void build_fan_weights_3d() {
    const Vec3 c = poly3_.centroid();
    fan_center_ = Vec(3);
    fan_center_ << c.x(), c.y(), c.z();
    fan_cum_.clear();
    double total = 0.0;
    for (const auto& t : poly3_.faces) {
      const Vec3 a = poly3_.verts[t[0]] - c;
      const Vec3 b = poly3_.verts[t[1]] - c;
      const Vec3 d = poly3_.verts[t[2]] - c;
      total += std::fabs(a.dot(b.cross(d))) / 6.0;
      fan_cum_.push_back(total);
    }
  }

  Vec sample_unit_ball(std::mt19937_64& rng) const {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec y(n_);
    for (int i = 0; i < n_; ++i) y[i] = gauss(rng);
    const double norm = y.norm();
    if (norm < 1e-300) return Vec::Zero(n_);
    return y * (std::pow(unif(rng), 1.0 / n_) / norm);
  }

  std::size_t pick_fan_cell(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> unif(0.0, fan_cum_.back());
    const double z = unif(rng);
    return std::lower_bound(fan_cum_.begin(), fan_cum_.end(), z) - fan_cum_.begin();
  }

  Vec sample_polygon(std::mt19937_64& rng) const {
    const std::size_t i = pick_fan_cell(rng);
    const int m = static_cast<int>(verts_.rows());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double s = unif(rng), t = unif(rng);
    if (s + t > 1.0) {
      s = 1.0 - s;
      t = 1.0 - t;
    }
    const Vec a = verts_.row(i), b = verts_.row((i + 1) % m);
    return fan_center_ + s * (a - fan_center_) + t * (b - fan_center_);
  }

  Vec sample_polyhedron(std::mt19937_64& rng) const {
    const std::size_t i = pick_fan_cell(rng);
    const auto& t = poly3_.faces[i];
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    // uniform barycentric coordinates in a tetrahedron
    double a = unif(rng), b = unif(rng), c = unif(rng);
    if (a + b > 1.0) {
      a = 1.0 - a;
      b = 1.0 - b;
    }
    if (b + c > 1.0) {
      const double tc = c;
      c = 1.0 - a - b;
      b = 1.0 - tc;
    } else if (a + b + c > 1.0) {
      const double ta = a;
      a = 1.0 - b - c;
      c = ta + b + c - 1.0;
    }
    Vec p = fan_center_;
    p += a * (Vec(poly3_.verts[t[0]]) - fan_center_);
    p += b * (Vec(poly3_.verts[t[1]]) - fan_center_);
    p += c * (Vec(poly3_.verts[t[2]]) - fan_center_);
    return p;
  }

  int n_ = 0;
  BodyKind kind_ = BodyKind::Ball;

  Mat verts_;
  Mat hs_normals_;
  Vec hs_offsets_;
  Polyhedron poly3_;

  double radius_ = 0.0;

  Mat shape_;
  Mat shape_sqrt_;
  Mat shape_inv_;
  Vec shape_eigs_;

  Mat grid_dirs_;
  Vec grid_vals_;
  Polygon closure_polygon_;
  Polyhedron closure_poly3_;
  Mat closure_verts_;

  Vec fan_center_;
  std::vector<double> fan_cum_;
};

}  // namespace olcb
