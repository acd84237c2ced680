#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "olcb/body.hpp"
#include "olcb/direction_grid.hpp"
#include "olcb/error.hpp"
#include "olcb/orlicz.hpp"
#include "olcb/parallel.hpp"
#include "olcb/rearrangement.hpp"

namespace olcb {

struct CentroidOptions {
  int grid_size = 0;  // 0 -> 720 in 2D, 2562 in 3D
  NormSolveOptions solver;
  // Monte Carlo profile settings for bodies without an exact slab backend
  std::size_t mc_samples = 100000;
  std::uint64_t mc_seed = 20240811;
  bool check_invariants = true;
};

inline RearrangementProfile make_profile(const Body& body, const Vec& x,
                                         const CentroidOptions& opts = {}) {
  try {
    return RearrangementProfile::exact_slab(body, x);
  } catch (const DimensionUnsupported&) {
    return RearrangementProfile::empirical(body, x, opts.mc_samples, opts.mc_seed);
  }
}

/// h(Gamma_{phi,omega} K, x): the Orlicz-Lorentz norm of y -> x.y on K.
inline NormSolveReport centroid_support_report(const Body& body, const OrliczFunction& phi,
                                               const WeightFunction& omega, const Vec& x,
                                               const CentroidOptions& opts = {}) {
  return norm_solve(make_profile(body, x, opts), phi, omega, opts.solver);
}

inline double centroid_support(const Body& body, const OrliczFunction& phi,
                               const WeightFunction& omega, const Vec& x,
                               const CentroidOptions& opts = {}) {
  return centroid_support_report(body, phi, omega, x, opts).lambda;
}

/// Gamma_{phi,omega} K sampled on a deterministic direction grid, with the
/// halfspace outer polytope and the per-direction solver reports.
class CentroidBody {
 public:
  CentroidBody(const Body& source, const OrliczFunction& phi, const WeightFunction& omega,
               const CentroidOptions& opts = {})
      : source_(source), phi_(phi), omega_(omega), opts_(opts) {
    const int n = source.dim();
    int m = opts.grid_size;
    if (m == 0) m = n == 2 ? 720 : 2562;
    if (n == 2) {
      if (m < 8) throw DomainError("CentroidBody: need grid_size >= 8 in 2D");
      if (m % 2 != 0) ++m;
      dirs_ = uniform_circle_grid(m);
    } else if (n == 3) {
      if (m < 64) throw DomainError("CentroidBody: need grid_size >= 64 in 3D");
      dirs_ = icosphere_grid(icosphere_level_for(m));
    } else {
      throw DimensionUnsupported("CentroidBody: grids support n in {2,3}");
    }
    solve_grid();
    outer_ = Body::support_sampled(dirs_, supports_);
    if (opts.check_invariants) check_invariants();
  }

  const Body& source() const { return source_; }
  const OrliczFunction& phi() const { return phi_; }
  const WeightFunction& omega() const { return omega_; }
  const Mat& directions() const { return dirs_; }
  const Vec& supports() const { return supports_; }
  const std::vector<NormSolveReport>& reports() const { return reports_; }

  /// Outer polytope: intersection of the grid support halfspaces.
  const Body& outer() const { return outer_; }

  /// Largest per-direction solver uncertainty on h.
  double support_uncertainty() const {
    double d = 0.0;
    for (const auto& r : reports_) d = std::max(d, r.lambda_uncertainty);
    return d;
  }

  int grid_size() const { return static_cast<int>(dirs_.rows()); }

 private:
  void solve_grid() {
    const int m = static_cast<int>(dirs_.rows());
    // |x.y| is even in x, so only one of each antipodal pair is solved
    std::vector<int> rep(m, -1);  // index of the solved representative
    std::vector<int> order;
    std::map<std::array<long long, 3>, int> seen;
    auto key_of = [&](const Vec& u) {
      std::array<long long, 3> key{0, 0, 0};
      Vec v = u;
      for (int c = 0; c < u.size(); ++c) {
        if (std::fabs(v[c]) > 1e-9) {
          if (v[c] < 0) v = -v;
          break;
        }
      }
      for (int c = 0; c < u.size(); ++c) {
        key[c] = static_cast<long long>(std::llround(v[c] * 1e10));
      }
      return key;
    };
    for (int i = 0; i < m; ++i) {
      const auto key = key_of(dirs_.row(i));
      auto it = seen.find(key);
      if (it == seen.end()) {
        seen.emplace(key, i);
        rep[i] = i;
        order.push_back(i);
      } else {
        rep[i] = it->second;
      }
    }
    std::vector<NormSolveReport> solved(m);
    parallel_for(order.size(), [&](std::size_t k) {
      const int i = order[k];
      solved[i] = centroid_support_report(source_, phi_, omega_, dirs_.row(i).transpose(), opts_);
    });
    supports_.resize(m);
    reports_.resize(m);
    for (int i = 0; i < m; ++i) {
      reports_[i] = solved[rep[i]];
      supports_[i] = reports_[i].lambda;
    }

    // even-symmetry spot check on up to 8 antipodal pairs
    int checked = 0;
    for (int i = 0; i < m && checked < 8; ++i) {
      if (rep[i] == i) continue;  // want mirrored entries solved independently
      const NormSolveReport direct =
          centroid_support_report(source_, phi_, omega_, dirs_.row(i).transpose(), opts_);
      const double tol = 1e-7 * std::max(1.0, supports_[i]);
      if (std::fabs(direct.lambda - supports_[i]) > tol) {
        throw Error("CentroidBody: even-symmetry violation h(u) != h(-u) at grid index " +
                    std::to_string(i));
      }
      ++checked;
    }
  }

  void check_invariants() const {
    const int n = source_.dim();
    for (int i = 0; i < supports_.size(); ++i) {
      if (!(supports_[i] > 0.0)) {
        throw Error("CentroidBody: nonpositive support value at grid index " +
                    std::to_string(i));
      }
    }
    // support sandwich on every grid direction
    const auto [lower, upper] = support_sandwich_bounds(source_, dirs_.row(0).transpose(), phi_, omega_);
    for (int i = 0; i < supports_.size(); ++i) {
      if (supports_[i] < lower - 1e-6 || supports_[i] > upper + 1e-6) {
        throw Error("CentroidBody: support value escapes the sandwich bounds at index " +
                    std::to_string(i));
      }
    }
    // outer approximation property on a subsample of grid directions
    const int step = std::max(1, static_cast<int>(supports_.size()) / 16);
    for (int i = 0; i < supports_.size(); i += step) {
      const double houter = outer_.support(dirs_.row(i).transpose());
      if (supports_[i] > houter + 1e-9) {
        throw Error("CentroidBody: direct support exceeds outer polytope at index " +
                    std::to_string(i));
      }
    }
    (void)n;
  }

  Body source_;
  OrliczFunction phi_;
  WeightFunction omega_;
  CentroidOptions opts_;
  Mat dirs_;
  Vec supports_;
  std::vector<NormSolveReport> reports_;
  Body outer_ = Body::ball(1, 1.0);
};

struct VolumeRatioResult {
  double ratio = 0.0;        // outer bracket of |Gamma K| / |K|
  double error = 0.0;        // ratio - certified (or estimated) inner bracket
  double outer_volume = 0.0;
  double inner_volume = 0.0;
  double body_volume = 0.0;
  double body_volume_std_error = 0.0;
  bool inner_certified = true;
  double support_uncertainty = 0.0;

  double inner_ratio() const { return inner_volume / body_volume; }
  double outer_ratio() const { return outer_volume / body_volume; }
};

namespace detail {

/// Certified 2D volume bracket for a convex body known through support
/// values h_i (+/- delta_i) on the grid: outer = area of the halfplane
/// intersection at h+delta; inner = area at h-delta minus the vertex caps
/// minus an offset-perturbation slop.
inline std::pair<double, double> support_volume_bracket_2d(const Mat& dirs, const Vec& h,
                                                           const std::vector<double>& delta) {
  const int m = static_cast<int>(dirs.rows());
  std::vector<Halfplane> hi_planes(m), lo_planes(m);
  double delta_sum = 0.0;
  for (int i = 0; i < m; ++i) {
    const Vec2 u(dirs(i, 0), dirs(i, 1));
    hi_planes[i] = {u, h[i] + delta[i]};
    lo_planes[i] = {u, std::max(h[i] - delta[i], 1e-12)};
    delta_sum += delta[i];
  }
  const Polygon outer_poly = halfplane_intersection(hi_planes);
  const Polygon lo_poly = halfplane_intersection(lo_planes);
  const double outer = std::fabs(polygon_area(outer_poly));
  double r_out = 0.0;
  for (const auto& v : outer_poly) r_out = std::max(r_out, v.norm());
  const double slop = 2.0 * r_out * delta_sum;
  const double inner =
      std::max(0.0, std::fabs(polygon_area(lo_poly)) - vertex_cap_area(lo_poly) - slop);
  return {inner, outer};
}

/// 3D: certified outer volume; inner volume estimated from contact points
/// reconstructed by a local least-squares gradient fit over neighboring
/// grid values (reported as non-certified).
inline std::pair<double, double> support_volume_bracket_3d(const Mat& dirs, const Vec& h,
                                                           double delta_max) {
  const int m = static_cast<int>(dirs.rows());
  std::vector<std::pair<Vec3, double>> planes(m);
  for (int i = 0; i < m; ++i) {
    planes[i] = {Vec3(dirs(i, 0), dirs(i, 1), dirs(i, 2)), h[i] + delta_max};
  }
  const Polyhedron outer_poly = halfspace_intersection_3d(planes);
  const double outer = outer_poly.volume();

  // neighbor sets from the grid's proximity structure
  std::vector<Vec3> contacts(m);
  for (int i = 0; i < m; ++i) {
    const Vec3 u(dirs(i, 0), dirs(i, 1), dirs(i, 2));
    // nearest neighbors by angle
    std::vector<std::pair<double, int>> near;
    near.reserve(m);
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      const Vec3 v(dirs(j, 0), dirs(j, 1), dirs(j, 2));
      near.emplace_back((v - u).squaredNorm(), j);
    }
    std::partial_sort(near.begin(), near.begin() + 6, near.end());
    Vec3 t1 = u.unitOrthogonal();
    Vec3 t2 = u.cross(t1);
    Eigen::MatrixXd A(6, 2);
    Eigen::VectorXd b(6);
    for (int k = 0; k < 6; ++k) {
      const int j = near[k].second;
      const Vec3 v(dirs(j, 0), dirs(j, 1), dirs(j, 2));
      A(k, 0) = t1.dot(v - u);
      A(k, 1) = t2.dot(v - u);
      // 1-homogeneous extension: h(v) ~ h(u) + grad_tangent . (v - u)
      b[k] = h[j] - h[i];
    }
    const Eigen::Vector2d g = A.colPivHouseholderQr().solve(b);
    contacts[i] = h[i] * u + g[0] * t1 + g[1] * t2;
  }
  double inner = 0.0;
  try {
    inner = convex_hull_3d(contacts).volume();
  } catch (const ValidationError&) {
    inner = 0.0;
  }
  inner = std::min(inner, outer);
  return {inner, outer};
}

}  // namespace detail

/// |Gamma_{phi,omega} K| / |K| with a two-sided volume bracket: the outer
/// polytope overestimates, the inscribed construction underestimates, and
/// solver uncertainty widens both sides.
inline VolumeRatioResult volume_ratio(const Body& body, const OrliczFunction& phi,
                                      const WeightFunction& omega,
                                      const CentroidOptions& opts = {}) {
  const CentroidBody gamma(body, phi, omega, opts);
  VolumeRatioResult out;
  const auto vol = body.volume();
  out.body_volume = vol.value;
  out.body_volume_std_error = vol.std_error;
  out.support_uncertainty = gamma.support_uncertainty();

  if (body.dim() == 2) {
    std::vector<double> delta(gamma.grid_size());
    for (int i = 0; i < gamma.grid_size(); ++i) {
      delta[i] = std::max(gamma.reports()[i].lambda_uncertainty, 1e-12);
    }
    const auto [inner, outer] =
        detail::support_volume_bracket_2d(gamma.directions(), gamma.supports(), delta);
    out.inner_volume = inner;
    out.outer_volume = outer;
    out.inner_certified = true;
  } else if (body.dim() == 3) {
    const double delta_max = std::max(gamma.support_uncertainty(), 1e-12);
    const auto [inner, outer] =
        detail::support_volume_bracket_3d(gamma.directions(), gamma.supports(), delta_max);
    out.inner_volume = inner;
    out.outer_volume = outer;
    out.inner_certified = false;
  } else {
    throw DimensionUnsupported("volume_ratio: n in {2,3} only");
  }
  out.ratio = out.outer_volume / out.body_volume;
  double err = (out.outer_volume - out.inner_volume) / out.body_volume;
  if (!vol.exact && vol.value > 0.0) {
    err += out.outer_volume * vol.std_error / (vol.value * vol.value);
  }
  out.error = err;
  return out;
}

/// Max relative discrepancy of the GL(n) equivariance: h(Gamma(AK), u) vs
/// h(Gamma K, A'u) over the sample directions.
inline double equivariance_check(const Body& body, const Mat& A, const OrliczFunction& phi,
                                 const WeightFunction& omega, const Mat& directions,
                                 const CentroidOptions& opts = {}) {
  const Body mapped = body.apply_linear(A);
  std::vector<double> disc(directions.rows());
  parallel_for(directions.rows(), [&](std::size_t i) {
    const Vec u = directions.row(i).transpose();
    const double lhs = centroid_support(mapped, phi, omega, u, opts);
    const double rhs = centroid_support(body, phi, omega, A.transpose() * u, opts);
    disc[i] = std::fabs(lhs - rhs) / rhs;
  });
  return *std::max_element(disc.begin(), disc.end());
}

}  // namespace olcb
