#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <utility>
#include <vector>

#include "olcb/body.hpp"
#include "olcb/error.hpp"
#include "olcb/numeric.hpp"

namespace olcb {

struct SlabVolumeResult {
  double threshold = 0.0;
  double value = 0.0;  // normalized measure in [0,1]
  double error = 0.0;
};

enum class ProfileBackend { ExactSlab, EmpiricalQuantile, Custom };

inline const char* backend_name(ProfileBackend b) {
  switch (b) {
    case ProfileBackend::ExactSlab: return "exact_slab";
    case ProfileBackend::EmpiricalQuantile: return "empirical_quantile";
    case ProfileBackend::Custom: return "custom";
  }
  return "?";
}

namespace detail {

// Cross-section size of a convex body along the axis tau = e.y, stored as
// a piecewise-polynomial density with its exact upper tail integral
// A(tau) = |{y : e.y > tau}|.
class SectionProfile {
 public:
  // density coefficients per interval, local coordinate z = tau - left
  struct Cell {
    double left, width;
    double c0, c1, c2;
    double tail_at_left;  // A(left)
  };

  static SectionProfile from_polygon(const Polygon& poly, const Vec2& e) {
    std::vector<double> taus;
    taus.reserve(poly.size());
    for (const auto& v : poly) taus.push_back(e.dot(v));
    SectionProfile sp;
    sp.build(taus, [&](double tau) { return chord_length(poly, e, tau); }, /*max_degree=*/1);
    return sp;
  }

  static SectionProfile from_polyhedron(const Polyhedron& poly, const Vec3& e) {
    std::vector<double> taus;
    taus.reserve(poly.verts.size());
    for (const auto& v : poly.verts) taus.push_back(e.dot(v));
    SectionProfile sp;
    sp.build(taus, [&](double tau) { return section_area(poly, e, tau); }, /*max_degree=*/2);
    return sp;
  }

  double total() const { return total_; }
  double tau_min() const { return cells_.empty() ? 0.0 : cells_.front().left; }
  double tau_max() const { return tau_max_; }

  /// |{y : e.y > tau}|, exact.
  double tail_above(double tau) const {
    if (cells_.empty()) return 0.0;
    if (tau <= cells_.front().left) return total_;
    if (tau >= tau_max_) return 0.0;
    // find cell with left <= tau < left+width
    auto it = std::upper_bound(cells_.begin(), cells_.end(), tau,
                               [](double t, const Cell& c) { return t < c.left; });
    const Cell& c = *(it - 1);
    const double z = tau - c.left;
    const double cum = c.c0 * z + 0.5 * c.c1 * z * z + (c.c2 / 3.0) * z * z * z;
    return std::max(0.0, c.tail_at_left - cum);
  }

 private:
  template <typename SliceFn>
  void build(std::vector<double> taus, SliceFn&& slice, int max_degree) {
    std::sort(taus.begin(), taus.end());
    taus.erase(std::unique(taus.begin(), taus.end(),
                           [](double a, double b) { return std::fabs(a - b) < 1e-13; }),
               taus.end());
    if (taus.size() < 2) throw ValidationError("SectionProfile: degenerate projection");
    const std::size_t m = taus.size();
    cells_.reserve(m - 1);
    for (std::size_t k = 0; k + 1 < m; ++k) {
      Cell c;
      c.left = taus[k];
      c.width = taus[k + 1] - taus[k];
      const double s0 = slice(taus[k]);
      const double s1 = slice(taus[k + 1]);
      if (max_degree <= 1) {
        c.c0 = s0;
        c.c1 = (s1 - s0) / c.width;
        c.c2 = 0.0;
      } else {
        const double sm = slice(taus[k] + 0.5 * c.width);
        c.c0 = s0;
        c.c1 = (-3.0 * s0 + 4.0 * sm - s1) / c.width;
        c.c2 = 2.0 * (s0 - 2.0 * sm + s1) / (c.width * c.width);
      }
      c.tail_at_left = 0.0;
      cells_.push_back(c);
    }
    tau_max_ = taus.back();
    // accumulate the exact tail from the top
    double acc = 0.0;
    for (std::size_t k = cells_.size(); k-- > 0;) {
      const Cell& c = cells_[k];
      const double w = c.width;
      acc += c.c0 * w + 0.5 * c.c1 * w * w + (c.c2 / 3.0) * w * w * w;
      cells_[k].tail_at_left = acc;
    }
    total_ = acc;
    if (!(total_ > 0.0)) throw ValidationError("SectionProfile: nonpositive volume");
  }

  std::vector<Cell> cells_;
  double total_ = 0.0;
  double tau_max_ = 0.0;
};

}  // namespace detail

/// The decreasing rearrangement of f_{x,K}(y) = x.y over the normalized
/// measure on K. Immutable; evaluations at distinct t are thread-safe.
class RearrangementProfile {
 public:
  /// Exact distribution-function backend: closed form for balls and
  /// ellipsoids, exact slab volumes for 2D/3D polytopes (and sampled
  /// closures). Throws DimensionUnsupported where no exact route exists.
  static RearrangementProfile exact_slab(const Body& body, const Vec& x) {
    RearrangementProfile p(body, x, ProfileBackend::ExactSlab);
    const double xnorm = x.norm();
    switch (body.kind()) {
      case BodyKind::Ball: {
        const double scale = body.ball_radius() * xnorm;
        p.mu_ = [n = body.dim(), scale](double s) {
          return 2.0 * ball_cap_fraction(n, s / scale);
        };
        break;
      }
      case BodyKind::Ellipsoid: {
        // affine pullback to the unit ball: mu depends on |M^(1/2) x|
        const double scale = body.support(x);
        p.mu_ = [n = body.dim(), scale](double s) {
          return 2.0 * ball_cap_fraction(n, s / scale);
        };
        break;
      }
      case BodyKind::Polytope:
      case BodyKind::SupportSampled: {
        if (body.dim() == 2) {
          const Vec2 e(x[0] / xnorm, x[1] / xnorm);
          auto sp = std::make_shared<detail::SectionProfile>(
              detail::SectionProfile::from_polygon(body.polygon(), e));
          p.mu_ = [sp, xnorm](double s) {
            const double tau = s / xnorm;
            const double above = sp->tail_above(tau);
            const double below = sp->total() - sp->tail_above(-tau);
            return std::clamp((above + below) / sp->total(), 0.0, 1.0);
          };
        } else if (body.dim() == 3) {
          const Vec3 e = Vec3(x[0], x[1], x[2]) / xnorm;
          auto sp = std::make_shared<detail::SectionProfile>(
              detail::SectionProfile::from_polyhedron(body.polyhedron3(), e));
          p.mu_ = [sp, xnorm](double s) {
            const double tau = s / xnorm;
            const double above = sp->tail_above(tau);
            const double below = sp->total() - sp->tail_above(-tau);
            return std::clamp((above + below) / sp->total(), 0.0, 1.0);
          };
        } else {
          throw DimensionUnsupported("exact_slab: polytope backend needs n in {2,3}");
        }
        break;
      }
    }
    return p;
  }

  /// Monte Carlo backend: sorted |x.Y| over N uniform draws from K. The
  /// draws depend only on (body, seed), so profiles for x and c*x share
  /// them and scale exactly.
  static RearrangementProfile empirical(const Body& body, const Vec& x, std::size_t samples,
                                        std::uint64_t seed) {
    RearrangementProfile p(body, x, ProfileBackend::EmpiricalQuantile);
    p.seed_ = seed;
    std::mt19937_64 rng(seed);
    p.samples_.resize(samples);
    for (std::size_t i = 0; i < samples; ++i) {
      p.samples_[i] = std::fabs(x.dot(body.sample(rng)));
    }
    std::sort(p.samples_.begin(), p.samples_.end(), std::greater<double>());
    return p;
  }

  /// Arbitrary distribution function; test seam.
  static RearrangementProfile custom(const Body& body, const Vec& x,
                                     std::function<double(double)> mu) {
    RearrangementProfile p(body, x, ProfileBackend::Custom);
    p.mu_ = std::move(mu);
    return p;
  }

  /// Direct quantile evaluator; the tabulation's monotonicity guard is the
  /// only protection against a broken one.
  static RearrangementProfile custom_quantile(const Body& body, const Vec& x,
                                              std::function<double(double)> fstar) {
    RearrangementProfile p(body, x, ProfileBackend::Custom);
    p.quantile_ = std::move(fstar);
    return p;
  }

  const Body& body() const { return body_; }
  const Vec& x() const { return x_; }
  ProfileBackend backend() const { return backend_; }
  std::uint64_t seed() const { return seed_; }

  /// Upper bound R_K |x| on |f|; f* vanishes beyond it.
  double f_max() const { return f_max_; }

  /// mu_f(s) = mu^K({ y : |x.y| > s }).
  SlabVolumeResult distribution(double s) const {
    if (s < 0.0) throw DomainError("distribution: threshold must be nonnegative");
    SlabVolumeResult r;
    r.threshold = s;
    if (backend_ == ProfileBackend::EmpiricalQuantile) {
      // samples are sorted descending; lower_bound yields the first <= s
      const auto it =
          std::lower_bound(samples_.begin(), samples_.end(), s, std::greater<double>());
      const double above = static_cast<double>(it - samples_.begin());
      const double n = static_cast<double>(samples_.size());
      r.value = above / n;
      r.error = std::sqrt(std::max(r.value * (1.0 - r.value), 0.0) / n);
    } else {
      r.value = std::clamp(mu_(s), 0.0, 1.0);
      r.error = 0.0;
    }
    return r;
  }

  /// f*(t) = inf{ s >= 0 : mu_f(s) <= t }, by bisection to absolute
  /// tolerance 1e-9 (order statistics for the empirical backend).
  double rearrangement(double t) const {
    if (!(t > 0.0 && t < 1.0)) throw DomainError("rearrangement: t must lie in (0,1)");
    if (quantile_) return quantile_(t);
    if (backend_ == ProfileBackend::EmpiricalQuantile) {
      const std::size_t n = samples_.size();
      const std::size_t k = static_cast<std::size_t>(
          std::min<double>(n, std::ceil(t * static_cast<double>(n))));
      return samples_[k == 0 ? 0 : k - 1];
    }
    double lo = 0.0;
    double hi = f_max_;
    if (mu_(lo) <= t) return 0.0;
    while (hi - lo > 1e-9) {
      const double mid = 0.5 * (lo + hi);
      if (mu_(mid) <= t) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return 0.5 * (lo + hi);
  }

  /// Nonincreasing tabulation of f* at cell midpoints (j+1/2)/g. Small
  /// backend wobble (<= 1e-7) is clamped; larger increases raise.
  std::vector<std::pair<double, double>> breakpoints(int grid_size) const {
    if (grid_size < 2) throw DomainError("breakpoints: grid_size must be >= 2");
    const std::vector<double>& vals = tabulation(grid_size);
    std::vector<std::pair<double, double>> out(grid_size);
    for (int j = 0; j < grid_size; ++j) {
      out[j] = {(j + 0.5) / grid_size, vals[j]};
    }
    return out;
  }

  /// Cached midpoint tabulation used by the norm quadrature.
  const std::vector<double>& tabulation(int grid_size) const {
    if (grid_size < 2) throw DomainError("tabulation: grid_size must be >= 2");
    {
      std::lock_guard<std::mutex> lk(cache_->mutex);
      auto it = cache_->tabs.find(grid_size);
      if (it != cache_->tabs.end()) return *it->second;
    }
    auto vals = std::make_shared<std::vector<double>>();
    vals->resize(grid_size);
    for (int j = 0; j < grid_size; ++j) {
      (*vals)[j] = rearrangement((j + 0.5) / grid_size);
    }
    for (int j = 1; j < grid_size; ++j) {
      if ((*vals)[j] > (*vals)[j - 1] + 1e-7) {
        throw MonotonicityViolation("tabulation: f* increased by " +
                                    std::to_string((*vals)[j] - (*vals)[j - 1]) + " at cell " +
                                    std::to_string(j));
      }
      if ((*vals)[j] > (*vals)[j - 1]) (*vals)[j] = (*vals)[j - 1];
    }
    std::lock_guard<std::mutex> lk(cache_->mutex);
    auto [it, inserted] = cache_->tabs.emplace(grid_size, std::move(vals));
    return *it->second;
  }

 private:
  struct TabCache {
    std::mutex mutex;
    std::map<int, std::shared_ptr<const std::vector<double>>> tabs;
  };

  RearrangementProfile(const Body& body, const Vec& x, ProfileBackend backend)
      : body_(body), x_(x), backend_(backend), cache_(std::make_shared<TabCache>()) {
    if (x.size() != body.dim()) throw DomainError("profile: direction dimension mismatch");
    if (x.norm() < 1e-300) throw ZeroDirection("profile: x must be nonzero");
    // essential sup of |x.y|; exact support beats R_K |x| for polytopes
    f_max_ = std::max(body.support(x), body.support(-x));
  }

  Body body_;
  Vec x_;
  ProfileBackend backend_;
  double f_max_ = 0.0;
  std::function<double(double)> mu_;
  std::function<double(double)> quantile_;
  std::vector<double> samples_;
  std::uint64_t seed_ = 0;
  std::shared_ptr<TabCache> cache_;
};

/// mu^K({ y : |x.y| > s }) with the best available backend: exact where
/// implemented, Monte Carlo (with reported 1-sigma error) otherwise.
inline SlabVolumeResult distribution(const Body& body, const Vec& x, double s,
                                     std::size_t mc_samples = 1000000,
                                     std::uint64_t seed = 20240811) {
  if (x.norm() < 1e-300) throw ZeroDirection("distribution: x must be nonzero");
  try {
    return RearrangementProfile::exact_slab(body, x).distribution(s);
  } catch (const DimensionUnsupported&) {
    return RearrangementProfile::empirical(body, x, mc_samples, seed).distribution(s);
  }
}

}  // namespace olcb
