#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "olcb/error.hpp"
#include "olcb/numeric.hpp"
#include "olcb/rearrangement.hpp"

namespace olcb {

/// Convex phi : [0,inf) -> [0,inf) with phi(0)=0, phi>0 on (0,inf) and an
/// evaluable inverse.
class OrliczFunction {
 public:
  enum class Family { Power, ScaledExp, PiecewiseLinearConvex };

  static OrliczFunction power(double p) {
    if (p < 1.0) throw ValidationError("OrliczFunction::power: need p >= 1");
    OrliczFunction f;
    f.family_ = Family::Power;
    f.p_ = p;
    if (p == 1.0 || p == 2.0 || p == 3.0 || p == 4.0 || p == 5.0) {
      f.int_p_ = static_cast<int>(p);
    }
    f.name_ = "power(" + format_g12(p) + ")";
    return f;
  }

  static OrliczFunction scaled_exp(double c) {
    if (c <= 0.0) throw ValidationError("OrliczFunction::scaled_exp: need c > 0");
    OrliczFunction f;
    f.family_ = Family::ScaledExp;
    f.c_ = c;
    f.name_ = "scaled_exp(" + format_g12(c) + ")";
    return f;
  }

  /// Piecewise linear convex through (0,0) and the given (s,v) breakpoints
  /// (s increasing, v increasing, slopes nondecreasing); extended past the
  /// last breakpoint with the final slope.
  static OrliczFunction piecewise_linear(std::vector<std::pair<double, double>> pts) {
    OrliczFunction f;
    f.family_ = Family::PiecewiseLinearConvex;
    if (pts.empty()) throw ValidationError("piecewise_linear: need at least one breakpoint");
    std::sort(pts.begin(), pts.end());
    if (pts.front().first <= 0.0) {
      throw ValidationError("piecewise_linear: breakpoints must have s > 0");
    }
    double prev_s = 0.0, prev_v = 0.0, prev_slope = 0.0;
    for (const auto& [s, v] : pts) {
      const double slope = (v - prev_v) / (s - prev_s);
      if (!(slope > 0.0)) throw ValidationError("piecewise_linear: slopes must be positive");
      if (slope + 1e-12 < prev_slope) {
        throw ValidationError("piecewise_linear: slopes must be nondecreasing (convexity)");
      }
      prev_s = s;
      prev_v = v;
      prev_slope = slope;
    }
    f.pl_pts_ = std::move(pts);
    f.name_ = "piecewise_linear(" + std::to_string(f.pl_pts_.size()) + " pts)";
    return f;
  }

  Family family() const { return family_; }
  const std::string& name() const { return name_; }
  double power_exponent() const { return p_; }

  double operator()(double s) const {
    if (s < 0.0) throw DomainError("OrliczFunction: negative argument");
    switch (family_) {
      case Family::Power:
        switch (int_p_) {
          case 1: return s;
          case 2: return s * s;
          case 3: return s * s * s;
          case 4: {
            const double q = s * s;
            return q * q;
          }
          case 5: {
            const double q = s * s;
            return q * q * s;
          }
          default: return std::pow(s, p_);
        }
      case Family::ScaledExp:
        // cap the exponent; saturated values are treated as "> 1" upstream
        return std::expm1(std::min(c_ * s, 700.0));
      case Family::PiecewiseLinearConvex: {
        double prev_s = 0.0, prev_v = 0.0;
        for (const auto& [bs, bv] : pl_pts_) {
          if (s <= bs) return prev_v + (s - prev_s) * (bv - prev_v) / (bs - prev_s);
          prev_s = bs;
          prev_v = bv;
        }
        const auto& [ls, lv] = pl_pts_.back();
        const double slope = pl_pts_.size() == 1
                                 ? lv / ls
                                 : (lv - pl_pts_[pl_pts_.size() - 2].second) /
                                       (ls - pl_pts_[pl_pts_.size() - 2].first);
        return lv + slope * (s - ls);
      }
    }
    throw Error("OrliczFunction: unreachable");
  }

  double inverse(double a) const {
    if (a < 0.0) throw DomainError("OrliczFunction::inverse: negative argument");
    switch (family_) {
      case Family::Power:
        return std::pow(a, 1.0 / p_);
      case Family::ScaledExp:
        return std::log1p(a) / c_;
      case Family::PiecewiseLinearConvex: {
        double prev_s = 0.0, prev_v = 0.0;
        for (const auto& [bs, bv] : pl_pts_) {
          if (a <= bv) return prev_s + (a - prev_v) * (bs - prev_s) / (bv - prev_v);
          prev_s = bs;
          prev_v = bv;
        }
        const auto& [ls, lv] = pl_pts_.back();
        const double slope = pl_pts_.size() == 1
                                 ? lv / ls
                                 : (lv - pl_pts_[pl_pts_.size() - 2].second) /
                                       (ls - pl_pts_[pl_pts_.size() - 2].first);
        return ls + (a - lv) / slope;
      }
    }
    throw Error("OrliczFunction::inverse: unreachable");
  }

 private:
  OrliczFunction() = default;

  Family family_ = Family::Power;
  double p_ = 1.0;
  int int_p_ = 0;
  double c_ = 1.0;
  std::vector<std::pair<double, double>> pl_pts_;
  std::string name_;
};

/// Nonincreasing positive weight on (0,1) with an exact partial integral
/// W(a,b). Only families with closed-form W are admitted, so singular
/// weights never meet numeric quadrature.
class WeightFunction {
 public:
  enum class Family { Constant, PowerSingular, PiecewiseConstantNonincreasing };

  static WeightFunction constant() {
    WeightFunction w;
    w.family_ = Family::Constant;
    w.name_ = "constant";
    return w;
  }

  static WeightFunction power_singular(double beta) {
    if (beta < 0.0 || beta >= 1.0) {
      throw ValidationError("power_singular: need 0 <= beta < 1");
    }
    WeightFunction w;
    w.family_ = Family::PowerSingular;
    w.beta_ = beta;
    w.name_ = "power_singular(" + format_g12(beta) + ")";
    return w;
  }

  /// Steps given as (end, value) pairs with ends increasing to 1 and
  /// values positive nonincreasing; value v_k holds on (end_{k-1}, end_k].
  static WeightFunction piecewise_constant(std::vector<std::pair<double, double>> steps) {
    if (steps.empty()) throw ValidationError("piecewise_constant: need at least one step");
    std::sort(steps.begin(), steps.end());
    if (std::fabs(steps.back().first - 1.0) > 1e-12) {
      throw ValidationError("piecewise_constant: last step must end at 1");
    }
    double prev_end = 0.0;
    double prev_val = std::numeric_limits<double>::infinity();
    for (const auto& [end, val] : steps) {
      if (end <= prev_end) throw ValidationError("piecewise_constant: ends must increase");
      if (!(val > 0.0)) throw ValidationError("piecewise_constant: values must be positive");
      if (val > prev_val + 1e-12) {
        throw ValidationError("piecewise_constant: values must be nonincreasing");
      }
      prev_end = end;
      prev_val = val;
    }
    WeightFunction w;
    w.family_ = Family::PiecewiseConstantNonincreasing;
    w.steps_ = std::move(steps);
    w.name_ = "piecewise_constant(" + std::to_string(w.steps_.size()) + " steps)";
    return w;
  }

  Family family() const { return family_; }
  const std::string& name() const { return name_; }

  /// omega(t) on (0,1).
  double value(double t) const {
    if (!(t > 0.0 && t < 1.0)) throw DomainError("WeightFunction: t must lie in (0,1)");
    switch (family_) {
      case Family::Constant:
        return 1.0;
      case Family::PowerSingular:
        return std::pow(t, -beta_);
      case Family::PiecewiseConstantNonincreasing:
        for (const auto& [end, val] : steps_) {
          if (t <= end) return val;
        }
        return steps_.back().second;
    }
    throw Error("WeightFunction: unreachable");
  }

  /// W(a,b) = integral of omega over (a,b), closed form.
  double mass(double a, double b) const {
    if (a < 0.0 || b > 1.0 + 1e-12 || a > b) throw DomainError("WeightFunction::mass: bad range");
    switch (family_) {
      case Family::Constant:
        return b - a;
      case Family::PowerSingular: {
        const double e = 1.0 - beta_;
        return (std::pow(b, e) - std::pow(a, e)) / e;
      }
      case Family::PiecewiseConstantNonincreasing: {
        double acc = 0.0;
        double prev_end = 0.0;
        for (const auto& [end, val] : steps_) {
          const double lo = std::max(a, prev_end);
          const double hi = std::min(b, end);
          if (hi > lo) acc += val * (hi - lo);
          prev_end = end;
        }
        return acc;
      }
    }
    throw Error("WeightFunction::mass: unreachable");
  }

  double total() const { return mass(0.0, 1.0); }

  /// Per-cell masses W(j/g, (j+1)/g), shared across solves.
  const std::vector<double>& cell_masses(int cells) const {
    std::lock_guard<std::mutex> lk(cache_->mutex);
    auto it = cache_->masses.find(cells);
    if (it != cache_->masses.end()) return *it->second;
    auto vec = std::make_shared<std::vector<double>>();
    vec->resize(cells);
    for (int j = 0; j < cells; ++j) {
      (*vec)[j] = mass(static_cast<double>(j) / cells, static_cast<double>(j + 1) / cells);
    }
    auto [jt, inserted] = cache_->masses.emplace(cells, std::move(vec));
    return *jt->second;
  }

 private:
  struct MassCache {
    std::mutex mutex;
    std::map<int, std::shared_ptr<const std::vector<double>>> masses;
  };

  WeightFunction() : cache_(std::make_shared<MassCache>()) {}

  Family family_ = Family::Constant;
  double beta_ = 0.0;
  std::vector<std::pair<double, double>> steps_;
  std::string name_;
  std::shared_ptr<MassCache> cache_;
};

/// Values at or above this are "saturated": the functional is certainly
/// greater than 1 and its exact magnitude is irrelevant.
constexpr double kPhiSaturation = 1e12;

namespace detail {

inline double phi_sum(const std::vector<double>& fstar, const std::vector<double>& masses,
                      const OrliczFunction& phi, double lambda) {
  double sum = 0.0;
  const std::size_t g = fstar.size();
  for (std::size_t j = 0; j < g; ++j) {
    sum += phi(fstar[j] / lambda) * masses[j];
    if (sum >= kPhiSaturation) return sum;  // saturated; treated as "> 1"
  }
  return sum;
}

}  // namespace detail

/// Phi(lambda) = integral over (0,1) of phi(f*(t)/lambda) omega(t) dt,
/// midpoint-composite on the f* tabulation with exact weight mass per cell.
inline double phi_functional(const RearrangementProfile& profile, const OrliczFunction& phi,
                             const WeightFunction& omega, double lambda, int cells = 4096) {
  if (!(lambda > 0.0)) throw DomainError("phi_functional: lambda must be positive");
  return detail::phi_sum(profile.tabulation(cells), omega.cell_masses(cells), phi, lambda);
}

/// f*_{u,B}(1/2) on the unit n-ball; direction independent. Cached.
inline double ball_half_rearrangement(int n) {
  static std::mutex mtx;
  static std::map<int, double> cache;
  {
    std::lock_guard<std::mutex> lk(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
  }
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (2.0 * ball_cap_fraction(n, mid) <= 0.5) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double v = 0.5 * (lo + hi);
  std::lock_guard<std::mutex> lk(mtx);
  cache[n] = v;
  return v;
}

/// Support-function sandwich bounds for a unit direction:
///   r_K f*_B(1/2) / phi^{-1}(1 / W(0, c(n,K)))  <=  h  <=
///   R_K / phi^{-1}(1 / W(0,1)),   c(n,K) = r_K^n omega_n / (2 |K|).
inline std::pair<double, double> support_sandwich_bounds(const Body& body, const Vec& x,
                                                const OrliczFunction& phi,
                                                const WeightFunction& omega) {
  if (std::fabs(x.norm() - 1.0) > 1e-9) {
    throw DomainError("support_sandwich_bounds: x must be a unit vector");
  }
  const auto [r, big_r] = body.inradius_outradius();
  const double vol = body.volume().value;
  const double c = std::pow(r, body.dim()) * unit_ball_volume(body.dim()) / (2.0 * vol);
  if (c > 0.5 + 1e-9) {
    throw Error("support_sandwich_bounds: c(n,K) exceeded 1/2; geometry is inconsistent");
  }
  const double lower = r * ball_half_rearrangement(body.dim()) / phi.inverse(1.0 / omega.mass(0.0, c));
  const double upper = big_r / phi.inverse(1.0 / omega.total());
  return {lower, upper};
}

struct NormSolveOptions {
  int cells = 4096;
  bool richardson = true;
  double residual_tol = 1e-7;
  int inject_negate_cell = -1;  // harness self-test: corrupts one weight cell
};

struct NormSolveReport {
  double lambda = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double residual = 0.0;
  int quadrature_cells = 0;
  ProfileBackend backend = ProfileBackend::ExactSlab;
  double quadrature_disagreement = 0.0;
  bool quadrature_flagged = false;
  double lambda_uncertainty = 0.0;
  int widenings = 0;
};

/// Solves Phi(lambda) = 1 by bisection on the strictly decreasing Phi.
/// The initial bracket comes from the support sandwich bounds scaled by |x|; endpoints are
/// doubled/halved when quadrature error makes them disagree.
inline NormSolveReport norm_solve(const RearrangementProfile& profile, const OrliczFunction& phi,
                                  const WeightFunction& omega,
                                  const NormSolveOptions& opts = {}) {
  const std::vector<double>& fstar = profile.tabulation(opts.cells);
  const std::vector<double>* masses = &omega.cell_masses(opts.cells);
  std::vector<double> injected;
  if (opts.inject_negate_cell >= 0 &&
      opts.inject_negate_cell < static_cast<int>(masses->size())) {
    injected = *masses;
    injected[opts.inject_negate_cell] = -injected[opts.inject_negate_cell];
    masses = &injected;
  }
  auto Phi = [&](double lambda) { return detail::phi_sum(fstar, *masses, phi, lambda); };

  const double xnorm = profile.x().norm();
  const auto [unit_lo, unit_hi] =
      support_sandwich_bounds(profile.body(), profile.x() / xnorm, phi, omega);
  double lo = xnorm * unit_lo;
  double hi = xnorm * unit_hi;
  if (!(lo > 0.0) || !std::isfinite(hi) || lo > hi) {
    lo = std::max(lo, 1e-12 * hi);
    if (!(lo > 0.0 && lo <= hi)) throw BracketFailure("norm_solve: empty initial bracket");
  }

  NormSolveReport rep;
  rep.quadrature_cells = opts.cells;
  rep.backend = profile.backend();

  int widen = 0;
  while (Phi(hi) > 1.0) {
    hi *= 2.0;
    if (++widen > 60) throw BracketFailure("norm_solve: no upper bracket after 60 doublings");
  }
  while (Phi(lo) < 1.0) {
    lo *= 0.5;
    if (++widen > 60) throw BracketFailure("norm_solve: no lower bracket after 60 halvings");
  }
  rep.widenings = widen;

  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (Phi(mid) >= 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double lambda = 0.5 * (lo + hi);
  rep.lambda = lambda;
  rep.bracket_lo = lo;
  rep.bracket_hi = hi;
  const double phi_at = Phi(lambda);
  rep.residual = std::fabs(phi_at - 1.0);
  if (rep.residual > opts.residual_tol) {
    throw BracketFailure("norm_solve: residual " + format_g12(rep.residual) +
                         " exceeds tolerance (broken phi/omega pair?)");
  }

  // quadrature sensitivity: re-run at twice the cells and convert the
  // disagreement into a lambda uncertainty through the local slope
  const double h = 1e-6 * lambda;
  const double slope = (Phi(lambda + h) - Phi(lambda - h)) / (2.0 * h);
  double disagreement = 0.0;
  if (opts.richardson) {
    const std::vector<double>& fstar2 = profile.tabulation(2 * opts.cells);
    const std::vector<double>& masses2 = omega.cell_masses(2 * opts.cells);
    disagreement = std::fabs(detail::phi_sum(fstar2, masses2, phi, lambda) - phi_at);
    rep.quadrature_disagreement = disagreement;
    rep.quadrature_flagged = disagreement > 1e-6;
  }
  rep.lambda_uncertainty =
      (hi - lo) + (std::fabs(slope) > 1e-300 ? disagreement / std::fabs(slope) : 0.0);
  return rep;
}

}  // namespace olcb
