#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>

#include "olcb/error.hpp"

namespace olcb {

// Centralized tolerances. Geometric predicates use an absolute epsilon,
// comparisons of computed reals a relative one.
constexpr double kGeomEps = 1e-9;
constexpr double kRelTol = 1e-6;
constexpr double kUnitNormTol = 1e-12;

constexpr double kPi = 3.14159265358979323846;

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) {
  if (n < 1) throw DomainError("unit_ball_volume: n must be positive");
  return std::pow(kPi, 0.5 * n) / std::tgamma(1.0 + 0.5 * n);
}

namespace detail {

// 32-node Gauss-Legendre abscissas/weights on [-1,1], positive half.
// Reflected for the negative half.
inline constexpr double kGL32X[16] = {
    0.0483076656877383162, 0.1444719615827964934, 0.2392873622521370745,
    0.3318686022821276498, 0.4213512761306353454, 0.5068999089322293900,
    0.5877157572407623290, 0.6630442669302152010, 0.7321821187402896804,
    0.7944837959679424069, 0.8493676137325699701, 0.8963211557660521240,
    0.9349060759377396892, 0.9647622555875064308, 0.9856115115452683354,
    0.9972638618494815635};
inline constexpr double kGL32W[16] = {
    0.0965400885147278006, 0.0956387200792748594, 0.0938443990808045654,
    0.0911738786957638847, 0.0876520930044038111, 0.0833119242269467552,
    0.0781938957870703065, 0.0723457941088485062, 0.0658222227763618468,
    0.0586840934785355471, 0.0509980592623761762, 0.0428358980222266807,
    0.0342738629130214331, 0.0253920653092620595, 0.0162743947309056706,
    0.0070186100094700966};

template <typename F>
double gauss_legendre_32(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < 16; ++i) {
    sum += kGL32W[i] * (f(c + h * kGL32X[i]) + f(c - h * kGL32X[i]));
  }
  return h * sum;
}

}  // namespace detail

/// Fraction of the unit n-ball lying in the cap {y_1 > a}, a in [0,1].
inline double ball_cap_fraction(int n, double a) {
  if (a <= 0.0) return 0.5;
  if (a >= 1.0) return 0.0;
  if (n == 1) return 0.5 * (1.0 - a);
  if (n == 2) return (std::acos(a) - a * std::sqrt(1.0 - a * a)) / kPi;
  if (n == 3) return 0.25 * (1.0 - a) * (1.0 - a) * (2.0 + a);
  // General n: integrate the slice volumes; composite GL handles the
  // endpoint derivative singularity of (1-t^2)^((n-1)/2).
  const double expo = 0.5 * (n - 1);
  auto slice = [&](double t) { return std::pow(1.0 - t * t, expo); };
  double integral = 0.0;
  const int panels = 8;
  for (int k = 0; k < panels; ++k) {
    const double lo = a + (1.0 - a) * k / panels;
    const double hi = a + (1.0 - a) * (k + 1) / panels;
    integral += detail::gauss_legendre_32(slice, lo, hi);
  }
  const double ratio = unit_ball_volume(n - 1) / unit_ball_volume(n);
  return ratio * integral;
}

namespace detail {

inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

/// Regularized upper incomplete gamma Q(a,x) = Gamma(a,x)/Gamma(a).
inline double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw DomainError("gamma_q: invalid arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_contfrac(a, x);
}

/// Survival function of the chi-square distribution with k dof.
inline double chi_square_sf(double x, double k) { return gamma_q(0.5 * k, 0.5 * x); }

/// Fixed 12-significant-digit float formatting used by all file outputs,
/// so reruns are byte-identical.
inline std::string format_g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

/// SplitMix64 step; used to derive independent per-trial seeds.
inline std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace olcb
