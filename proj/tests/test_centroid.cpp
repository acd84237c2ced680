#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "olcb/body.hpp"
#include "olcb/centroid.hpp"
#include "olcb/random_bodies.hpp"
#include "support/moments.hpp"

using namespace olcb;
using Catch::Approx;

namespace {

Body unit_square() {
  Mat v(4, 2);
  v << -1, -1, 1, -1, 1, 1, -1, 1;
  return Body::polytope(v);
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

const double kGammaBallRadius = 4.0 / (3.0 * kPi);

CentroidOptions fast_options(int grid = 64) {
  CentroidOptions opts;
  opts.grid_size = grid;
  opts.solver.cells = 1024;
  return opts;
}

}  // namespace

TEST_CASE("centroid support closed forms", "[centroid]") {
  const auto phi1 = OrliczFunction::power(1);
  const auto omega = WeightFunction::constant();
  const Body disk = Body::ball(2, 1.0);
  CHECK(centroid_support(disk, phi1, omega, vec2(1, 0)) ==
        Approx(kGammaBallRadius).epsilon(3e-7));
  // homogeneity in the direction argument
  CHECK(centroid_support(disk, phi1, omega, vec2(2, 0)) ==
        Approx(2.0 * kGammaBallRadius).epsilon(3e-7));
  CHECK(centroid_support(unit_square(), OrliczFunction::power(2), omega, vec2(1, 0)) ==
        Approx(1.0 / std::sqrt(3.0)).epsilon(1e-8));
}

TEST_CASE("centroid body of the ball: regular polygon geometry", "[centroid]") {
  const int m = 128;
  const CentroidBody gamma(Body::ball(2, 1.0), OrliczFunction::power(1),
                           WeightFunction::constant(), fast_options(m));
  REQUIRE(gamma.grid_size() == m);
  for (int i = 0; i < m; ++i) {
    CHECK(gamma.supports()[i] == Approx(kGammaBallRadius).epsilon(3e-6));
  }
  // outer polytope is the circumscribed m-gon: circumradius h / cos(pi/m)
  const auto [r, R] = gamma.outer().inradius_outradius();
  CHECK(r == Approx(kGammaBallRadius).epsilon(3e-6));
  double circum = 0.0;
  for (const auto& v : gamma.outer().polygon()) circum = std::max(circum, v.norm());
  CHECK(circum == Approx(kGammaBallRadius / std::cos(kPi / m)).epsilon(3e-6));
}

TEST_CASE("grid supports permute under rotation", "[centroid]") {
  const Body square = unit_square();
  const auto phi = OrliczFunction::power(1);
  const auto omega = WeightFunction::constant();
  const int m = 16;
  const CentroidBody gamma(square, phi, omega, fast_options(m));
  // rotate by one grid cell: supports permute
  const double th = 2.0 * kPi / m;
  Mat rot(2, 2);
  rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  const CentroidBody gamma_rot(square.apply_linear(rot), phi, omega, fast_options(m));
  for (int i = 0; i < m; ++i) {
    CHECK(gamma_rot.supports()[(i + 1) % m] == Approx(gamma.supports()[i]).epsilon(1e-6));
  }
}

TEST_CASE("ellipsoid centroid body equals the mapped ball's", "[centroid]") {
  Mat shape(2, 2);
  shape << 4, 0, 0, 1;
  const Body ell = Body::ellipsoid(shape);
  const auto phi = OrliczFunction::power(1);
  const auto omega = WeightFunction::constant();
  Mat a(2, 2);
  a << 2, 0, 0, 1;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi);
  for (int i = 0; i < 8; ++i) {
    const Vec u = vec2(std::cos(ang(rng)), std::sin(ang(rng)));
    const double lhs = centroid_support(ell, phi, omega, u);
    const double rhs = centroid_support(Body::ball(2, 1.0), phi, omega, a.transpose() * u);
    CHECK(lhs == Approx(rhs).epsilon(1e-6));
  }
}

TEST_CASE("volume ratio of the disk with a shrinking bracket", "[centroid]") {
  const auto phi = OrliczFunction::power(1);
  const auto omega = WeightFunction::constant();
  const double exact_ratio = kGammaBallRadius * kGammaBallRadius;

  const auto vr90 = volume_ratio(Body::ball(2, 1.0), phi, omega, fast_options(90));
  const auto vr360 = volume_ratio(Body::ball(2, 1.0), phi, omega, fast_options(360));
  CHECK(vr90.inner_ratio() <= exact_ratio + 1e-12);
  CHECK(vr90.outer_ratio() >= exact_ratio - 1e-12);
  CHECK(vr360.inner_ratio() <= exact_ratio + 1e-12);
  CHECK(vr360.outer_ratio() >= exact_ratio - 1e-12);
  // bracket width shrinks roughly like 1/M^2
  const double w90 = vr90.outer_ratio() - vr90.inner_ratio();
  const double w360 = vr360.outer_ratio() - vr360.inner_ratio();
  CHECK(w360 < w90 / 8.0);
  CHECK(w360 < 2e-4);

  // scale invariance: c K has the same ratio
  const auto vr_scaled = volume_ratio(Body::ball(2, 2.5), phi, omega, fast_options(90));
  CHECK(vr_scaled.outer_ratio() == Approx(vr90.outer_ratio()).epsilon(1e-10));

  // the square's ratio strictly exceeds the disk's
  const auto vr_square = volume_ratio(unit_square(), phi, omega, fast_options(360));
  CHECK(vr_square.inner_ratio() > vr360.outer_ratio());
}

TEST_CASE("grid refinement tightens both volume brackets", "[centroid]") {
  const auto phi = OrliczFunction::power(1);
  const auto omega = WeightFunction::constant();
  std::mt19937_64 rng(9);
  const Body poly = random_polygon(rng, 9);
  double prev_inner = 0.0;
  double prev_outer = std::numeric_limits<double>::infinity();
  for (int m : {60, 120, 240}) {
    const auto vr = volume_ratio(poly, phi, omega, fast_options(m));
    CHECK(vr.inner_volume >= prev_inner - 1e-9);
    CHECK(vr.outer_volume <= prev_outer + 1e-9);
    prev_inner = vr.inner_volume;
    prev_outer = vr.outer_volume;
  }
}

TEST_CASE("equivariance checks at the contract tolerance", "[centroid]") {
  const auto phi = OrliczFunction::power(1);
  const auto omega = WeightFunction::constant();
  const Body square = unit_square();
  const Mat dirs = uniform_circle_grid(8);

  CHECK(equivariance_check(square, Mat::Identity(2, 2), phi, omega, dirs) == Approx(0.0));
  CHECK(equivariance_check(Body::ball(2, 1.0), 3.0 * Mat::Identity(2, 2), phi, omega, dirs) <=
        1e-6);
  Mat shear(2, 2);
  shear << 1, 1, 0, 1;
  CHECK(equivariance_check(square, shear, phi, omega, dirs, fast_options()) <= 1e-5);
}

TEST_CASE("continuity in the body: support shift is O(perturbation)", "[centroid]") {
  const auto phi = OrliczFunction::power(1);
  const auto omega = WeightFunction::constant();
  std::mt19937_64 rng(21);
  const Body base = random_polygon(rng, 8);
  const Vec u = vec2(0.6, 0.8);
  const double h0 = centroid_support(base, phi, omega, u);
  double shift[2];
  int k = 0;
  for (const double delta : {1e-2, 1e-3}) {
    Mat verts = base.vertices();
    for (int i = 0; i < verts.rows(); ++i) {
      verts(i, 0) += delta * ((i % 2) ? 1.0 : -0.6);
      verts(i, 1) += delta * ((i % 3) ? -0.8 : 0.4);
    }
    shift[k++] = std::fabs(centroid_support(Body::polytope(verts), phi, omega, u) - h0);
  }
  CHECK(shift[0] < 0.2);
  const double ratio = shift[0] / std::max(shift[1], 1e-18);
  CHECK(ratio > 3.0);
  CHECK(ratio < 35.0);
}

TEST_CASE("continuity in phi: nearby exponents give nearby supports", "[centroid]") {
  const auto omega = WeightFunction::constant();
  const Body square = unit_square();
  const Vec u = vec2(1, 0);
  const double base = centroid_support(square, OrliczFunction::power(2), omega, u);
  for (const double dp : {-1e-3, 1e-3}) {
    const double shifted = centroid_support(square, OrliczFunction::power(2 + dp), omega, u);
    CHECK(std::fabs(shifted - base) <= 1e-2);
  }
}

TEST_CASE("Lp cross validation on random polygons", "[centroid]") {
  const auto omega = WeightFunction::constant();
  std::mt19937_64 rng(14);
  for (int b = 0; b < 3; ++b) {
    const Body poly = random_polygon(rng, 7 + b);
    for (const int p : {1, 2}) {
      const Vec u = vec2(std::cos(0.31 + b), std::sin(0.31 + b));
      const double lam = centroid_support(poly, OrliczFunction::power(p), omega, u);
      CHECK(lam == Approx(oracle::polygon_lp_norm(poly, u, p)).epsilon(1e-5));
    }
  }
}

TEST_CASE("centroid body invariants hold on a sampled build", "[centroid]") {
  std::mt19937_64 rng(3);
  const Body poly = random_polygon(rng, 10);
  const auto phi = OrliczFunction::scaled_exp(1.0);
  const auto omega = WeightFunction::power_singular(0.5);
  const CentroidBody gamma(poly, phi, omega, fast_options(64));
  const auto [lower, upper] = support_sandwich_bounds(poly, vec2(1, 0), phi, omega);
  for (int i = 0; i < gamma.grid_size(); ++i) {
    CHECK(gamma.supports()[i] > 0.0);
    CHECK(gamma.supports()[i] >= lower - 1e-9);
    CHECK(gamma.supports()[i] <= upper + 1e-6);
    CHECK(gamma.supports()[i] <=
          gamma.outer().support(gamma.directions().row(i).transpose()) + 1e-9);
  }
}

TEST_CASE("3D centroid body of the ball", "[centroid][slow]") {
  CentroidOptions opts;
  opts.grid_size = 162;
  opts.solver.cells = 1024;
  const auto phi = OrliczFunction::power(1);
  const auto omega = WeightFunction::constant();
  const auto vr = volume_ratio(Body::ball(3, 1.0), phi, omega, opts);
  // Gamma B = (3/8) B in 3D; ratio = (3/8)^3
  const double exact = std::pow(3.0 / 8.0, 3);
  CHECK(vr.outer_ratio() >= exact - 1e-9);
  CHECK(vr.inner_ratio() <= exact + 1e-9);
  CHECK(vr.outer_ratio() == Approx(exact).epsilon(0.05));
  CHECK(!vr.inner_certified);
}
