#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "olcb/body.hpp"
#include "olcb/random_bodies.hpp"
#include "olcb/steiner.hpp"

using namespace olcb;
using Catch::Approx;

namespace {

Body unit_square() {
  Mat v(4, 2);
  v << -1, -1, 1, -1, 1, 1, -1, 1;
  return Body::polytope(v);
}

Body shifted_triangle() {
  // (0,0), (1,0), (0,1) moved so the origin is interior
  Mat v(3, 2);
  v << -0.25, -0.25, 0.75, -0.25, -0.25, 0.75;
  return Body::polytope(v);
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

std::vector<Vec2> canonical_vertices(const Body& b) {
  std::vector<Vec2> v;
  for (int i = 0; i < b.vertices().rows(); ++i) {
    v.emplace_back(b.vertices()(i, 0), b.vertices()(i, 1));
  }
  std::sort(v.begin(), v.end(), [](const Vec2& a, const Vec2& c) {
    return a.x() < c.x() || (a.x() == c.x() && a.y() < c.y());
  });
  return v;
}

}  // namespace

TEST_CASE("square is fixed by coordinate symmetrization", "[steiner]") {
  const Body square = unit_square();
  const Body sym = steiner_symmetrize(square, vec2(0, 1)).body;
  CHECK(sym.volume_exact() == Approx(4.0));
  const auto a = canonical_vertices(square);
  const auto b = canonical_vertices(sym);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i] - b[i]).norm() < 1e-12);
  }
}

TEST_CASE("triangle symmetrizes to the centered wedge", "[steiner]") {
  // the triangle (0,0),(1,0),(0,1) along e2 becomes |t| <= (1-x)/2
  Mat v(3, 2);
  v << 0, 0, 1, 0, 0, 1;
  Mat w = v;
  for (int i = 0; i < 3; ++i) w(i, 0) -= 0.25;  // origin interior after shift in x only
  for (int i = 0; i < 3; ++i) w(i, 1) -= 0.25;
  const Body tri = Body::polytope(w);
  const Body sym = steiner_symmetrize(tri, vec2(0, 1)).body;
  CHECK(sym.volume_exact() == Approx(0.5));
  // expected vertices in the shifted x-coordinate: (-0.25, ±0.5), (0.75, 0)
  const auto verts = canonical_vertices(sym);
  REQUIRE(verts.size() == 3);
  CHECK(verts[0].x() == Approx(-0.25));
  CHECK(verts[0].y() == Approx(-0.5));
  CHECK(verts[1].x() == Approx(-0.25));
  CHECK(verts[1].y() == Approx(0.5));
  CHECK(verts[2].x() == Approx(0.75));
  CHECK(verts[2].y() == Approx(0.0).margin(1e-12));
}

TEST_CASE("volume preservation across random polygons and directions", "[steiner]") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi);
  for (int trial = 0; trial < 20; ++trial) {
    const Body poly = random_polygon(rng, 5 + trial % 9);
    const double th = ang(rng);
    const Vec u = vec2(std::cos(th), std::sin(th));
    const Body sym = steiner_symmetrize(poly, u).body;
    CHECK(sym.volume_exact() == Approx(poly.volume_exact()).epsilon(1e-12));
  }
}

TEST_CASE("result is u-symmetric and sigma is concave", "[steiner]") {
  std::mt19937_64 rng(4);
  const Body poly = random_polygon(rng, 11);
  const Vec u = vec2(std::cos(1.1), std::sin(1.1));
  const Body sym = steiner_symmetrize(poly, u).body;
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const Vec w = vec2(-u[1], u[0]);
  for (int i = 0; i < 40; ++i) {
    const Vec x = unif(rng) * w + unif(rng) * u;
    CHECK(sym.support(x) == Approx(sym.support(x - 2.0 * u.dot(x) * u)).epsilon(1e-9));
  }
  // sigma concavity by midpoint sampling
  const double lo = -poly.support(-w) * 0.95;
  const double hi = poly.support(w) * 0.95;
  for (int i = 0; i < 40; ++i) {
    const double a = lo + (hi - lo) * 0.5 * (1 + unif(rng));
    const double b = lo + (hi - lo) * 0.5 * (1 + unif(rng));
    try {
      const auto [sa, ma] = sigma_midline_2d(poly, u, a);
      const auto [sb, mb] = sigma_midline_2d(poly, u, b);
      const auto [sm, mm] = sigma_midline_2d(poly, u, 0.5 * (a + b));
      CHECK(sm >= 0.5 * (sa + sb) - 1e-9);
    } catch (const BoundaryPoint&) {
      // sampled outside the projection; skip
    }
  }
}

TEST_CASE("idempotence after canonicalization", "[steiner]") {
  std::mt19937_64 rng(10);
  const Body poly = random_polygon(rng, 9);
  const Vec u = vec2(std::cos(0.37), std::sin(0.37));
  const Body once = steiner_symmetrize(poly, u).body;
  const Body twice = steiner_symmetrize(once, u).body;
  const auto a = canonical_vertices(once);
  const auto b = canonical_vertices(twice);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i] - b[i]).norm() < 1e-9);
  }
}

TEST_CASE("sigma and midline reproduce the body pointwise", "[steiner]") {
  std::mt19937_64 rng(6);
  const Body poly = random_polygon(rng, 8);
  const Vec u = vec2(0.0, 1.0);
  const Vec w = vec2(-u[1], u[0]);  // the xi axis used by sigma_midline_2d
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Vec y = vec2(unif(rng), unif(rng));
    if (poly.contains(y, 1e-6) != poly.contains(y, -1e-6)) continue;  // borderline
    bool inside_by_chord = false;
    try {
      const auto [sigma, mid] = sigma_midline_2d(poly, u, w.dot(y));
      inside_by_chord = std::fabs(u.dot(y) - mid) <= sigma + 1e-9;
    } catch (const BoundaryPoint&) {
      inside_by_chord = false;
    }
    CHECK(inside_by_chord == poly.contains(y, 0.0));
  }
}

TEST_CASE("graph functions: both routes agree on the reference bodies", "[steiner]") {
  // square at y' = 0: g = f = 1
  const auto sq = graph_functions(unit_square(), vec2(0, 1), Vec::Zero(2));
  CHECK(sq.overgraph == Approx(1.0));
  CHECK(sq.undergraph == Approx(1.0));

  // triangle (0,0),(1,0),(0,1): chord at x = 0.5 runs from t=0 to t=0.5
  Mat tv(3, 2);
  tv << 0, 0, 1, 0, 0, 1;
  Mat tw = tv;
  for (int i = 0; i < 3; ++i) {
    tw(i, 0) -= 0.25;
    tw(i, 1) -= 0.25;
  }
  const Body tri = Body::polytope(tw);
  // x = 0.5 in original coordinates is xi' = 0.25 after the shift; the
  // chord is then t in [-0.25, 0.25]
  const auto tg = graph_functions(tri, vec2(0, 1), vec2(0.25, 0));
  CHECK(tg.overgraph == Approx(0.25).margin(1e-9));
  CHECK(tg.undergraph == Approx(0.25).margin(1e-9));

  // ball: chord at |y'| = 0.6 has half-length 0.8
  const auto bg = graph_functions(Body::ball(2, 1.0), vec2(0, 1), vec2(0.6, 0));
  CHECK(bg.overgraph == Approx(0.8).epsilon(1e-8));
  CHECK(bg.undergraph == Approx(0.8).epsilon(1e-8));

  CHECK_THROWS_AS(graph_functions(Body::ball(2, 1.0), vec2(0, 1), vec2(1.0, 0)),
                  BoundaryPoint);
}

TEST_CASE("graph function minimizers respect the 2R/r bound", "[steiner]") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    const Body poly = random_polygon(rng, 7);
    const auto [r, R] = poly.inradius_outradius();
    const Vec u = vec2(std::cos(trial), std::sin(trial));
    const Vec w = vec2(-u[1], u[0]);
    const double xi = unif(rng) * r;  // |y'| <= r/2
    const auto res = graph_functions(poly, u, xi * w);
    CHECK(res.minimizer_g.norm() <= 2.0 * R / r + 1e-6);
    CHECK(res.minimizer_f.norm() <= 2.0 * R / r + 1e-6);
    CHECK(std::fabs(res.minimizer_g.dot(u)) < 1e-9);
  }
}

TEST_CASE("graph functions in 3D", "[steiner]") {
  Mat cube(8, 3);
  cube << -1, -1, -1, 1, -1, -1, 1, 1, -1, -1, 1, -1, -1, -1, 1, 1, -1, 1, 1, 1, 1, -1, 1, 1;
  const Body box = Body::polytope(cube);
  Vec u(3), yp(3);
  u << 0, 0, 1;
  yp << 0.3, -0.2, 0;
  const auto res = graph_functions(box, u, yp);
  CHECK(res.overgraph == Approx(1.0).margin(1e-8));
  CHECK(res.undergraph == Approx(1.0).margin(1e-8));
}

TEST_CASE("maps S and T preserve the uniform measure", "[steiner]") {
  const Body tri = shifted_triangle();
  const auto rep = maps_S_T_check(tri, vec2(0, 1), 100000, 13);
  CHECK(rep.p_value_s > 0.01);
  CHECK(rep.p_value_t > 0.01);
  CHECK(rep.t_roundtrip_max < 1e-12);

  // symmetric body: S acts as the identity on samples
  const Body square = unit_square();
  const auto rep2 = maps_S_T_check(square, vec2(0, 1), 20000, 14);
  CHECK(rep2.p_value_s > 0.01);
  CHECK(rep2.p_value_t > 0.01);
}

TEST_CASE("steiner symmetrization in 3D preserves volume", "[steiner]") {
  Mat cube(8, 3);
  cube << -1, -1, -1, 1, -1, -1, 1, 1, -1, -1, 1, -1, -1, -1, 1, 1, -1, 1, 1, 1, 1, -1, 1, 1;
  const Body box = Body::polytope(cube);
  Vec u(3);
  u << 0, 0, 1;
  CHECK(steiner_symmetrize(box, u).body.volume_exact() == Approx(8.0).epsilon(1e-12));

  std::mt19937_64 rng(5);
  const Body poly = random_polytope_3d(rng, 12);
  Vec v(3);
  v << std::sin(0.4) * std::cos(1.2), std::sin(0.4) * std::sin(1.2), std::cos(0.4);
  const Body sym = steiner_symmetrize(poly, v).body;
  CHECK(sym.volume_exact() == Approx(poly.volume_exact()).epsilon(1e-10));
  // u-symmetry of the result
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    Vec x(3);
    x << unif(rng), unif(rng), unif(rng);
    const Vec reflected = x - 2.0 * v.dot(x) * v;
    CHECK(sym.support(x) == Approx(sym.support(reflected)).epsilon(1e-9));
  }
}

TEST_CASE("steiner support inequality: symmetric and randomized instances", "[steiner]") {
  const auto phi = OrliczFunction::power(1);
  const auto omega = WeightFunction::constant();
  CentroidOptions opts;
  opts.solver.cells = 1024;

  // symmetric body with x1' = x2': slack >= 0 via evenness
  const Body square = unit_square();
  const Vec u = vec2(0, 1);
  const Vec xp = vec2(0.7, 0);
  const auto sym_case = steiner_support_inequality_check(square, u, xp, xp, phi, omega, opts);
  CHECK(sym_case.slack >= -1e-6);

  // ball: near equality when x1' = x2'
  const auto ball_case =
      steiner_support_inequality_check(Body::ball(2, 1.0), u, xp, xp, phi, omega, opts);
  CHECK(ball_case.slack >= -1e-6);
  CHECK(ball_case.slack == Approx(0.0).margin(1e-5));

  // special-case wiring: x1' = x2' = 0
  const auto zero_case = steiner_support_inequality_check(square, u, Vec::Zero(2), Vec::Zero(2), phi,
                                                  omega, opts);
  CHECK(zero_case.lhs == Approx(zero_case.rhs).margin(1e-6));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi);
  for (int trial = 0; trial < 25; ++trial) {
    const Body poly = random_polygon(rng, 6 + trial % 6);
    const double th = ang(rng);
    const Vec uu = vec2(std::cos(th), std::sin(th));
    const Vec w = vec2(-uu[1], uu[0]);
    const auto res =
        steiner_support_inequality_check(poly, uu, coef(rng) * w, coef(rng) * w, phi, omega, opts);
    CHECK(res.slack >= -1e-6);
  }
}

TEST_CASE("symmetrization inclusion with volume monotonicity", "[steiner]") {
  const auto phi = OrliczFunction::power(1);
  const auto omega = WeightFunction::constant();
  CentroidOptions opts;
  opts.grid_size = 90;
  opts.solver.cells = 1024;
  const Mat dirs = uniform_circle_grid(24);

  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 3; ++trial) {
    const Body poly = random_polygon(rng, 7 + trial);
    const Vec u = vec2(std::cos(0.6 + trial), std::sin(0.6 + trial));
    const auto res = symmetrization_inclusion_check(poly, u, phi, omega, dirs, opts);
    CHECK(res.max_violation <= res.eps_grid);
    CHECK(res.gamma_sk_volume_inner <= res.gamma_k_volume_outer);
    CHECK(res.detection_limit < 0.2);
  }
}

TEST_CASE("symmetrization schedule: fixed points, convergence, drift", "[steiner][slow]") {
  // square under coordinate directions: distance to the ball stalls
  ScheduleOptions sched;
  sched.seed = 3;
  const Body square = unit_square();
  {
    Body cur = square;
    for (const auto axis : {0, 1, 0, 1}) {
      Vec u = Vec::Zero(2);
      u[axis] = 1.0;
      cur = steiner_symmetrize(cur, u).body;
    }
    const double r = std::pow(4.0 / kPi, 0.5);
    double dist = 0.0;
    const Mat grid = uniform_circle_grid(128);
    for (int i = 0; i < grid.rows(); ++i) {
      dist = std::max(dist, std::fabs(cur.support(grid.row(i).transpose()) - r));
    }
    CHECK(dist > 0.05 * r);  // still visibly square
    CHECK(cur.volume_exact() == Approx(4.0).epsilon(1e-12));
  }

  // mixed schedule drives a triangle toward the ball
  const Body tri = shifted_triangle();
  const auto trace = symmetrization_schedule(tri, 50, sched);
  REQUIRE(trace.steps.size() == 50);
  CHECK(trace.steps.back().ball_distance < 0.05 * trace.ball_radius);
  CHECK(trace.max_accounted_drift <= 1e-7);
  for (const auto& st : trace.steps) {
    CHECK(st.accounted_drift <= 1e-7);
  }
}

TEST_CASE("direction schedule avoids consecutive repeats", "[steiner]") {
  const auto dirs = direction_schedule(2, 40, 5);
  REQUIRE(dirs.size() == 40);
  for (std::size_t i = 1; i < dirs.size(); ++i) {
    CHECK(std::fabs(std::fabs(dirs[i].dot(dirs[i - 1])) - 1.0) > 1e-9);
  }
  for (const auto& d : dirs) CHECK(d.norm() == Approx(1.0).epsilon(1e-12));
}
