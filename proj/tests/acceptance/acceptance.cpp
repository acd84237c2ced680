// Acceptance suite: each criterion prints exactly one PASS/FAIL line with
// its runtime. Run with no arguments for all criteria, or pass criterion
// numbers (1-9) to run a subset. Nonzero exit iff any selected criterion
// fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "olcb/body.hpp"
#include "olcb/centroid.hpp"
#include "olcb/orlicz.hpp"
#include "olcb/parallel.hpp"
#include "olcb/random_bodies.hpp"
#include "olcb/rearrangement.hpp"
#include "olcb/steiner.hpp"
#include "../support/moments.hpp"

using namespace olcb;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void note(const std::string& info) {
    if (detail.empty()) detail = info;
  }
};

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Body unit_square() {
  Mat v(4, 2);
  v << -1, -1, 1, -1, 1, 1, -1, 1;
  return Body::polytope(v);
}

std::vector<Vec> circle_dirs(int m) {
  std::vector<Vec> out;
  const Mat grid = uniform_circle_grid(m);
  for (int i = 0; i < m; ++i) out.push_back(grid.row(i).transpose());
  return out;
}

// ---------------------------------------------------------------- 1
Outcome criterion1_norm_exactness() {
  Outcome out;
  const Body square = unit_square();
  auto prof = RearrangementProfile::exact_slab(square, vec2(1, 0));
  const auto omega = WeightFunction::constant();
  double worst = 0.0;
  for (const int p : {1, 2, 3, 5}) {
    const double expect = std::pow(1.0 / (p + 1.0), 1.0 / p);
    const double lam = norm_solve(prof, OrliczFunction::power(p), omega).lambda;
    const double rel = std::fabs(lam - expect) / expect;
    worst = std::max(worst, rel);
    if (rel > 1e-6) {
      out.fail("p=" + std::to_string(p) + " relative error " + format_g12(rel));
    }
  }
  out.note("max relative error " + format_g12(worst));
  return out;
}

// ---------------------------------------------------------------- 2
Outcome criterion2_lp_equivalence() {
  Outcome out;
  std::mt19937_64 rng(1002);
  std::vector<Body> polys;
  for (int i = 0; i < 20; ++i) polys.push_back(random_polygon(rng, 5 + i % 10));
  const auto dirs = circle_dirs(16);
  const auto omega = WeightFunction::constant();
  struct Task {
    int body, dir, p;
  };
  std::vector<Task> tasks;
  for (int b = 0; b < 20; ++b) {
    for (int d = 0; d < 16; ++d) {
      for (const int p : {1, 2, 4}) tasks.push_back({b, d, p});
    }
  }
  std::vector<double> rel(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) {
    const auto& t = tasks[i];
    const double lam = norm_solve(RearrangementProfile::exact_slab(polys[t.body], dirs[t.dir]),
                                  OrliczFunction::power(t.p), omega)
                           .lambda;
    const double expect = oracle::polygon_lp_norm(polys[t.body], dirs[t.dir], t.p);
    rel[i] = std::fabs(lam - expect) / expect;
  });
  const double worst = *std::max_element(rel.begin(), rel.end());
  if (worst > 1e-4) out.fail("max relative error " + format_g12(worst));
  out.note("960 solves, max relative error " + format_g12(worst));
  return out;
}

// ---------------------------------------------------------------- 3
Outcome criterion3_sandwich() {
  Outcome out;
  std::mt19937_64 rng(1003);
  std::vector<Body> corpus;
  for (int i = 0; i < 50; ++i) corpus.push_back(random_polygon(rng, 5 + i % 12));
  corpus.push_back(Body::ball(2, 1.0));
  for (int i = 0; i < 3; ++i) corpus.push_back(random_ellipse(rng));
  const std::vector<OrliczFunction> phis = {OrliczFunction::power(1), OrliczFunction::power(2),
                                            OrliczFunction::scaled_exp(1.0)};
  const std::vector<WeightFunction> omegas = {WeightFunction::constant(),
                                              WeightFunction::power_singular(0.5)};
  const auto dirs = circle_dirs(32);
  struct Task {
    int body, dir, phi, omega;
  };
  std::vector<Task> tasks;
  for (std::size_t b = 0; b < corpus.size(); ++b) {
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      for (std::size_t p = 0; p < phis.size(); ++p) {
        for (std::size_t w = 0; w < omegas.size(); ++w) {
          tasks.push_back({static_cast<int>(b), static_cast<int>(d), static_cast<int>(p),
                           static_cast<int>(w)});
        }
      }
    }
  }
  std::vector<double> lo_slack(tasks.size()), hi_slack(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) {
    const auto& t = tasks[i];
    const Body& body = corpus[t.body];
    const auto [lower, upper] = support_sandwich_bounds(body, dirs[t.dir], phis[t.phi], omegas[t.omega]);
    const double lam =
        norm_solve(RearrangementProfile::exact_slab(body, dirs[t.dir]), phis[t.phi],
                   omegas[t.omega])
            .lambda;
    lo_slack[i] = lam - lower;
    hi_slack[i] = upper + 1e-6 - lam;
  });
  int violations = 0;
  double min_slack = 1e300;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    min_slack = std::min({min_slack, lo_slack[i], hi_slack[i]});
    if (lo_slack[i] < 0.0 || hi_slack[i] < 0.0) ++violations;
  }
  if (violations > 0) out.fail(std::to_string(violations) + " violations");
  out.note(std::to_string(tasks.size()) + " checks, min slack " + format_g12(min_slack));
  return out;
}

// ---------------------------------------------------------------- 4
Outcome criterion4_equivariance() {
  Outcome out;
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  std::uniform_real_distribution<double> shear(-1.0, 1.0);
  const auto phi = OrliczFunction::power(1);
  const auto omega = WeightFunction::constant();
  const Mat dirs = uniform_circle_grid(8);

  std::vector<std::pair<Body, Mat>> pairs;
  for (int t = 0; t < 20; ++t) {
    Body body = t % 3 == 0 ? Body::ball(2, 1.0) : random_polygon(rng, 5 + t % 8);
    Mat a(2, 2);
    if (t % 4 == 0) {
      const double th = angle(rng);
      a << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    } else if (t % 4 == 1) {
      a << scale(rng), 0, 0, scale(rng);
    } else if (t % 4 == 2) {
      a << 1, shear(rng), 0, 1;
    } else {
      const double th = angle(rng);
      Mat rot(2, 2);
      rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
      Mat sh(2, 2);
      sh << 1, shear(rng), 0, 1;
      a = rot * sh;
    }
    pairs.emplace_back(std::move(body), std::move(a));
  }
  double worst = 0.0;
  for (const auto& [body, a] : pairs) {
    worst = std::max(worst, equivariance_check(body, a, phi, omega, dirs));
  }
  if (worst > 1e-5) out.fail("max relative discrepancy " + format_g12(worst));
  out.note("20 pairs, max relative discrepancy " + format_g12(worst));
  return out;
}

// ---------------------------------------------------------------- 5
Outcome criterion5_volume_preservation() {
  Outcome out;
  std::mt19937_64 rng(1005);
  double worst = 0.0;
  for (int b = 0; b < 10; ++b) {
    const Body poly = random_polygon(rng, 6 + b);
    ScheduleOptions sched;
    sched.seed = 2000 + b;
    sched.ball_distance_grid = 64;
    const auto trace = symmetrization_schedule(poly, 50, sched);
    worst = std::max(worst, trace.max_accounted_drift);
  }
  if (worst > 1e-7) out.fail("max volume drift " + format_g12(worst));
  out.note("10 traces x 50 steps, max accounted drift " + format_g12(worst));
  return out;
}

// ---------------------------------------------------------------- 6
Outcome criterion6_steiner_inequality() {
  Outcome out;
  std::mt19937_64 rng(1006);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  const auto phi = OrliczFunction::power(1);
  const auto omega = WeightFunction::constant();
  CentroidOptions opts;
  opts.solver.cells = 2048;

  std::vector<Body> polys;
  for (int i = 0; i < 25; ++i) polys.push_back(random_polygon(rng, 5 + i % 9));
  struct Inst {
    const Body* body;
    Vec u, x1, x2;
  };
  std::vector<Inst> instances;
  for (int t = 0; t < 1000; ++t) {
    const Body& body = polys[t % polys.size()];
    const double th = angle(rng);
    const Vec u = vec2(std::cos(th), std::sin(th));
    const Vec w = vec2(-u[1], u[0]);
    instances.push_back({&body, u, coef(rng) * w, coef(rng) * w});
  }
  std::vector<double> slack(instances.size());
  parallel_for(instances.size(), [&](std::size_t i) {
    const auto& in = instances[i];
    slack[i] =
        steiner_support_inequality_check(*in.body, in.u, in.x1, in.x2, phi, omega, opts).slack;
  });
  const double min_slack = *std::min_element(slack.begin(), slack.end());
  int violations = 0;
  for (double s : slack) violations += s < -1e-6 ? 1 : 0;
  if (violations > 0) out.fail(std::to_string(violations) + " violations");
  out.note("1000 instances, min slack " + format_g12(min_slack));
  return out;
}

// ---------------------------------------------------------------- 7
Outcome criterion7_inclusion_and_monotonicity() {
  Outcome out;
  std::mt19937_64 rng(1007);
  const auto phi = OrliczFunction::power(1);
  const auto omega = WeightFunction::constant();
  CentroidOptions opts;
  opts.grid_size = 180;
  opts.solver.cells = 2048;
  const Mat test_dirs = uniform_circle_grid(16);

  double worst_violation_minus_eps = -1e300;
  double worst_monotone_slack = 1e300;
  for (int b = 0; b < 5; ++b) {
    Body current = random_polygon(rng, 6 + b);
    CentroidBody prev_gamma(current, phi, omega, opts);
    const auto sched_dirs = direction_schedule(2, 10, 3000 + b);
    for (int step = 0; step < 10; ++step) {
      const Vec u = sched_dirs[step];
      // symmetrize the body and the previous outer polytope
      const Body next = steiner_symmetrize(current, u).body;
      const Polygon outer_poly = prev_gamma.outer().polygon();
      Mat ov(outer_poly.size(), 2);
      for (std::size_t i = 0; i < outer_poly.size(); ++i) {
        ov(i, 0) = outer_poly[i].x();
        ov(i, 1) = outer_poly[i].y();
      }
      const Body su_outer = steiner_symmetrize(Body::polytope(ov), u).body;
      CentroidBody next_gamma(next, phi, omega, opts);

      const double eps_grid =
          2.0 * (prev_gamma.support_uncertainty() + next_gamma.support_uncertainty()) + 1e-8;
      for (int d = 0; d < test_dirs.rows(); ++d) {
        const Vec v = test_dirs.row(d).transpose();
        const double lhs = centroid_support(next, phi, omega, v, opts);
        const double rhs = su_outer.support(v);
        worst_violation_minus_eps = std::max(worst_violation_minus_eps, lhs - rhs - eps_grid);
        if (lhs - rhs > eps_grid) {
          out.fail("inclusion violation " + format_g12(lhs - rhs) + " > eps_grid " +
                   format_g12(eps_grid));
        }
      }
      // centroid-volume monotonicity via brackets
      auto bracket = [](const CentroidBody& g) {
        std::vector<double> delta(g.grid_size());
        for (int i = 0; i < g.grid_size(); ++i) {
          delta[i] = std::max(g.reports()[i].lambda_uncertainty, 1e-12);
        }
        return detail::support_volume_bracket_2d(g.directions(), g.supports(), delta);
      };
      const auto [inner_next, outer_next] = bracket(next_gamma);
      const auto [inner_prev, outer_prev] = bracket(prev_gamma);
      worst_monotone_slack = std::min(worst_monotone_slack, outer_prev - inner_next);
      if (inner_next > outer_prev) {
        out.fail("volume monotonicity violated at step " + std::to_string(step));
      }
      current = next;
      prev_gamma = std::move(next_gamma);
    }
  }
  out.note("5 traces x 10 steps; max(violation - eps_grid) " +
           format_g12(worst_violation_minus_eps) + ", min monotonicity slack " +
           format_g12(worst_monotone_slack));
  return out;
}

// ---------------------------------------------------------------- 8
Outcome criterion8_extremality() {
  Outcome out;
  const std::vector<std::pair<OrliczFunction, WeightFunction>> combos = {
      {OrliczFunction::power(1), WeightFunction::constant()},
      {OrliczFunction::power(2), WeightFunction::constant()},
      {OrliczFunction::power(1), WeightFunction::power_singular(0.5)},
  };
  CentroidOptions ball_opts;
  ball_opts.grid_size = 720;
  ball_opts.solver.cells = 2048;
  CentroidOptions poly_opts;
  poly_opts.grid_size = 360;
  poly_opts.solver.cells = 2048;

  std::mt19937_64 rng(1008);
  std::vector<Body> polys;
  for (int i = 0; i < 200; ++i) polys.push_back(random_polygon(rng, 5 + i % 12));
  const std::vector<Body> gons = {regular_polygon(64, 1.0), regular_polygon(64, 0.6)};

  for (std::size_t c = 0; c < combos.size(); ++c) {
    const auto& [phi, omega] = combos[c];
    const auto ball = volume_ratio(Body::ball(2, 1.0), phi, omega, ball_opts);
    const double ball_outer = ball.outer_ratio();
    const double ball_inner = ball.inner_ratio();

    if (c == 0) {
      const double closed = std::pow(4.0 / (3.0 * kPi), 2);
      if (!(ball_inner <= closed && closed <= ball_outer)) {
        out.fail("ball bracket [" + format_g12(ball_inner) + ", " + format_g12(ball_outer) +
                 "] misses (4/(3pi))^2");
      }
    }

    std::vector<double> inner_ratios(polys.size());
    parallel_for(polys.size(), [&](std::size_t i) {
      inner_ratios[i] = volume_ratio(polys[i], phi, omega, poly_opts).inner_ratio();
    });
    int violations = 0;
    double min_gap = 1e300;
    for (double ir : inner_ratios) {
      min_gap = std::min(min_gap, ir - ball_outer);
      if (ir < ball_outer) ++violations;
    }
    if (violations > 0) {
      out.fail("combo " + std::to_string(c) + ": " + std::to_string(violations) +
               " polygons below the ball ratio");
    }

    for (const auto& gon : gons) {
      // near-ellipsoidal bodies: the criterion is closeness, not dominance
      // (their true gap above the ball is far below the bracket width)
      const auto vr = volume_ratio(gon, phi, omega, ball_opts);
      const double gap = std::fabs(vr.outer_ratio() - ball_outer);
      if (gap > 1e-3) {
        out.fail("combo " + std::to_string(c) + ": 64-gon ratio gap " + format_g12(gap));
      }
    }
    if (c == 0) {
      out.note("ball ratio bracket [" + format_g12(ball_inner) + ", " +
               format_g12(ball_outer) + "], min polygon gap " + format_g12(min_gap));
    }
  }
  return out;
}

// ---------------------------------------------------------------- 9
Outcome criterion9_rearrangement_correctness() {
  Outcome out;
  std::mt19937_64 rng(1009);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const std::vector<OrliczFunction> phis = {OrliczFunction::power(1), OrliczFunction::power(2),
                                            OrliczFunction::scaled_exp(1.0)};
  // two-sided DKW band at 1e5 samples, delta = 1e-4 per comparison
  const std::size_t samples = 100000;
  const double dkw = std::sqrt(std::log(2.0 / 1e-4) / (2.0 * samples));
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Body body = random_polygon(rng, 5 + trial % 10);
    Vec x = vec2(unif(rng), unif(rng));
    if (x.norm() < 0.2) x = vec2(0.8, -0.5);
    const OrliczFunction& phi = phis[trial % phis.size()];
    auto exact = RearrangementProfile::exact_slab(body, x);
    auto emp = RearrangementProfile::empirical(body, x, samples, split_seed(9000, trial));
    const double fmax = exact.f_max();
    // equimeasurability: exact mu vs empirical mu on a threshold grid
    for (const double frac : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const double s = frac * fmax;
      const double gap = std::fabs(exact.distribution(s).value - emp.distribution(s).value);
      worst = std::max(worst, gap);
      if (gap > dkw) {
        out.fail("equimeasurability gap " + format_g12(gap) + " at trial " +
                 std::to_string(trial));
      }
    }
    // phi(f*) is the rearrangement of phi(|f|): compare the level sets of
    // phi(f*_exact) against the empirical distribution of phi(|f|)
    const auto tab = exact.breakpoints(2048);
    for (const double frac : {0.2, 0.5, 0.8}) {
      const double s = frac * fmax;
      const double a = phi(s);
      double leb = 0.0;
      for (const auto& [t, f] : tab) leb += phi(f) > a ? 1.0 / 2048.0 : 0.0;
      // empirical measure of { phi(|f|) > a }
      double count = 0.0;
      const double finv = phi.inverse(a);
      count = emp.distribution(finv).value;
      const double gap = std::fabs(leb - count);
      worst = std::max(worst, gap);
      if (gap > dkw + 1.0 / 2048.0) {
        out.fail("phi-rearrangement identity gap " + format_g12(gap) + " at trial " +
                 std::to_string(trial));
      }
    }
  }
  out.note("100 triples, max CDF gap " + format_g12(worst) + " (band " + format_g12(dkw) +
           ")");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int number;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "norm-solver exactness on closed forms", criterion1_norm_exactness},
      {2, "L_p special-case equivalence", criterion2_lp_equivalence},
      {3, "support sandwich bounds", criterion3_sandwich},
      {4, "GL(n) equivariance", criterion4_equivariance},
      {5, "Steiner volume preservation", criterion5_volume_preservation},
      {6, "Steiner support inequality", criterion6_steiner_inequality},
      {7, "symmetrization inclusion and volume monotonicity", criterion7_inclusion_and_monotonicity},
      {8, "volume-ratio extremality at desk scale", criterion8_extremality},
      {9, "rearrangement correctness", criterion9_rearrangement_correctness},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.number)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d (%s): %s (%.1f s)%s%s\n", c.number, c.name,
                outcome.pass ? "PASS" : "FAIL", secs, outcome.detail.empty() ? "" : " — ",
                outcome.detail.c_str());
    std::fflush(stdout);
    failures += outcome.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
