#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "lcv/alm.hpp"
#include "lcv/io.hpp"
#include "lcv/oracle.hpp"
#include "test_util.hpp"

using lcv::Vec;
using lcv::model::QpProblem;
using lcv::oracle::eval_nu;
using lcv::oracle::eval_theta;
using lcv::oracle::least_shift;
using lcv::oracle::LeastShiftOptions;
using lcv::testutil::constant_row_infeasible;
using lcv::testutil::feasible_halfspace;
using lcv::testutil::inconsistent_equalities;
using lcv::testutil::mat;
using lcv::testutil::two_halfspace;
using lcv::testutil::vec;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("least shift on the two-halfspace instance") {
  const auto result = least_shift(two_halfspace());
  CHECK(result.s[0] == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(result.s[1] == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(result.norm == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
  CHECK(result.x[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(result.opt_residual <= 1e-8);
  CHECK(result.proj_residual <= 1e-8);
  CHECK(result.iterations >= 1);
  CHECK(result.restart_spread <= 1e-6);
}

TEST_CASE("least shift on inconsistent equalities") {
  const auto result = least_shift(inconsistent_equalities());
  CHECK(result.s[0] == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(result.s[1] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(result.x[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("least shift of a feasible problem is zero") {
  const auto result = least_shift(feasible_halfspace());
  CHECK(result.norm <= 1e-9);
}

TEST_CASE("least shift is deterministic for a fixed seed") {
  const auto a = least_shift(two_halfspace());
  const auto b = least_shift(two_halfspace());
  CHECK(a.s[0] == b.s[0]);
  CHECK(a.s[1] == b.s[1]);
  CHECK(a.norm == b.norm);

  LeastShiftOptions other;
  other.seed = 999;
  const auto c = least_shift(two_halfspace(), other);
  CHECK((a.s - c.s).lpNorm<Eigen::Infinity>() <= 1e-8);  // same answer, any seed
}

TEST_CASE("least shift reports NonConvergence when starved of iterations") {
  // The canonical pairs converge in one step, so starve a dense random
  // instance where two gradient steps cannot reach the fixed point.
  lcv::io::InstanceSeedSpec spec;
  spec.family = lcv::io::Family::RandomInfeasible;
  spec.n = 6;
  spec.m = 8;
  spec.seed = 11;
  const QpProblem p = lcv::io::generate_instance(spec);

  LeastShiftOptions opts;
  opts.tol = 1e-14;
  opts.max_iter = 2;
  opts.restarts = 0;
  try {
    least_shift(p, opts);
    FAIL("expected NonConvergence");
  } catch (const lcv::Error& e) {
    CHECK(e.code() == lcv::ErrorCode::NonConvergence);
  }
}

TEST_CASE("least_shift_vector matches the full result") {
  const auto full = least_shift(two_halfspace());
  const auto brief = lcv::oracle::least_shift_vector(two_halfspace());
  CHECK((full.s - brief.s).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(full.norm == brief.norm);
}

TEST_CASE("shifted value function: infeasible shifts, exact values, certificates") {
  const QpProblem p = two_halfspace();

  const auto at_zero = eval_nu(p, vec({0.0, 0.0}));
  CHECK(at_zero.nu == kInf);
  REQUIRE(at_zero.infeasibility_certificate.has_value());
  CHECK((*at_zero.infeasibility_certificate)[0] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK((*at_zero.infeasibility_certificate)[1] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK_FALSE(at_zero.argmin.has_value());

  const auto at_least = eval_nu(p, vec({-1.0, -1.0}));
  CHECK(at_least.nu == doctest::Approx(1.0).epsilon(1e-6));
  REQUIRE(at_least.argmin.has_value());
  CHECK((*at_least.argmin)[0] == doctest::Approx(1.0).epsilon(1e-5));

  // Larger shift relaxes the pin: x in [0, 2], minimum of x^2 at 0.
  const auto relaxed = eval_nu(p, vec({-2.0, -2.0}));
  CHECK(relaxed.nu == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("shifted value function on the feasible halfspace") {
  const QpProblem p = feasible_halfspace();
  CHECK(eval_nu(p, vec({0.0})).nu == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(eval_nu(p, vec({1.0})).nu == doctest::Approx(0.0).epsilon(1e-8));
  // s = 1.5 forces x <= -0.5: nu = (1 - s)^2 = 0.25.
  CHECK(eval_nu(p, vec({1.5})).nu == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(eval_nu(p, vec({3.0})).nu == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("shifted value function detects unbounded-below problems") {
  QpProblem p;
  p.G = mat(1, 1, {0.0});
  p.c = vec({1.0});
  p.H = mat(1, 1, {1.0});
  p.h = vec({0.0});
  p.cone = lcv::cones::ConeSpec({lcv::cones::ConeBlock::nonpos(1)});
  const auto value = eval_nu(p, vec({0.0}));
  CHECK(value.nu == -kInf);
}

TEST_CASE("dual objective: closed-form values") {
  // theta(lambda) = support_K(lambda) + 1/2 w'Gw + lambda'h, Gw = -(c+H'l).
  const QpProblem p = two_halfspace();
  CHECK(eval_theta(p, vec({0.0, 0.0})).theta == doctest::Approx(0.0));
  // (l1 - l2)^2 / 4 - 2 l2 at (0.5, 1.5): 0.25 - 3 = -2.75.
  CHECK(eval_theta(p, vec({0.5, 1.5})).theta == doctest::Approx(-2.75).epsilon(1e-12));
  CHECK(eval_theta(p, vec({2.0, 0.0})).theta == doctest::Approx(1.0).epsilon(1e-12));

  QpProblem ridge;
  ridge.G = mat(1, 1, {2.0});
  ridge.c = vec({0.0});
  ridge.H = mat(1, 1, {1.0});
  ridge.h = vec({0.0});
  ridge.cone = lcv::cones::ConeSpec({lcv::cones::ConeBlock::nonpos(1)});
  const auto quarter = eval_theta(ridge, vec({1.0}));
  CHECK(quarter.theta == doctest::Approx(0.25).epsilon(1e-12));
  REQUIRE(quarter.minimizer_x.has_value());
  CHECK((*quarter.minimizer_x)[0] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("dual objective: domain boundaries") {
  const QpProblem p = two_halfspace();
  // Negative multiplier on a NonPos row: support function diverges.
  const auto outside = eval_theta(p, vec({-1.0, 0.0}));
  CHECK(outside.theta == kInf);
  CHECK_FALSE(outside.minimizer_x.has_value());

  // c + H'lambda outside range(G): the Lagrangian inf over x is -inf.
  QpProblem flat;
  flat.G = mat(1, 1, {0.0});
  flat.c = vec({1.0});
  flat.H = mat(1, 1, {0.0});
  flat.h = vec({0.0});
  flat.cone = lcv::cones::ConeSpec({lcv::cones::ConeBlock::nonpos(1)});
  CHECK(eval_theta(flat, vec({0.5})).theta == kInf);

  // Same matrix but consistent right-hand side: theta(0) = 0.
  flat.c = vec({0.0});
  CHECK(eval_theta(flat, vec({0.0})).theta == doctest::Approx(0.0));

  CHECK_THROWS_AS(eval_theta(p, vec({1.0})), lcv::Error);  // wrong length
}

TEST_CASE("dual objective of the constant-row instance is linear") {
  const QpProblem p = constant_row_infeasible();
  for (double l : {0.0, 0.5, 1.0, 2.0, 7.5}) {
    CHECK(eval_theta(p, vec({l})).theta == doctest::Approx(-2.0 * l).epsilon(1e-12));
  }
  CHECK(eval_theta(p, vec({-0.25})).theta == kInf);
}

TEST_CASE("conjugate growth: sup of lambda s - theta diverges outside the shift set") {
  // For s > -2 (so s not in S - here S = (-inf, -2]), the partial suprema
  // sup over [0, L] of lambda s - theta(lambda) grow without bound in L.
  const QpProblem p = constant_row_infeasible();
  const double s = -1.0;
  double prev = -kInf;
  for (double cap : {1.0, 10.0, 100.0, 1000.0}) {
    double best = -kInf;
    for (int i = 0; i <= 100; ++i) {
      const double l = cap * i / 100.0;
      best = std::max(best, l * s - eval_theta(p, vec({l})).theta);
    }
    CHECK(best > prev);
    CHECK(best == doctest::Approx(cap * (s + 2.0)).epsilon(1e-9));
    prev = best;
  }
}

TEST_CASE("conjugacy grid check passes on the feasible halfspace") {
  // Coverage requirement: the lambda grid must reach the subgradients of nu
  // over the s grid (lambda* = 2(s - 1) <= 3) and vice versa
  // (s* = 1 + lambda/2 <= 2.5), or the partial suprema are truncated.
  const QpProblem p = feasible_halfspace();
  std::vector<Vec> lambda_grid;
  for (double l = 0.0; l <= 3.0 + 1e-12; l += 0.01) lambda_grid.push_back(vec({l}));
  std::vector<Vec> s_grid;
  for (double s = -1.0; s <= 2.5 + 1e-12; s += 0.01) s_grid.push_back(vec({s}));

  const auto report = lcv::oracle::verify_conjugacy(p, lambda_grid, s_grid, 0.02);
  CHECK_FALSE(report.grid_too_coarse);
  CHECK(report.grid_gap == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(report.max_violation_theta <= 5 * report.grid_gap);
  CHECK(report.max_violation_nu <= 5 * report.grid_gap);
  CHECK(report.weak_duality_violation <= 1e-8);
}

TEST_CASE("conjugacy grid check passes on the infeasible constant row") {
  const QpProblem p = constant_row_infeasible();
  std::vector<Vec> lambda_grid;
  for (double l = 0.0; l <= 2.0 + 1e-12; l += 0.01) lambda_grid.push_back(vec({l}));
  std::vector<Vec> s_grid;
  for (double s = -4.0; s <= -2.0 + 1e-12; s += 0.01) s_grid.push_back(vec({s}));

  const auto report = lcv::oracle::verify_conjugacy(p, lambda_grid, s_grid, 0.02);
  CHECK_FALSE(report.grid_too_coarse);
  CHECK(report.max_violation_theta <= 5 * report.grid_gap);
  CHECK(report.max_violation_nu <= 5 * report.grid_gap);
}

TEST_CASE("conjugacy grid check flags a too-coarse grid") {
  const QpProblem p = feasible_halfspace();
  std::vector<Vec> lambda_grid{vec({0.0}), vec({1.0}), vec({2.0})};
  std::vector<Vec> s_grid{vec({-1.0}), vec({0.0}), vec({1.0})};
  const auto report = lcv::oracle::verify_conjugacy(p, lambda_grid, s_grid, 0.02);
  CHECK(report.grid_too_coarse);
  CHECK(report.grid_gap == doctest::Approx(1.0));
}

TEST_CASE("dual recession check certifies the multiplier ray") {
  const QpProblem p = two_halfspace();
  const auto solved = lcv::alm::solve(p);
  REQUIRE(solved.status == lcv::alm::SolveStatus::LeastViolationSolution);
  // Direction accuracy dominates the deviation (it is amplified by t), so
  // use the tighter oracle shift rather than the solver's.
  const Vec s_bar = least_shift(p).s;

  const std::vector<double> t_grid{1.0, 10.0, 100.0};
  CHECK(lcv::oracle::dual_recession_check(p, solved.state.lambda, s_bar, t_grid, 1e-6));

  // A perturbed direction tilts the shifted dual and fails the check.
  Vec skewed = s_bar;
  skewed[0] += 0.1;
  skewed[1] -= 0.1;
  CHECK_FALSE(lcv::oracle::dual_recession_check(p, solved.state.lambda, skewed, t_grid, 1e-6));
}

TEST_CASE("dual recession check is trivially true for a zero shift") {
  const QpProblem p = feasible_halfspace();
  const auto solved = lcv::alm::solve(p);
  CHECK(lcv::oracle::dual_recession_check(p, solved.state.lambda, solved.shift.s,
                                          {1.0, 10.0}, 1e-6));
}
