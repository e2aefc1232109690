#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lcv/model.hpp"

namespace lcv::oracle {

// Independent reference computations used to cross-check the solver. The
// algorithms here share only cone projections and dense linear algebra with
// the ALM path: least_shift runs an accelerated projected alternation on the
// shift objective alone (no multipliers, no penalty schedule), and eval_nu
// runs a primal-dual hybrid gradient method. eval_theta is closed form.

struct LeastShiftOptions {
  double tol = 1e-10;   // fixed-point residual target
  int max_iter = 2000000;
  int restarts = 2;     // extra runs from random starting points
  std::uint64_t seed = 20240001ULL;
};

struct LeastShiftResult {
  Vec s;
  double norm = 0.0;
  Vec x;
  Vec y;
  double opt_residual = 0.0;   // ||H'(g(x) - y)||_inf
  double proj_residual = 0.0;  // ||Pi_K(g(x)) - y||_inf
  int iterations = 0;
  double restart_spread = 0.0;  // max disagreement of s across restarts
};

// Least-norm feasible constraint shift: solves
//   min over x, y in K of 1/2 ||g(x) - y||^2,  s_bar = y* - g(x*)
// by FISTA on F(y) = min_x 1/2||Hx - h - y||^2 over y in K (the x-step is an
// exact least-squares solve), with restarts from random y0. Throws
// NonConvergence when the fixed-point residual fails to reach tol.
LeastShiftResult least_shift(const model::QpProblem& p, const LeastShiftOptions& opts = {});

model::ShiftVector least_shift_vector(const model::QpProblem& p,
                                      const LeastShiftOptions& opts = {});

// Optimal value of the shifted problem P(s): min f(x) s.t. g(x) + s in K.
// nu = +infinity when P(s) is infeasible (detected by a least_shift pass on
// the shifted problem; the residual shift is returned as the certificate),
// -infinity when an objective recession direction exists (polyhedral cones).
struct NuValue {
  Vec s;
  double nu = 0.0;
  std::optional<Vec> argmin;
  std::optional<Vec> infeasibility_certificate;  // least shift of P(s), when infeasible
  int iterations = 0;
};

struct NuOptions {
  double tol = 1e-9;  // KKT residual target, also the S-membership threshold
  int max_iter = 2000000;
};

NuValue eval_nu(const model::QpProblem& p, const Vec& s, const NuOptions& opts = {});

// Dual objective
//   theta(lambda) = sup_K support(lambda) - inf_x [ f(x) + <lambda, g(x)> ],
// finite iff the support function is finite and c + H'lambda lies in
// range(G) (tested by a least-squares residual <= 1e-10 (1 + ||rhs||)).
// Closed form; minimizer_x present when theta is finite.
struct DualValue {
  Vec lambda;
  double theta = 0.0;
  std::optional<Vec> minimizer_x;
};

DualValue eval_theta(const model::QpProblem& p, const Vec& lambda);

// Grid check of the conjugate pair
//   theta(lambda) = sup_s [ <lambda, s> - nu(s) ]   over s_grid
//   nu(s)         = sup_l [ <l, s> - theta(l) ]     over lambda_grid
// restricted to grid points where both sides are finite. max_violation_* are
// the largest absolute identity gaps; grid_gap is the largest
// nearest-neighbor spacing, and grid_too_coarse flags grid_gap > tol.
struct ConjugacyReport {
  double max_violation_theta = 0.0;
  double max_violation_nu = 0.0;
  double weak_duality_violation = 0.0;  // max(0, dual value - primal value)
  double grid_gap = 0.0;
  bool grid_too_coarse = false;
};

ConjugacyReport verify_conjugacy(const model::QpProblem& p, const std::vector<Vec>& lambda_grid,
                                 const std::vector<Vec>& s_grid, double tol,
                                 const NuOptions& nu_opts = {});

// Checks that the shifted dual objective theta_s(l) = theta(l) - <s, l> is
// constant along the ray lambda_bar - t * s_bar for every t in t_grid (the
// least shift is a recession direction of the shifted dual solution set).
bool dual_recession_check(const model::QpProblem& p, const Vec& lambda_bar, const Vec& s_bar,
                          const std::vector<double>& t_grid, double tol);

}  // namespace lcv::oracle
