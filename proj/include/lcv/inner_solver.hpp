#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "lcv/model.hpp"

namespace lcv::inner {

// Augmented Lagrangian of the splitting  min f(x) + delta_K(y)  s.t. g(x) = y:
//
//   l_r(x, y, lambda) = f(x) + <lambda, g(x) - y> + (r/2) ||g(x) - y||^2
//
// minimize_l_r minimizes l_r jointly over x in R^n, y in K by exact
// two-block alternating minimization:
//   y-step: y <- Pi_K(g(x) + lambda / r)
//   x-step: solve (G + r H'H) x = -c - H'lambda + r H'(h + y)
//
// The x-step matrix M(r) = G + r H'H is factored once per value of r and
// cached; a Tikhonov-regularized fallback (floor 1e-12 ||M||) is used when
// the plain factorization cannot reproduce the right-hand side, and such
// solves are flagged. A right-hand side that stays inconsistent after
// regularization means l_r has no minimizer; that raises SingularSystem.

struct FactorCache {
  double r = -1.0;
  bool regularized = false;
  Mat M;
  double m_norm = 0.0;
  Eigen::LDLT<Mat> ldlt;

  // (Re)factor M(r) = G + r H'H if r changed since the last call.
  void ensure(const model::QpProblem& p, double r_value);
};

struct InnerSolution {
  Vec x;
  Vec y;
  double objective = 0.0;             // l_r at (x, y)
  double fixed_point_residual = 0.0;  // max(||dx||_inf, ||dy||_inf) of last sweep
  int iterations = 0;
  bool regularized = false;
};

// Thrown when the alternation exhausts max_iter; carries the best iterate.
class MaxIterError : public Error {
 public:
  MaxIterError(std::string message, InnerSolution best_iterate)
      : Error(ErrorCode::MaxIterExceeded, std::move(message)), best(std::move(best_iterate)) {}

  InnerSolution best;
};

double l_r_value(const model::QpProblem& p, const Vec& x, const Vec& y, const Vec& lambda,
                 double r);

// Exact partial minimizers used by the alternation (exposed for tests).
Vec y_step(const model::QpProblem& p, const Vec& x, const Vec& lambda, double r);
Vec x_step(const model::QpProblem& p, const Vec& y, const Vec& lambda, double r,
           FactorCache& cache);

// Joint minimization of l_r over R^n x K. Terminates when the sweep
// fixed-point residual drops to inner_tol; throws MaxIterError past max_iter
// and SingularSystem when the x-step is unsolvable (l_r unbounded below).
// x0/cache enable warm starts across outer iterations.
InnerSolution minimize_l_r(const model::QpProblem& p, const Vec& lambda, double r,
                           double inner_tol, int max_iter, const Vec* x0 = nullptr,
                           FactorCache* cache = nullptr);

// First-order stationarity of (x, y) for min l_r over R^n x K:
//   max( ||grad_x l_r||_inf, ||y - Pi_K(y - grad_y l_r)||_inf ).
double stationarity_residual(const model::QpProblem& p, const Vec& lambda, double r,
                             const InnerSolution& solution);

}  // namespace lcv::inner
