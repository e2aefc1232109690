#include "lcv/inner_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lcv::inner {

namespace {

// Relative residual above which a plain LDLT solve falls back to the
// regularized factorization, and above which even the regularized solve is
// declared inconsistent (no minimizer in x, so l_r is unbounded below).
constexpr double kRetryResidual = 1e-9;
constexpr double kInconsistentResidual = 1e-7;

}  // namespace

void FactorCache::ensure(const model::QpProblem& p, double r_value) {
  if (r == r_value && M.rows() == p.n()) return;
  r = r_value;
  regularized = false;
  M = p.G + r_value * (p.H.transpose() * p.H);
  m_norm = M.cwiseAbs().maxCoeff();
  ldlt.compute(M);
}

double l_r_value(const model::QpProblem& p, const Vec& x, const Vec& y, const Vec& lambda,
                 double r) {
  const Vec residual = (p.H * x - p.h) - y;
  return model::objective_value(p, x) + lambda.dot(residual) + 0.5 * r * residual.squaredNorm();
}

Vec y_step(const model::QpProblem& p, const Vec& x, const Vec& lambda, double r) {
  return cones::project(p.cone, p.H * x - p.h + lambda / r);
}

namespace {

// Solve with the cached factorization plus a couple of refinement passes
// measured against the unregularized matrix; returns the final residual.
double refined_solve(const FactorCache& cache, const Vec& rhs, Vec& x) {
  x = cache.ldlt.solve(rhs);
  if (!x.allFinite()) return std::numeric_limits<double>::infinity();
  Vec residual = rhs - cache.M * x;
  for (int pass = 0; pass < 2; ++pass) {
    const Vec correction = cache.ldlt.solve(residual);
    if (!correction.allFinite()) break;
    x += correction;
    residual = rhs - cache.M * x;
  }
  return residual.lpNorm<Eigen::Infinity>();
}

}  // namespace

Vec x_step(const model::QpProblem& p, const Vec& y, const Vec& lambda, double r,
           FactorCache& cache) {
  cache.ensure(p, r);
  const Vec rhs = -p.c - p.H.transpose() * lambda + r * (p.H.transpose() * (p.h + y));
  const double rhs_scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();

  Vec x;
  double residual = refined_solve(cache, rhs, x);
  if (residual > kRetryResidual * rhs_scale) {
    if (!cache.regularized) {
      // Tikhonov floor: keeps the solve well-posed when M(r) is singular.
      const double floor = std::max(1e-12 * cache.m_norm, 1e-300);
      cache.ldlt.compute(cache.M + floor * Mat::Identity(cache.M.rows(), cache.M.cols()));
      cache.regularized = true;
    }
    residual = refined_solve(cache, rhs, x);
    if (residual > kInconsistentResidual * rhs_scale) {
      std::ostringstream os;
      os << "x-step system is singular beyond least-squares recovery (relative residual "
         << residual / rhs_scale << "); l_r has no minimizer";
      throw Error(ErrorCode::SingularSystem, os.str());
    }
  }
  return x;
}

InnerSolution minimize_l_r(const model::QpProblem& p, const Vec& lambda, double r,
                           double inner_tol, int max_iter, const Vec* x0, FactorCache* cache) {
  if (lambda.size() != p.m()) {
    throw Error(ErrorCode::DimensionMismatch, "lambda has " + std::to_string(lambda.size()) +
                                                  " entries, expected " + std::to_string(p.m()));
  }
  if (r <= 0.0 || inner_tol <= 0.0 || max_iter < 1) {
    throw Error(ErrorCode::InvalidArgument, "minimize_l_r requires r > 0, inner_tol > 0, max_iter >= 1");
  }
  FactorCache local_cache;
  FactorCache& factors = cache ? *cache : local_cache;

  InnerSolution solution;
  solution.x = (x0 && x0->size() == p.n()) ? *x0 : Vec::Zero(p.n());
  solution.y = y_step(p, solution.x, lambda, r);

  for (int it = 1; it <= max_iter; ++it) {
    const Vec x_next = x_step(p, solution.y, lambda, r, factors);
    const Vec y_next = y_step(p, x_next, lambda, r);
    solution.fixed_point_residual =
        std::max((x_next - solution.x).lpNorm<Eigen::Infinity>(),
                 (y_next - solution.y).lpNorm<Eigen::Infinity>());
    solution.x = x_next;
    solution.y = y_next;
    solution.iterations = it;
    if (solution.fixed_point_residual <= inner_tol) {
      solution.objective = l_r_value(p, solution.x, solution.y, lambda, r);
      solution.regularized = factors.regularized;
      return solution;
    }
  }

  solution.objective = l_r_value(p, solution.x, solution.y, lambda, r);
  solution.regularized = factors.regularized;
  std::ostringstream os;
  os << "alternation did not reach inner_tol " << inner_tol << " within " << max_iter
     << " iterations (fixed-point residual " << solution.fixed_point_residual << ")";
  throw MaxIterError(os.str(), solution);
}

double stationarity_residual(const model::QpProblem& p, const Vec& lambda, double r,
                             const InnerSolution& solution) {
  const Vec constraint_gap = (p.H * solution.x - p.h) - solution.y;
  const Vec grad_x = p.G * solution.x + p.c + p.H.transpose() * (lambda + r * constraint_gap);
  const Vec grad_y = -(lambda + r * constraint_gap);
  const double x_res = grad_x.lpNorm<Eigen::Infinity>();
  const double y_res =
      (solution.y - cones::project(p.cone, solution.y - grad_y)).lpNorm<Eigen::Infinity>();
  return std::max(x_res, y_res);
}

}  // namespace lcv::inner
