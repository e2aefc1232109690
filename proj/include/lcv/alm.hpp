#pragma once

#include <optional>
#include <vector>

#include "lcv/inner_solver.hpp"
#include "lcv/model.hpp"

namespace lcv::alm {

// Outer loop of the augmented Lagrangian method. One outer iteration with
// multiplier lambda^k and penalty r_k:
//
//   1. (x^{k+1}, y^{k+1})  = argmin_{x, y in K} l_r(x, y, lambda^k)
//   2. lambda^{k+1}        = lambda^k + r_k (g(x^{k+1}) - y^{k+1})
//   3. r_{k+1}             = min(r_max, growth * r_k)
//
// The shift iterate s^k = y^k - g(x^k) has nonincreasing norm and converges
// to the least-norm feasible shift; the multiplier drifts along that shift
// direction without converging whenever the problem is infeasible. The loop
// stops on the residual pair below, which certifies an approximate solution
// of the least-violation problem whether or not 0 is a feasible shift.

struct AlmConfig {
  double r0 = 1.0;
  double r_growth = 1.0;  // >= 1
  double r_max = 1e6;
  double tol = 1e-8;  // stopping tolerance for both residuals
  // Classification threshold: the final shift counts as zero (problem
  // flagged feasible) when its norm is below this. Separate from `tol`
  // because the shift norm settles at the same linear rate as the residuals
  // and may sit a small multiple above it at the stopping iteration.
  double feas_tol = 1e-6;
  int max_outer = 1000;
  // Tolerance handed to the inner solver; defaults to min(1e-8, 0.1 * tol).
  std::optional<double> inner_tol;
  int inner_max_iter = 500000;

  double effective_inner_tol() const;
};

struct AlmState {
  int k = 0;  // outer iterations completed
  Vec x;
  Vec y;
  Vec lambda;
  // Penalty r_k that produced this state. step() consumes the initial
  // state's value as r_0 and applies the growth rule to later states.
  double r = 0.0;
  Vec s;           // y - g(x)
  double shift_norm = 0.0;
  double opt_residual = 0.0;   // ||H'(g(x) - y)||_inf
  double proj_residual = 0.0;  // ||Pi_K(g(x)) - y||_inf
  double lambda_norm = 0.0;
  int inner_iterations = 0;
  double l_r_value = 0.0;
  bool regularized = false;
};

struct TraceRecord {
  int k = 0;
  double r = 0.0;
  double shift_norm = 0.0;
  double opt_residual = 0.0;
  double proj_residual = 0.0;
  double lambda_norm = 0.0;
  int inner_iterations = 0;
  double l_r_value = 0.0;
};

enum class SolveStatus {
  FeasibleOptimal,
  LeastViolationSolution,
  MaxOuterExceeded,
  UnboundedDetected,
};

const char* solve_status_name(SolveStatus status);

struct SolveReport {
  SolveStatus status = SolveStatus::MaxOuterExceeded;
  AlmState state;
  model::ShiftVector shift;
  double objective = 0.0;  // f at the final x
  std::vector<TraceRecord> trace;
  std::string detail;
};

// State before the first outer iteration: x = 0, y = Pi_K(g(x)),
// lambda = lambda0 (zeros when omitted), r = r0.
AlmState initial_state(const model::QpProblem& p, const AlmConfig& config,
                       const Vec* lambda0 = nullptr);

// One outer iteration (steps 1-3 above) from an arbitrary state. Pure:
// rebuilds the factorization each call; solve() keeps a persistent cache.
AlmState step(const AlmState& state, const model::QpProblem& p, const AlmConfig& config);

// Full outer loop. Validates the problem, pre-checks for an objective
// recession direction on polyhedral cones (status UnboundedDetected), then
// iterates until opt_residual <= tol and proj_residual <= tol or max_outer.
// Status is FeasibleOptimal when additionally ||s|| <= max(feas_tol, tol),
// else LeastViolationSolution. Inner-solver errors propagate, except that
// SingularSystem (inner problem unbounded below) maps to UnboundedDetected.
SolveReport solve(const model::QpProblem& p, const AlmConfig& config = {},
                  const Vec* lambda0 = nullptr);

// Termination test used by `lcv verify`: stationarity of (x, y) for
// l_r(., ., lambda), ||H'(g(x) - y)||_inf, and ||Pi_K(g(x)) - y||_inf all
// within tol.
bool check_optimality_certificate(const model::QpProblem& p, const Vec& x, const Vec& y,
                                  const Vec& lambda, double r, double tol);

}  // namespace lcv::alm
