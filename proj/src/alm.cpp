#include "lcv/alm.hpp"

#include <algorithm>
#include <cmath>

namespace lcv::alm {

double AlmConfig::effective_inner_tol() const {
  if (inner_tol) return *inner_tol;
  return std::min(1e-8, 0.1 * tol);
}

const char* solve_status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::FeasibleOptimal: return "FeasibleOptimal";
    case SolveStatus::LeastViolationSolution: return "LeastViolationSolution";
    case SolveStatus::MaxOuterExceeded: return "MaxOuterExceeded";
    case SolveStatus::UnboundedDetected: return "UnboundedDetected";
  }
  return "Unknown";
}

namespace {

void validate_config(const AlmConfig& config) {
  if (config.r0 <= 0.0 || config.r_growth < 1.0 || config.r_max < config.r0 ||
      config.tol <= 0.0 || config.feas_tol <= 0.0 || config.max_outer < 1 || config.effective_inner_tol() <= 0.0 ||
      config.inner_max_iter < 1) {
    throw Error(ErrorCode::InvalidArgument,
                "AlmConfig requires r0 > 0, r_growth >= 1, r_max >= r0, tol > 0, feas_tol > 0, "
                "max_outer >= 1, inner_tol > 0, inner_max_iter >= 1");
  }
}

void fill_residuals(const model::QpProblem& p, AlmState& state) {
  const Vec g = p.H * state.x - p.h;
  state.s = state.y - g;
  state.shift_norm = state.s.norm();
  state.opt_residual = (p.H.transpose() * (g - state.y)).lpNorm<Eigen::Infinity>();
  state.proj_residual = (cones::project(p.cone, g) - state.y).lpNorm<Eigen::Infinity>();
  state.lambda_norm = state.lambda.norm();
}

// The stored r is the penalty that produced the incoming state; the first
// step consumes it as r_0, later steps apply the growth rule first.
AlmState step_with_cache(const AlmState& state, const model::QpProblem& p,
                         const AlmConfig& config, inner::FactorCache& cache) {
  const double r =
      state.k == 0 ? state.r : std::min(config.r_max, state.r * config.r_growth);
  const inner::InnerSolution inner_solution =
      inner::minimize_l_r(p, state.lambda, r, config.effective_inner_tol(),
                          config.inner_max_iter, &state.x, &cache);

  AlmState next;
  next.k = state.k + 1;
  next.x = inner_solution.x;
  next.y = inner_solution.y;
  next.r = r;
  const Vec g = p.H * next.x - p.h;
  next.lambda = state.lambda + r * (g - next.y);
  fill_residuals(p, next);
  next.inner_iterations = inner_solution.iterations;
  next.l_r_value = inner_solution.objective;
  next.regularized = inner_solution.regularized;
  return next;
}

TraceRecord to_trace(const AlmState& state) {
  return TraceRecord{state.k,           state.r,
                     state.shift_norm,  state.opt_residual,
                     state.proj_residual, state.lambda_norm,
                     state.inner_iterations, state.l_r_value};
}

}  // namespace

AlmState initial_state(const model::QpProblem& p, const AlmConfig& config, const Vec* lambda0) {
  validate_config(config);
  if (lambda0 && lambda0->size() != p.m()) {
    throw Error(ErrorCode::DimensionMismatch,
                "lambda0 has " + std::to_string(lambda0->size()) + " entries, expected " +
                    std::to_string(p.m()));
  }
  AlmState state;
  state.k = 0;
  state.x = Vec::Zero(p.n());
  state.y = cones::project(p.cone, -p.h);
  state.lambda = lambda0 ? *lambda0 : Vec::Zero(p.m());
  state.r = config.r0;
  fill_residuals(p, state);
  return state;
}

AlmState step(const AlmState& state, const model::QpProblem& p, const AlmConfig& config) {
  validate_config(config);
  inner::FactorCache cache;
  return step_with_cache(state, p, config, cache);
}

SolveReport solve(const model::QpProblem& p, const AlmConfig& config, const Vec* lambda0) {
  model::validate(p);
  validate_config(config);

  SolveReport report;
  if (model::is_polyhedral(p)) {
    if (auto direction = model::recession_descent_direction(p)) {
      report.status = SolveStatus::UnboundedDetected;
      report.state = initial_state(p, config, lambda0);
      report.shift = model::ShiftVector{report.state.s, report.state.shift_norm};
      report.objective = model::objective_value(p, report.state.x);
      report.detail =
          "objective decreases along a feasible recession direction; every shifted "
          "problem is unbounded below";
      return report;
    }
  }

  AlmState state = initial_state(p, config, lambda0);
  inner::FactorCache cache;
  report.trace.reserve(static_cast<std::size_t>(std::min(config.max_outer, 4096)));

  report.status = SolveStatus::MaxOuterExceeded;
  for (int k = 1; k <= config.max_outer; ++k) {
    AlmState next;
    try {
      next = step_with_cache(state, p, config, cache);
    } catch (const Error& error) {
      if (error.code() == ErrorCode::SingularSystem) {
        // The inner subproblem has no minimizer: the objective recedes along
        // a constraint-compatible direction.
        report.status = SolveStatus::UnboundedDetected;
        report.detail = error.what();
        break;
      }
      throw;
    }
    report.trace.push_back(to_trace(next));
    state = next;

    if (state.opt_residual <= config.tol && state.proj_residual <= config.tol) {
      report.status = state.shift_norm <= std::max(config.feas_tol, config.tol)
                          ? SolveStatus::FeasibleOptimal
                          : SolveStatus::LeastViolationSolution;
      break;
    }
  }

  report.state = state;
  report.shift = model::ShiftVector{state.s, state.shift_norm};
  report.objective = model::objective_value(p, state.x);
  return report;
}

bool check_optimality_certificate(const model::QpProblem& p, const Vec& x, const Vec& y,
                                  const Vec& lambda, double r, double tol) {
  inner::InnerSolution candidate;
  candidate.x = x;
  candidate.y = y;
  if (inner::stationarity_residual(p, lambda, r, candidate) > tol) return false;
  const Vec g = p.H * x - p.h;
  if ((p.H.transpose() * (g - y)).lpNorm<Eigen::Infinity>() > tol) return false;
  return (cones::project(p.cone, g) - y).lpNorm<Eigen::Infinity>() <= tol;
}

}  // namespace lcv::alm
