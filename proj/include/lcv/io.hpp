#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lcv/alm.hpp"
#include "lcv/model.hpp"

namespace lcv::io {

// Problem files are JSON:
//
//   {
//     "n": 2,
//     "G": [[2,0],[0,2]],            // dense (n, m <= 64) or COO object
//     "c": [0,0],
//     "H": {"rows":[0],"cols":[1],"vals":[1.0],"shape":[1,2]},
//     "h": [0],
//     "cones": [{"zero":1}, {"nonpos":2},
//               {"box":{"l":[0,"-inf"],"u":[1,"inf"]}}, {"soc":3}]
//   }
//
// Box bounds admit numbers or "inf"/"-inf"/null. All floats are written with
// 17 significant digits so files round-trip bit-identically.

model::QpProblem parse_problem_string(const std::string& text);
model::QpProblem parse_problem(const std::string& path);

std::string write_problem_string(const model::QpProblem& p);
void write_problem(const model::QpProblem& p, const std::string& path);

// JSON array of m numbers (initial multiplier for `lcv solve --lambda0`).
Vec parse_vector(const std::string& path, Eigen::Index expected_size);

// Iteration trace, one row per outer iteration:
// k,r,shift_norm,opt_residual,proj_residual,lambda_norm,inner_iters,l_r_value
std::string trace_csv_string(const std::vector<alm::TraceRecord>& trace);
void write_trace_csv(const std::vector<alm::TraceRecord>& trace, const std::string& path);

// %.17g, the serialization used for every float this module writes.
std::string format_double(double value);

enum class Family { FeasibleQp, InfeasibleHalfspaces, InconsistentEqualities, RandomInfeasible };

Family family_from_name(const std::string& name);
const char* family_name(Family family);

struct InstanceSeedSpec {
  Family family = Family::FeasibleQp;
  Eigen::Index n = 4;
  Eigen::Index m = 6;
  std::uint64_t seed = 0;
};

// Deterministic instance generation: the same spec always produces the same
// problem (the generator draws through a fixed mt19937_64 pipeline, never
// through platform-dependent distributions).
//
//   feasible_qp              strictly convex, strictly feasible point baked in
//   infeasible_halfspaces    opposing halfspace pair; n=1, m=2 yields the
//                            canonical instance x <= 0, x >= 2 with f = x^2
//   inconsistent_equalities  equality rows with a contradicting duplicate;
//                            n=1, m=2 yields x = 0, x = 2 with f = (x-5)^2 - 25
//   random_infeasible        mixed Zero/NonPos/Box blocks, strictly convex,
//                            with an infeasible constraint pair baked in
model::QpProblem generate_instance(const InstanceSeedSpec& spec);

}  // namespace lcv::io
