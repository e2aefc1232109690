#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>

#include "lcv/cones.hpp"
#include "lcv/errors.hpp"

namespace lcv::model {

// Convex quadratic program with conic-represented affine constraints:
//
//   minimize    f(x) = 1/2 x'Gx + c'x
//   subject to  g(x) = Hx - h in K
//
// G is symmetric positive semidefinite, K a product of ConeBlocks with
// total dimension m = rows(H). The constraint shift set is
// S = { s : exists x with g(x) + s in K }; when the problem is infeasible
// (0 not in S) the solver targets the least-norm shift in S.
struct QpProblem {
  Mat G;
  Vec c;
  Mat H;
  Vec h;
  cones::ConeSpec cone;

  Eigen::Index n() const { return c.size(); }
  Eigen::Index m() const { return h.size(); }
};

// Structural checks: dimensions consistent, G symmetric (within 1e-10) and
// positive semidefinite (smallest eigenvalue >= -psd_tol), cone nonempty and
// aligned with rows of H. Throws Error with code DimensionMismatch, NotPsd,
// or EmptyCone.
void validate(const QpProblem& p, double psd_tol = 1e-10);

// g(x) = Hx - h.
Vec eval_constraint(const QpProblem& p, const Vec& x);

// f(x) = 1/2 x'Gx + c'x.
double objective_value(const QpProblem& p, const Vec& x);

// Least-norm constraint shift and its Euclidean norm.
struct ShiftVector {
  Vec s;
  double norm = 0.0;
};

enum class CertificateKind { ShiftSetClosed, LevelBounded, UnboundedBelow, Inconclusive };

const char* certificate_kind_name(CertificateKind kind);

// Outcome of a structural diagnostic. `direction` carries a unit-norm
// witness when one was found (a nonzero recession direction, or a descent
// direction for the unbounded check); witnesses are re-verified by direct
// substitution before being returned.
struct Certificate {
  CertificateKind kind = CertificateKind::Inconclusive;
  std::optional<Vec> direction;
  std::string detail;
};

struct DiagnosticOptions {
  double tol = 1e-8;      // "= 0" decisions on unit-normalized candidates
  int max_iter = 200000;  // cap for the inner projection solves
};

// Decides whether { d : Hd in K^inf } = {0} (K^inf the recession cone of K),
// which guarantees the shift set S is closed. Polyhedral blocks only; throws
// UnsupportedDiagnostic for SecondOrder blocks. Returns ShiftSetClosed, or
// Inconclusive with a witness direction when a nonzero recession direction
// of the constraint set exists. Sound but incomplete: a stalled search also
// reports Inconclusive.
Certificate check_shift_set_closed(const QpProblem& p, const DiagnosticOptions& opts = {});

// Decides whether { d : c'd <= 0, Gd = 0, Hd in K^inf } = {0}, which makes
// every shifted problem level-bounded. Same support and caveats as
// check_shift_set_closed.
Certificate check_level_bounded(const QpProblem& p, const DiagnosticOptions& opts = {});

// Searches for d with c'd < 0, Gd = 0, Hd in K^inf; such a direction makes
// the objective unbounded below on every nonempty shifted feasible set.
// `s` must be a shift with P(s) feasible (verified here by a feasibility
// pass; throws InvalidShift otherwise). Returns UnboundedBelow with a
// witness, else Inconclusive.
Certificate check_unbounded_below(const QpProblem& p, const Vec& s,
                                  const DiagnosticOptions& opts = {});

// Shared search used by check_unbounded_below and by the solver's
// pre-flight check: a unit direction d with c'd < 0, Gd = 0, Hd in K^inf,
// or nullopt when none is found. Polyhedral blocks only.
std::optional<Vec> recession_descent_direction(const QpProblem& p,
                                               const DiagnosticOptions& opts = {});

// True when every cone block is Zero/NonPos/Box (the class the structural
// diagnostics support).
bool is_polyhedral(const QpProblem& p);

}  // namespace lcv::model
