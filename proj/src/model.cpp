#include "lcv/model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lcv::model {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string dim_text(Eigen::Index rows, Eigen::Index cols) {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

}  // namespace

void validate(const QpProblem& p, double psd_tol) {
  const Eigen::Index n = p.c.size();
  const Eigen::Index m = p.h.size();
  if (p.G.rows() != n || p.G.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "G must be " + dim_text(n, n) + " to match c, got " +
                                                  dim_text(p.G.rows(), p.G.cols()));
  }
  if (p.H.rows() != m || p.H.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "H must be " + dim_text(m, n) +
                                                  " to match h and c, got " +
                                                  dim_text(p.H.rows(), p.H.cols()));
  }
  if (p.cone.blocks().empty() || p.cone.total_dim() == 0) {
    throw Error(ErrorCode::EmptyCone, "the cone must contain at least one block");
  }
  if (p.cone.total_dim() != m) {
    throw Error(ErrorCode::DimensionMismatch,
                "cone blocks sum to dimension " + std::to_string(p.cone.total_dim()) +
                    " but h has " + std::to_string(m) + " rows");
  }
  if (n < 1) {
    throw Error(ErrorCode::DimensionMismatch, "the problem must have at least one variable");
  }
  const double asym = (p.G - p.G.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    std::ostringstream os;
    os << "G is not symmetric: max |G - G'| = " << asym;
    throw Error(ErrorCode::NotPsd, os.str());
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(p.G, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -psd_tol) {
    std::ostringstream os;
    os << "G is not positive semidefinite: smallest eigenvalue " << min_eig;
    throw Error(ErrorCode::NotPsd, os.str());
  }
}

Vec eval_constraint(const QpProblem& p, const Vec& x) {
  if (x.size() != p.n()) {
    throw Error(ErrorCode::DimensionMismatch, "x has " + std::to_string(x.size()) +
                                                  " entries, expected " + std::to_string(p.n()));
  }
  return p.H * x - p.h;
}

double objective_value(const QpProblem& p, const Vec& x) {
  return 0.5 * x.dot(p.G * x) + p.c.dot(x);
}

const char* certificate_kind_name(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::ShiftSetClosed: return "ShiftSetClosed";
    case CertificateKind::LevelBounded: return "LevelBounded";
    case CertificateKind::UnboundedBelow: return "UnboundedBelow";
    case CertificateKind::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

namespace {

// Recession cone of the constraint set in direction space,
// C = { d : E d = 0, A d <= 0 }, assembled from H rows according to the
// recession cone of each block of K. Polyhedral blocks only.
struct PolyhedralCone {
  Mat E;
  Mat A;
  Eigen::Index n = 0;
};

PolyhedralCone recession_system(const QpProblem& p, const char* caller) {
  std::vector<Eigen::Index> eq_rows;
  std::vector<Eigen::Index> le_rows;   // row d <= 0
  std::vector<Eigen::Index> ge_rows;   // row d >= 0, stored negated
  const auto& blocks = p.cone.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Eigen::Index off = p.cone.offset(b);
    switch (blocks[b].kind) {
      case cones::BlockKind::Zero:
        for (Eigen::Index i = 0; i < blocks[b].dim; ++i) eq_rows.push_back(off + i);
        break;
      case cones::BlockKind::NonPos:
        for (Eigen::Index i = 0; i < blocks[b].dim; ++i) le_rows.push_back(off + i);
        break;
      case cones::BlockKind::Box:
        for (Eigen::Index i = 0; i < blocks[b].dim; ++i) {
          const bool lo = blocks[b].lower[i] > -kInf;
          const bool hi = blocks[b].upper[i] < kInf;
          if (lo && hi) {
            eq_rows.push_back(off + i);  // bounded interval: recession {0}
          } else if (hi) {
            le_rows.push_back(off + i);
          } else if (lo) {
            ge_rows.push_back(off + i);
          }
          // doubly infinite: free coordinate, no constraint on d
        }
        break;
      case cones::BlockKind::SecondOrder:
        throw Error(ErrorCode::UnsupportedDiagnostic,
                    std::string(caller) + " supports only polyhedral cone blocks "
                                          "(Zero/NonPos/Box); found a SecondOrder block");
    }
  }
  PolyhedralCone cone;
  cone.n = p.n();
  cone.E.resize(static_cast<Eigen::Index>(eq_rows.size()), p.n());
  for (std::size_t i = 0; i < eq_rows.size(); ++i) cone.E.row(i) = p.H.row(eq_rows[i]);
  cone.A.resize(static_cast<Eigen::Index>(le_rows.size() + ge_rows.size()), p.n());
  for (std::size_t i = 0; i < le_rows.size(); ++i) cone.A.row(i) = p.H.row(le_rows[i]);
  for (std::size_t i = 0; i < ge_rows.size(); ++i) {
    cone.A.row(static_cast<Eigen::Index>(le_rows.size() + i)) = -p.H.row(ge_rows[i]);
  }
  return cone;
}

void append_rows(Mat& dst, const Mat& extra) {
  if (extra.rows() == 0) return;
  Mat merged(dst.rows() + extra.rows(), extra.cols());
  if (dst.rows() > 0) merged.topRows(dst.rows()) = dst;
  merged.bottomRows(extra.rows()) = extra;
  dst = std::move(merged);
}

// Projection of d onto C via the Moreau decomposition: the polar of C is the
// finitely generated cone { V w : w >= 0 } with V = [E', -E', A'], and
// Pi_C(d) = d - V w*, where w* solves the nonnegative least-squares problem
// min_{w >= 0} 1/2 || V w - d ||^2 (accelerated projected gradient).
Vec project_onto(const PolyhedralCone& cone, const Vec& d, int max_iter) {
  const Eigen::Index q = cone.E.rows();
  const Eigen::Index a = cone.A.rows();
  const Eigen::Index k = 2 * q + a;
  if (k == 0) return d;  // no constraints: C is all of R^n

  Mat v(cone.n, k);
  if (q > 0) {
    v.leftCols(q) = cone.E.transpose();
    v.middleCols(q, q) = -cone.E.transpose();
  }
  if (a > 0) v.rightCols(a) = cone.A.transpose();

  const Mat vtv = v.transpose() * v;
  const Vec vtd = v.transpose() * d;
  Eigen::SelfAdjointEigenSolver<Mat> es(vtv, Eigen::EigenvaluesOnly);
  const double lip = std::max(es.eigenvalues().maxCoeff(), 1e-30);
  const double crit = 1e-13 * (1.0 + vtd.lpNorm<Eigen::Infinity>());

  Vec w = Vec::Zero(k);
  Vec w_prev = w;
  Vec momentum = w;
  double t = 1.0;
  double obj_prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    const Vec grad = vtv * momentum - vtd;
    w = (momentum - grad / lip).cwiseMax(0.0);

    const Vec grad_w = vtv * w - vtd;
    const double pg_residual = (w - (w - grad_w).cwiseMax(0.0)).lpNorm<Eigen::Infinity>();
    if (pg_residual <= crit) break;

    const double obj = 0.5 * w.dot(vtv * w) - vtd.dot(w);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if (obj > obj_prev) {  // adaptive restart keeps the momentum honest
      t = 1.0;
      momentum = w;
    } else {
      momentum = w + ((t - 1.0) / t_next) * (w - w_prev);
      t = t_next;
    }
    obj_prev = obj;
    w_prev = w;
  }
  return d - v * w;
}

struct WitnessCheck {
  bool ok = false;
  double residual = 0.0;
};

// Re-verify a candidate direction by direct substitution: E d ~ 0 and
// A d <= tol after unit normalization.
WitnessCheck verify_direction(const PolyhedralCone& cone, const Vec& d, double tol) {
  WitnessCheck check;
  double residual = 0.0;
  if (cone.E.rows() > 0) residual = (cone.E * d).lpNorm<Eigen::Infinity>();
  if (cone.A.rows() > 0) residual = std::max(residual, (cone.A * d).maxCoeff());
  check.residual = residual;
  check.ok = residual <= tol;
  return check;
}

struct ZeroConeDecision {
  bool is_zero = false;
  bool stalled = false;
  std::optional<Vec> witness;
};

// Decides whether C = {0}. C = {0} iff the polar of C is all of R^n, iff
// every probe +-e_j projects onto C at the origin; any probe with a nonzero
// projection yields a recession-direction witness. An exact-kernel pre-pass
// catches lineality directions (E d = 0, A d = 0) cheaply.
ZeroConeDecision decide_zero_cone(const PolyhedralCone& cone, const DiagnosticOptions& opts) {
  ZeroConeDecision decision;

  Mat stacked = cone.E;
  append_rows(stacked, cone.A);
  if (stacked.rows() == 0) {
    decision.witness = Vec::Unit(cone.n, 0);
    return decision;
  }
  Eigen::FullPivLU<Mat> lu(stacked);
  lu.setThreshold(1e-10);
  if (lu.rank() < cone.n) {
    Vec candidate = lu.kernel().col(0);
    candidate.normalize();
    if (verify_direction(cone, candidate, opts.tol).ok) {
      decision.witness = candidate;
      return decision;
    }
  }

  for (Eigen::Index j = 0; j < cone.n; ++j) {
    for (const double sign : {1.0, -1.0}) {
      const Vec probe = sign * Vec::Unit(cone.n, j);
      Vec projected = project_onto(cone, probe, opts.max_iter);
      if (projected.norm() > opts.tol) {
        projected.normalize();
        if (verify_direction(cone, projected, opts.tol).ok) {
          decision.witness = projected;
          return decision;
        }
        decision.stalled = true;  // nonzero projection that fails substitution
      }
    }
  }
  decision.is_zero = !decision.stalled;
  return decision;
}

Certificate from_zero_cone_decision(const ZeroConeDecision& decision, CertificateKind pass_kind,
                                    const char* set_text) {
  Certificate cert;
  if (decision.is_zero) {
    cert.kind = pass_kind;
    cert.detail = std::string("all unit probes project onto ") + set_text +
                  " at the origin (sufficient condition; search is sound but incomplete)";
  } else if (decision.witness) {
    cert.kind = CertificateKind::Inconclusive;
    cert.direction = decision.witness;
    cert.detail = std::string("nonzero direction found in ") + set_text +
                  ", re-verified by substitution";
  } else {
    cert.kind = CertificateKind::Inconclusive;
    cert.detail = "witness search stalled before certifying either outcome";
  }
  return cert;
}

double smallest_eigenvalue(const Mat& g) {
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// One feasibility pass for the shifted problem: minimize
// 1/2 ||g(x) + s - y||^2 over x, y in K by exact alternation (least-squares
// x-step, projection y-step). Returns the residual shift norm.
double shifted_infeasibility(const QpProblem& p, const Vec& s, int max_iter) {
  const Vec target = p.h - s;  // g(x) + s = Hx - target
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(p.H);
  Vec y = cones::project(p.cone, -target);
  Vec x = cod.solve(y + target);
  for (int it = 0; it < max_iter; ++it) {
    const Vec y_next = cones::project(p.cone, p.H * x - target);
    const Vec x_next = cod.solve(y_next + target);
    const double move = std::max((y_next - y).lpNorm<Eigen::Infinity>(),
                                 (x_next - x).lpNorm<Eigen::Infinity>());
    y = y_next;
    x = x_next;
    if (move <= 1e-12) break;
  }
  return (p.H * x - target - y).norm();
}

}  // namespace

bool is_polyhedral(const QpProblem& p) {
  for (const auto& block : p.cone.blocks()) {
    if (block.kind == cones::BlockKind::SecondOrder) return false;
  }
  return true;
}

Certificate check_shift_set_closed(const QpProblem& p, const DiagnosticOptions& opts) {
  const PolyhedralCone cone = recession_system(p, "check_shift_set_closed");

  if (cone.E.rows() >= cone.n) {
    Eigen::FullPivLU<Mat> lu(cone.E);
    lu.setThreshold(1e-10);
    if (lu.rank() == cone.n) {
      Certificate cert;
      cert.kind = CertificateKind::ShiftSetClosed;
      cert.detail = "equality rows have full column rank, so the recession system is trivial";
      return cert;
    }
  }
  return from_zero_cone_decision(decide_zero_cone(cone, opts), CertificateKind::ShiftSetClosed,
                                 "{d : Ed = 0, Ad <= 0}");
}

namespace {

void require_polyhedral(const QpProblem& p, const char* caller) {
  if (!is_polyhedral(p)) {
    throw Error(ErrorCode::UnsupportedDiagnostic,
                std::string(caller) + " supports only polyhedral cone blocks "
                                      "(Zero/NonPos/Box); found a SecondOrder block");
  }
}

}  // namespace

Certificate check_level_bounded(const QpProblem& p, const DiagnosticOptions& opts) {
  require_polyhedral(p, "check_level_bounded");
  if (smallest_eigenvalue(p.G) > 1e-10) {
    Certificate cert;
    cert.kind = CertificateKind::LevelBounded;
    cert.detail = "G is positive definite, so Gd = 0 forces d = 0";
    return cert;
  }
  PolyhedralCone cone = recession_system(p, "check_level_bounded");
  append_rows(cone.E, p.G);
  append_rows(cone.A, Mat(p.c.transpose()));
  return from_zero_cone_decision(decide_zero_cone(cone, opts), CertificateKind::LevelBounded,
                                 "{d : c'd <= 0, Gd = 0, Ed = 0, Ad <= 0}");
}

std::optional<Vec> recession_descent_direction(const QpProblem& p,
                                               const DiagnosticOptions& opts) {
  if (p.c.lpNorm<Eigen::Infinity>() == 0.0) return std::nullopt;
  if (smallest_eigenvalue(p.G) > 1e-10) return std::nullopt;

  PolyhedralCone cone = recession_system(p, "recession_descent_direction");
  append_rows(cone.E, p.G);

  // min c'd over the recession cone intersected with the unit ball equals
  // -||Pi_C(-c)||, attained at the normalized projection.
  const Vec projected = project_onto(cone, -p.c, opts.max_iter);
  if (projected.norm() <= opts.tol * (1.0 + p.c.norm())) return std::nullopt;
  Vec direction = projected.normalized();
  const WitnessCheck membership = verify_direction(cone, direction, opts.tol);
  if (!membership.ok || p.c.dot(direction) >= -opts.tol) return std::nullopt;
  return direction;
}

Certificate check_unbounded_below(const QpProblem& p, const Vec& s,
                                  const DiagnosticOptions& opts) {
  require_polyhedral(p, "check_unbounded_below");
  if (s.size() != p.m()) {
    throw Error(ErrorCode::DimensionMismatch, "shift has " + std::to_string(s.size()) +
                                                  " entries, expected " + std::to_string(p.m()));
  }
  const double infeasibility = shifted_infeasibility(p, s, opts.max_iter);
  if (infeasibility > 1e-6 * (1.0 + s.norm())) {
    std::ostringstream os;
    os << "the shifted problem P(s) is infeasible (residual shift norm " << infeasibility
       << "); pass a shift from the feasible shift set";
    throw Error(ErrorCode::InvalidShift, os.str());
  }

  std::optional<Vec> direction = recession_descent_direction(p, opts);
  Certificate cert;
  if (direction) {
    cert.kind = CertificateKind::UnboundedBelow;
    cert.direction = std::move(direction);
    std::ostringstream os;
    os << "direction d with c'd = " << p.c.dot(*cert.direction)
       << " < 0, Gd = 0, and Hd in the recession cone of K";
    cert.detail = os.str();
  } else {
    cert.kind = CertificateKind::Inconclusive;
    cert.detail = "no improving recession direction found (search is sound but incomplete)";
  }
  return cert;
}

}  // namespace lcv::model
