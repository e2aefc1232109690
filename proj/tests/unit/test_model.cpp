#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "lcv/model.hpp"
#include "test_util.hpp"

using lcv::Vec;
using lcv::cones::ConeBlock;
using lcv::cones::ConeSpec;
using lcv::model::Certificate;
using lcv::model::CertificateKind;
using lcv::model::QpProblem;
using lcv::testutil::mat;
using lcv::testutil::two_halfspace;
using lcv::testutil::vec;

namespace {

lcv::ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const lcv::Error& e) {
    return e.code();
  }
  FAIL("expected an Error to be thrown");
  return lcv::ErrorCode::InvalidArgument;
}

// Verify a recession witness by direct substitution: unit norm, and H d lies
// in the recession cone of each polyhedral block (zeros on Zero rows, <= 0 on
// NonPos rows, zeros on finitely-bounded Box rows).
void check_recession_witness(const QpProblem& p, const Vec& d, double tol = 1e-8) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  CHECK(std::abs(d.norm() - 1.0) <= tol);
  const Vec hd = p.H * d;
  const auto& blocks = p.cone.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto seg = hd.segment(p.cone.offset(b), blocks[b].dim);
    switch (blocks[b].kind) {
      case lcv::cones::BlockKind::Zero:
        CHECK(seg.lpNorm<Eigen::Infinity>() <= tol);
        break;
      case lcv::cones::BlockKind::NonPos:
        CHECK(seg.maxCoeff() <= tol);
        break;
      case lcv::cones::BlockKind::Box:
        for (Eigen::Index i = 0; i < seg.size(); ++i) {
          if (blocks[b].lower[i] > -kInf) CHECK(seg[i] >= -tol);
          if (blocks[b].upper[i] < kInf) CHECK(seg[i] <= tol);
        }
        break;
      case lcv::cones::BlockKind::SecondOrder:
        FAIL("polyhedral diagnostics should not emit SOC witnesses");
    }
  }
}

}  // namespace

TEST_CASE("validate accepts a well-formed problem") {
  CHECK_NOTHROW(lcv::model::validate(two_halfspace()));
}

TEST_CASE("validate rejects structural defects") {
  QpProblem p = two_halfspace();
  p.G = mat(2, 2, {0.0, 1.0, 1.0, 0.0});  // indefinite, eigenvalues +-1
  p.c = vec({0.0, 0.0});
  p.H = mat(2, 2, {1.0, 0.0, -1.0, 0.0});
  CHECK(code_of([&] { lcv::model::validate(p); }) == lcv::ErrorCode::NotPsd);

  QpProblem asym = two_halfspace();
  asym.G = mat(1, 1, {1.0});
  asym.G.resize(2, 2);
  asym.G << 1.0, 0.1, 0.0, 1.0;  // not symmetric
  asym.c = vec({0.0, 0.0});
  asym.H = mat(2, 2, {1.0, 0.0, -1.0, 0.0});
  CHECK(code_of([&] { lcv::model::validate(asym); }) == lcv::ErrorCode::NotPsd);

  QpProblem rows = two_halfspace();
  rows.cone = ConeSpec({ConeBlock::nonpos(3)});  // 3 != rows(H) = 2
  CHECK(code_of([&] { lcv::model::validate(rows); }) == lcv::ErrorCode::DimensionMismatch);

  QpProblem cols = two_halfspace();
  cols.c = vec({0.0, 0.0});  // 2 != cols(G) = 1
  CHECK(code_of([&] { lcv::model::validate(cols); }) == lcv::ErrorCode::DimensionMismatch);

  QpProblem empty = two_halfspace();
  empty.cone = ConeSpec();
  empty.H = Eigen::MatrixXd(0, 1);
  empty.h = Vec(0);
  CHECK(code_of([&] { lcv::model::validate(empty); }) == lcv::ErrorCode::EmptyCone);
}

TEST_CASE("validate tolerates tiny negative curvature within psd_tol") {
  QpProblem p = two_halfspace();
  p.G = mat(1, 1, {-1e-12});
  CHECK_NOTHROW(lcv::model::validate(p));
  p.G = mat(1, 1, {-1e-6});
  CHECK(code_of([&] { lcv::model::validate(p); }) == lcv::ErrorCode::NotPsd);
}

TEST_CASE("constraint and objective evaluation") {
  const QpProblem p = two_halfspace();
  const Vec g = lcv::model::eval_constraint(p, vec({1.0}));
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(1.0));
  CHECK(lcv::model::objective_value(p, vec({1.0})) == doctest::Approx(1.0));
  CHECK(lcv::model::objective_value(p, vec({0.0})) == 0.0);

  CHECK(code_of([&] { lcv::model::eval_constraint(p, vec({1.0, 2.0})); }) ==
        lcv::ErrorCode::DimensionMismatch);
}

TEST_CASE("shift set closedness: full-rank equality rows decide immediately") {
  QpProblem p;
  p.G = mat(1, 1, {2.0});
  p.c = vec({0.0});
  p.H = mat(1, 1, {1.0});
  p.h = vec({0.0});
  p.cone = ConeSpec({ConeBlock::zero(1)});
  const Certificate cert = lcv::model::check_shift_set_closed(p);
  CHECK(cert.kind == CertificateKind::ShiftSetClosed);
}

TEST_CASE("shift set closedness: unbounded inequality direction is a witness") {
  // Single constraint -x <= 0: d = 1 gives Hd = -1 <= 0, a nonzero recession
  // direction, so closedness cannot be certified this way.
  QpProblem p;
  p.G = mat(1, 1, {2.0});
  p.c = vec({0.0});
  p.H = mat(1, 1, {-1.0});
  p.h = vec({0.0});
  p.cone = ConeSpec({ConeBlock::nonpos(1)});
  const Certificate cert = lcv::model::check_shift_set_closed(p);
  CHECK(cert.kind == CertificateKind::Inconclusive);
  REQUIRE(cert.direction.has_value());
  check_recession_witness(p, *cert.direction);
  CHECK(std::abs((*cert.direction)[0] - 1.0) <= 1e-8);
}

TEST_CASE("shift set closedness: opposing inequalities pin the recession cone") {
  // x <= 0 and -x <= 0 admit only d = 0.
  const Certificate cert = lcv::model::check_shift_set_closed(two_halfspace());
  CHECK(cert.kind == CertificateKind::ShiftSetClosed);
}

TEST_CASE("level-boundedness: definite curvature decides immediately") {
  const Certificate cert = lcv::model::check_level_bounded(two_halfspace());
  CHECK(cert.kind == CertificateKind::LevelBounded);
}

TEST_CASE("level-boundedness: linear objective over a bounded direction set") {
  // min x s.t. -x <= 0. Candidate directions need c'd <= 0 and Hd <= 0,
  // i.e. d <= 0 and -d <= 0: only d = 0, so level sets are bounded even
  // though G = 0.
  QpProblem p;
  p.G = mat(1, 1, {0.0});
  p.c = vec({1.0});
  p.H = mat(1, 1, {-1.0});
  p.h = vec({0.0});
  p.cone = ConeSpec({ConeBlock::nonpos(1)});
  const Certificate cert = lcv::model::check_level_bounded(p);
  CHECK(cert.kind == CertificateKind::LevelBounded);
}

TEST_CASE("level-boundedness: min -x over x <= 0 is level-bounded") {
  // Directions need c'd <= 0 (-d <= 0, so d >= 0) and Hd <= 0 (d <= 0):
  // only d = 0. Every level set of -x over the feasible ray is bounded.
  QpProblem p;
  p.G = mat(1, 1, {0.0});
  p.c = vec({-1.0});
  p.H = mat(1, 1, {1.0});
  p.h = vec({0.0});
  p.cone = ConeSpec({ConeBlock::nonpos(1)});
  const Certificate cert = lcv::model::check_level_bounded(p);
  CHECK(cert.kind == CertificateKind::LevelBounded);
}

TEST_CASE("level-boundedness: min x over x <= 0 escapes along -1") {
  QpProblem p;
  p.G = mat(1, 1, {0.0});
  p.c = vec({1.0});
  p.H = mat(1, 1, {1.0});
  p.h = vec({0.0});
  p.cone = ConeSpec({ConeBlock::nonpos(1)});
  const Certificate cert = lcv::model::check_level_bounded(p);
  CHECK(cert.kind == CertificateKind::Inconclusive);
  REQUIRE(cert.direction.has_value());
  check_recession_witness(p, *cert.direction);
  CHECK(std::abs((*cert.direction)[0] + 1.0) <= 1e-8);
  CHECK(p.c.dot(*cert.direction) <= 1e-8);
}

TEST_CASE("unbounded-below: strictly convex objective is conclusive-negative") {
  const QpProblem p = two_halfspace();
  const Certificate cert = lcv::model::check_unbounded_below(p, vec({-1.0, -1.0}));
  CHECK(cert.kind == CertificateKind::Inconclusive);
  CHECK_FALSE(cert.direction.has_value());
}

TEST_CASE("unbounded-below: descent ray inside the recession cone is found") {
  // min x s.t. x <= 0: d = -1 has c'd < 0 and Hd <= 0.
  QpProblem p;
  p.G = mat(1, 1, {0.0});
  p.c = vec({1.0});
  p.H = mat(1, 1, {1.0});
  p.h = vec({0.0});
  p.cone = ConeSpec({ConeBlock::nonpos(1)});
  const Certificate cert = lcv::model::check_unbounded_below(p, vec({0.0}));
  CHECK(cert.kind == CertificateKind::UnboundedBelow);
  REQUIRE(cert.direction.has_value());
  check_recession_witness(p, *cert.direction);
  CHECK(p.c.dot(*cert.direction) < 0.0);
}

TEST_CASE("unbounded-below: min -x over x <= 0 has no recession descent") {
  // The objective decreases toward +inf, but that leaves the feasible set;
  // within the recession cone (d <= 0) the objective only grows.
  QpProblem p;
  p.G = mat(1, 1, {0.0});
  p.c = vec({-1.0});
  p.H = mat(1, 1, {1.0});
  p.h = vec({0.0});
  p.cone = ConeSpec({ConeBlock::nonpos(1)});
  const Certificate cert = lcv::model::check_unbounded_below(p, vec({0.0}));
  CHECK(cert.kind == CertificateKind::Inconclusive);
}

TEST_CASE("unbounded-below rejects a shift that does not restore feasibility") {
  const QpProblem p = two_halfspace();
  CHECK(code_of([&] { lcv::model::check_unbounded_below(p, vec({0.0, 0.0})); }) ==
        lcv::ErrorCode::InvalidShift);
  // A wrong-sized shift is a dimension problem, not an InvalidShift.
  CHECK(code_of([&] { lcv::model::check_unbounded_below(p, vec({0.0})); }) ==
        lcv::ErrorCode::DimensionMismatch);
}

TEST_CASE("diagnostics refuse second-order blocks") {
  QpProblem p;
  p.G = mat(1, 1, {2.0});
  p.c = vec({0.0});
  p.H = mat(2, 1, {1.0, 0.0});
  p.h = vec({0.0, 0.0});
  p.cone = ConeSpec({ConeBlock::second_order(2)});
  CHECK_FALSE(lcv::model::is_polyhedral(p));
  CHECK(code_of([&] { lcv::model::check_shift_set_closed(p); }) ==
        lcv::ErrorCode::UnsupportedDiagnostic);
  CHECK(code_of([&] { lcv::model::check_level_bounded(p); }) ==
        lcv::ErrorCode::UnsupportedDiagnostic);
  CHECK(code_of([&] { lcv::model::check_unbounded_below(p, vec({0.0, 0.0})); }) ==
        lcv::ErrorCode::UnsupportedDiagnostic);
  CHECK(lcv::model::is_polyhedral(two_halfspace()));
}

TEST_CASE("recession_descent_direction powers the solver pre-flight") {
  QpProblem unbounded;
  unbounded.G = mat(1, 1, {0.0});
  unbounded.c = vec({1.0});
  unbounded.H = mat(1, 1, {1.0});
  unbounded.h = vec({0.0});
  unbounded.cone = ConeSpec({ConeBlock::nonpos(1)});
  const auto d = lcv::model::recession_descent_direction(unbounded);
  REQUIRE(d.has_value());
  check_recession_witness(unbounded, *d);
  CHECK(unbounded.c.dot(*d) < 0.0);

  CHECK_FALSE(lcv::model::recession_descent_direction(two_halfspace()).has_value());
}
