#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lcv/alm.hpp"
#include "lcv/cones.hpp"
#include "lcv/errors.hpp"
#include "lcv/io.hpp"
#include "lcv/model.hpp"
#include "lcv/oracle.hpp"

namespace py = pybind11;

namespace {

py::dict certificate_dict(const lcv::model::Certificate& cert) {
  py::dict d;
  d["kind"] = lcv::model::certificate_kind_name(cert.kind);
  d["direction"] = cert.direction ? py::cast(*cert.direction) : py::object(py::none());
  d["detail"] = cert.detail;
  return d;
}

py::dict trace_dict(const lcv::alm::TraceRecord& row) {
  py::dict d;
  d["k"] = row.k;
  d["r"] = row.r;
  d["shift_norm"] = row.shift_norm;
  d["opt_residual"] = row.opt_residual;
  d["proj_residual"] = row.proj_residual;
  d["lambda_norm"] = row.lambda_norm;
  d["inner_iterations"] = row.inner_iterations;
  d["l_r_value"] = row.l_r_value;
  return d;
}

py::dict report_dict(const lcv::alm::SolveReport& report) {
  long inner_total = 0;
  for (const auto& row : report.trace) inner_total += row.inner_iterations;
  py::dict d;
  d["status"] = lcv::alm::solve_status_name(report.status);
  d["x"] = report.state.x;
  d["y"] = report.state.y;
  d["lambda"] = report.state.lambda;
  d["shift"] = report.shift.s;
  d["shift_norm"] = report.shift.norm;
  d["objective"] = report.objective;
  d["opt_residual"] = report.state.opt_residual;
  d["proj_residual"] = report.state.proj_residual;
  d["lambda_norm"] = report.state.lambda_norm;
  d["r"] = report.state.r;
  d["outer_iterations"] = report.state.k;
  d["inner_iterations"] = inner_total;
  d["regularized"] = report.state.regularized;
  d["detail"] = report.detail;
  py::list trace;
  for (const auto& row : report.trace) trace.append(trace_dict(row));
  d["trace"] = std::move(trace);
  return d;
}

lcv::model::QpProblem make_problem(lcv::Mat G, lcv::Vec c, lcv::Mat H, lcv::Vec h,
                                   std::vector<lcv::cones::ConeBlock> blocks) {
  lcv::model::QpProblem p;
  p.G = std::move(G);
  p.c = std::move(c);
  p.H = std::move(H);
  p.h = std::move(h);
  p.cone = lcv::cones::ConeSpec(std::move(blocks));
  lcv::model::validate(p);
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Augmented Lagrangian solver for convex QPs over cone constraints. On "
      "infeasible problems the iterates converge to the least constraint "
      "violation; reference computations (least shift, shifted value "
      "function, dual objective) are exposed alongside the solver.";
  m.attr("__version__") = "0.1.0";

  py::register_exception_translator([](std::exception_ptr ptr) {
    try {
      if (ptr) std::rethrow_exception(ptr);
    } catch (const lcv::Error& error) {
      const std::string message =
          std::string("[") + lcv::error_code_name(error.code()) + "] " + error.what();
      switch (error.code()) {
        case lcv::ErrorCode::NonConvergence:
        case lcv::ErrorCode::MaxIterExceeded:
        case lcv::ErrorCode::SingularSystem:
          PyErr_SetString(PyExc_RuntimeError, message.c_str());
          break;
        case lcv::ErrorCode::UnsupportedDiagnostic:
          PyErr_SetString(PyExc_NotImplementedError, message.c_str());
          break;
        default:
          PyErr_SetString(PyExc_ValueError, message.c_str());
          break;
      }
    }
  });

  py::class_<lcv::cones::ConeBlock>(m, "ConeBlock",
                                    "One block of the product cone: zero(d) = {0}^d, "
                                    "nonpos(d) = {y <= 0}, box(l, u), soc(d) = {(t, z) : "
                                    "||z|| <= t}.")
      .def_static("zero", &lcv::cones::ConeBlock::zero, py::arg("dim"))
      .def_static("nonpos", &lcv::cones::ConeBlock::nonpos, py::arg("dim"))
      .def_static("box", &lcv::cones::ConeBlock::box, py::arg("lower"), py::arg("upper"))
      .def_static("soc", &lcv::cones::ConeBlock::second_order, py::arg("dim"))
      .def_property_readonly("kind",
                             [](const lcv::cones::ConeBlock& b) { return b.kind_name(); })
      .def_readonly("dim", &lcv::cones::ConeBlock::dim)
      .def_readonly("lower", &lcv::cones::ConeBlock::lower)
      .def_readonly("upper", &lcv::cones::ConeBlock::upper)
      .def("__repr__", [](const lcv::cones::ConeBlock& b) {
        return std::string("ConeBlock(") + b.kind_name() + ", dim=" + std::to_string(b.dim) + ")";
      });

  py::class_<lcv::cones::ConeSpec>(m, "Cones", "Ordered product of ConeBlock entries.")
      .def(py::init<std::vector<lcv::cones::ConeBlock>>(), py::arg("blocks"))
      .def_property_readonly("dim", &lcv::cones::ConeSpec::total_dim)
      .def_property_readonly("blocks", &lcv::cones::ConeSpec::blocks)
      .def(
          "project",
          [](const lcv::cones::ConeSpec& spec, const lcv::Vec& y) {
            return lcv::cones::project(spec, y);
          },
          py::arg("y"), "Euclidean projection onto the cone, blockwise closed form.")
      .def(
          "support",
          [](const lcv::cones::ConeSpec& spec, const lcv::Vec& lam) {
            return lcv::cones::support_function(spec, lam);
          },
          py::arg("lam"), "Support function sup{<y, lam> : y in K}; may be +inf.")
      .def(
          "contains",
          [](const lcv::cones::ConeSpec& spec, const lcv::Vec& y, double tol) {
            return lcv::cones::in_cone(spec, y, tol);
          },
          py::arg("y"), py::arg("tol") = 1e-10);

  py::class_<lcv::model::QpProblem>(
      m, "Problem",
      "min 1/2 x'Gx + c'x  subject to  Hx - h in K. Construction validates "
      "dimensions and that G is symmetric positive semidefinite.")
      .def(py::init(&make_problem), py::arg("G"), py::arg("c"), py::arg("H"), py::arg("h"),
           py::arg("cones"))
      .def_readonly("G", &lcv::model::QpProblem::G)
      .def_readonly("c", &lcv::model::QpProblem::c)
      .def_readonly("H", &lcv::model::QpProblem::H)
      .def_readonly("h", &lcv::model::QpProblem::h)
      .def_property_readonly("n", &lcv::model::QpProblem::n)
      .def_property_readonly("m", &lcv::model::QpProblem::m)
      .def_property_readonly(
          "cones", [](const lcv::model::QpProblem& p) { return p.cone.blocks(); })
      .def(
          "objective",
          [](const lcv::model::QpProblem& p, const lcv::Vec& x) {
            return lcv::model::objective_value(p, x);
          },
          py::arg("x"))
      .def(
          "constraint",
          [](const lcv::model::QpProblem& p, const lcv::Vec& x) {
            return lcv::model::eval_constraint(p, x);
          },
          py::arg("x"), "g(x) = Hx - h")
      .def("to_json",
           [](const lcv::model::QpProblem& p) { return lcv::io::write_problem_string(p); })
      .def_static(
          "from_json",
          [](const std::string& text) { return lcv::io::parse_problem_string(text); },
          py::arg("text"))
      .def("__repr__", [](const lcv::model::QpProblem& p) {
        return "Problem(n=" + std::to_string(p.n()) + ", m=" + std::to_string(p.m()) + ")";
      });

  m.def(
      "solve",
      [](const lcv::model::QpProblem& p, double r0, double r_growth, double r_max, double tol,
         double feas_tol, int max_outer, std::optional<double> inner_tol, int inner_max_iter,
         std::optional<lcv::Vec> lambda0) {
        lcv::alm::AlmConfig config;
        config.r0 = r0;
        config.r_growth = r_growth;
        config.r_max = r_max;
        config.tol = tol;
        config.feas_tol = feas_tol;
        config.max_outer = max_outer;
        config.inner_tol = inner_tol;
        config.inner_max_iter = inner_max_iter;
        const lcv::alm::SolveReport report =
            lcv::alm::solve(p, config, lambda0 ? &*lambda0 : nullptr);
        return report_dict(report);
      },
      py::arg("problem"), py::arg("r0") = 1.0, py::arg("r_growth") = 1.0, py::arg("r_max") = 1e6,
      py::arg("tol") = 1e-8, py::arg("feas_tol") = 1e-6, py::arg("max_outer") = 1000,
      py::arg("inner_tol") = py::none(),
      py::arg("inner_max_iter") = 500000, py::arg("lambda0") = py::none(),
      "Run the augmented Lagrangian outer loop; returns a dict report whose "
      "'shift' entry is the constraint violation the iterates settled on "
      "(zero vector on feasible problems).");

  m.def(
      "least_shift",
      [](const lcv::model::QpProblem& p, double tol, int max_iter, int restarts,
         std::uint64_t seed) {
        lcv::oracle::LeastShiftOptions opts;
        opts.tol = tol;
        opts.max_iter = max_iter;
        opts.restarts = restarts;
        opts.seed = seed;
        const lcv::oracle::LeastShiftResult result = lcv::oracle::least_shift(p, opts);
        py::dict d;
        d["shift"] = result.s;
        d["norm"] = result.norm;
        d["x"] = result.x;
        d["y"] = result.y;
        d["opt_residual"] = result.opt_residual;
        d["proj_residual"] = result.proj_residual;
        d["iterations"] = result.iterations;
        d["restart_spread"] = result.restart_spread;
        return d;
      },
      py::arg("problem"), py::arg("tol") = 1e-10, py::arg("max_iter") = 2000000,
      py::arg("restarts") = 2, py::arg("seed") = 20240001ULL,
      "Least-norm feasible constraint shift, computed by an accelerated "
      "projected alternation independent of the solver loop.");

  m.def(
      "eval_nu",
      [](const lcv::model::QpProblem& p, const lcv::Vec& s, double tol, int max_iter) {
        lcv::oracle::NuOptions opts;
        opts.tol = tol;
        opts.max_iter = max_iter;
        const lcv::oracle::NuValue value = lcv::oracle::eval_nu(p, s, opts);
        py::dict d;
        d["s"] = value.s;
        d["nu"] = value.nu;
        d["argmin"] = value.argmin ? py::cast(*value.argmin) : py::object(py::none());
        d["infeasibility_certificate"] = value.infeasibility_certificate
                                             ? py::cast(*value.infeasibility_certificate)
                                             : py::object(py::none());
        d["iterations"] = value.iterations;
        return d;
      },
      py::arg("problem"), py::arg("s"), py::arg("tol") = 1e-9, py::arg("max_iter") = 2000000,
      "Optimal value of the shifted problem min f(x) s.t. g(x) + s in K "
      "(+inf when infeasible, -inf when unbounded below).");

  m.def(
      "eval_theta",
      [](const lcv::model::QpProblem& p, const lcv::Vec& lam) {
        const lcv::oracle::DualValue value = lcv::oracle::eval_theta(p, lam);
        py::dict d;
        d["lambda"] = value.lambda;
        d["theta"] = value.theta;
        d["minimizer_x"] =
            value.minimizer_x ? py::cast(*value.minimizer_x) : py::object(py::none());
        return d;
      },
      py::arg("problem"), py::arg("lam"),
      "Dual objective theta(lambda) in closed form; +inf outside the domain.");

  m.def(
      "verify_conjugacy",
      [](const lcv::model::QpProblem& p, const std::vector<lcv::Vec>& lambda_grid,
         const std::vector<lcv::Vec>& s_grid, double tol, double nu_tol, int nu_max_iter) {
        lcv::oracle::NuOptions opts;
        opts.tol = nu_tol;
        opts.max_iter = nu_max_iter;
        const lcv::oracle::ConjugacyReport report =
            lcv::oracle::verify_conjugacy(p, lambda_grid, s_grid, tol, opts);
        py::dict d;
        d["max_violation_theta"] = report.max_violation_theta;
        d["max_violation_nu"] = report.max_violation_nu;
        d["weak_duality_violation"] = report.weak_duality_violation;
        d["grid_gap"] = report.grid_gap;
        d["grid_too_coarse"] = report.grid_too_coarse;
        return d;
      },
      py::arg("problem"), py::arg("lambda_grid"), py::arg("s_grid"), py::arg("tol") = 1e-6,
      py::arg("nu_tol") = 1e-9, py::arg("nu_max_iter") = 2000000,
      "Grid check that theta and the shifted value function are conjugates.");

  m.def(
      "dual_recession_check",
      [](const lcv::model::QpProblem& p, const lcv::Vec& lambda_bar, const lcv::Vec& s_bar,
         const std::vector<double>& t_grid, double tol) {
        return lcv::oracle::dual_recession_check(p, lambda_bar, s_bar, t_grid, tol);
      },
      py::arg("problem"), py::arg("lambda_bar"), py::arg("s_bar"), py::arg("t_grid"),
      py::arg("tol") = 1e-6,
      "True when the shifted dual objective is constant along lambda_bar - t * s_bar.");

  m.def(
      "check_shift_set_closed",
      [](const lcv::model::QpProblem& p, double tol) {
        lcv::model::DiagnosticOptions opts;
        opts.tol = tol;
        return certificate_dict(lcv::model::check_shift_set_closed(p, opts));
      },
      py::arg("problem"), py::arg("tol") = 1e-8);

  m.def(
      "check_level_bounded",
      [](const lcv::model::QpProblem& p, double tol) {
        lcv::model::DiagnosticOptions opts;
        opts.tol = tol;
        return certificate_dict(lcv::model::check_level_bounded(p, opts));
      },
      py::arg("problem"), py::arg("tol") = 1e-8);

  m.def(
      "check_unbounded_below",
      [](const lcv::model::QpProblem& p, const lcv::Vec& s, double tol) {
        lcv::model::DiagnosticOptions opts;
        opts.tol = tol;
        return certificate_dict(lcv::model::check_unbounded_below(p, s, opts));
      },
      py::arg("problem"), py::arg("s"), py::arg("tol") = 1e-8);

  m.def(
      "check_optimality_certificate",
      [](const lcv::model::QpProblem& p, const lcv::Vec& x, const lcv::Vec& y,
         const lcv::Vec& lam, double r, double tol) {
        return lcv::alm::check_optimality_certificate(p, x, y, lam, r, tol);
      },
      py::arg("problem"), py::arg("x"), py::arg("y"), py::arg("lam"), py::arg("r"),
      py::arg("tol") = 1e-6);

  m.def(
      "generate",
      [](const std::string& family, Eigen::Index n, Eigen::Index m_rows, std::uint64_t seed) {
        lcv::io::InstanceSeedSpec spec;
        spec.family = lcv::io::family_from_name(family);
        spec.n = n;
        spec.m = m_rows;
        spec.seed = seed;
        return lcv::io::generate_instance(spec);
      },
      py::arg("family"), py::arg("n"), py::arg("m"), py::arg("seed") = 0,
      "Deterministic instance generator; families: feasible_qp, "
      "infeasible_halfspaces, inconsistent_equalities, random_infeasible.");
}
