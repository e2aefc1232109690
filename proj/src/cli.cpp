#include "lcv/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "lcv/alm.hpp"
#include "lcv/errors.hpp"
#include "lcv/io.hpp"
#include "lcv/model.hpp"
#include "lcv/oracle.hpp"

namespace lcv::cli {

namespace {

using ojson = nlohmann::ordered_json;

spdlog::logger& log() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto logger = spdlog::get("lcv");
    if (!logger) logger = spdlog::stderr_color_mt("lcv");
    const char* env = std::getenv("LCV_LOG");
    const std::string level = env ? env : "error";
    if (level == "debug") {
      logger->set_level(spdlog::level::debug);
    } else if (level == "info") {
      logger->set_level(spdlog::level::info);
    } else {
      logger->set_level(spdlog::level::err);
    }
    return logger;
  }();
  return *instance;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonConvergence:
    case ErrorCode::MaxIterExceeded:
    case ErrorCode::SingularSystem:
      return 2;
    default:
      return 3;
  }
}

ojson vec_json(const Vec& v) {
  ojson arr = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vec vec_from_json(const nlohmann::json& node, const std::string& where) {
  if (!node.is_array()) {
    throw Error(ErrorCode::ParseError, where + " must be an array of numbers");
  }
  Vec out(static_cast<Eigen::Index>(node.size()));
  Eigen::Index i = 0;
  for (const auto& entry : node) {
    if (!entry.is_number()) {
      throw Error(ErrorCode::ParseError, where + " must contain only numbers");
    }
    out[i++] = entry.get<double>();
  }
  return out;
}

ojson certificate_json(const model::Certificate& cert) {
  ojson j;
  j["kind"] = model::certificate_kind_name(cert.kind);
  if (cert.direction) j["direction"] = vec_json(*cert.direction);
  if (!cert.detail.empty()) j["detail"] = cert.detail;
  return j;
}

ojson solve_report_json(const alm::SolveReport& report, bool include_vectors) {
  long inner_total = 0;
  for (const auto& row : report.trace) inner_total += row.inner_iterations;
  ojson j;
  j["status"] = alm::solve_status_name(report.status);
  j["objective"] = report.objective;
  j["shift_norm"] = report.shift.norm;
  j["opt_residual"] = report.state.opt_residual;
  j["proj_residual"] = report.state.proj_residual;
  j["lambda_norm"] = report.state.lambda_norm;
  j["r"] = report.state.r;
  j["outer_iterations"] = report.state.k;
  j["inner_iterations"] = inner_total;
  j["regularized"] = report.state.regularized;
  if (!report.detail.empty()) j["detail"] = report.detail;
  if (include_vectors) {
    j["x"] = vec_json(report.state.x);
    j["y"] = vec_json(report.state.y);
    j["lambda"] = vec_json(report.state.lambda);
    j["shift"] = vec_json(report.shift.s);
  }
  return j;
}

int solve_exit_code(alm::SolveStatus status) {
  switch (status) {
    case alm::SolveStatus::FeasibleOptimal:
    case alm::SolveStatus::LeastViolationSolution:
      return 0;
    case alm::SolveStatus::MaxOuterExceeded:
    case alm::SolveStatus::UnboundedDetected:
      return 2;
  }
  return 2;
}

struct SolveArgs {
  std::string problem_path;
  std::string batch_dir;
  std::string trace_path;
  std::string lambda0_path;
  alm::AlmConfig config;
  double inner_tol = 0.0;
  bool inner_tol_set = false;
};

int run_solve(const SolveArgs& args, std::ostream& out) {
  alm::AlmConfig config = args.config;
  if (args.inner_tol_set) config.inner_tol = args.inner_tol;

  if (!args.batch_dir.empty()) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(args.batch_dir)) {
      throw Error(ErrorCode::InvalidArgument, "--batch expects a directory: " + args.batch_dir);
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(args.batch_dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    ojson results = ojson::array();
    int code = 0;
    for (const auto& file : files) {
      const model::QpProblem p = io::parse_problem(file.string());
      const alm::SolveReport report = alm::solve(p, config);
      log().info("{}: {} after {} outer iterations, shift norm {:.3e}", file.filename().string(),
                 alm::solve_status_name(report.status), report.state.k, report.shift.norm);
      ojson entry;
      entry["file"] = file.filename().string();
      entry["report"] = solve_report_json(report, false);
      results.push_back(std::move(entry));
      code = std::max(code, solve_exit_code(report.status));
    }
    ojson j;
    j["results"] = std::move(results);
    out << j.dump(2) << "\n";
    return code;
  }

  const model::QpProblem p = io::parse_problem(args.problem_path);
  std::optional<Vec> lambda0;
  if (!args.lambda0_path.empty()) lambda0 = io::parse_vector(args.lambda0_path, p.m());
  const alm::SolveReport report = alm::solve(p, config, lambda0 ? &*lambda0 : nullptr);
  log().info("{}: {} after {} outer iterations, shift norm {:.3e}, residuals ({:.3e}, {:.3e})",
             args.problem_path, alm::solve_status_name(report.status), report.state.k,
             report.shift.norm, report.state.opt_residual, report.state.proj_residual);
  if (!args.trace_path.empty()) io::write_trace_csv(report.trace, args.trace_path);
  out << solve_report_json(report, true).dump(2) << "\n";
  return solve_exit_code(report.status);
}

int run_shift(const std::string& path, const oracle::LeastShiftOptions& opts, std::ostream& out) {
  const model::QpProblem p = io::parse_problem(path);
  const oracle::LeastShiftResult result = oracle::least_shift(p, opts);
  log().info("{}: least shift norm {:.12e} in {} iterations", path, result.norm,
             result.iterations);
  ojson j;
  j["shift"] = vec_json(result.s);
  j["norm"] = result.norm;
  j["x"] = vec_json(result.x);
  j["y"] = vec_json(result.y);
  j["opt_residual"] = result.opt_residual;
  j["proj_residual"] = result.proj_residual;
  j["iterations"] = result.iterations;
  j["restart_spread"] = result.restart_spread;
  out << j.dump(2) << "\n";
  return 0;
}

int run_diagnose(const std::string& path, double tol, std::ostream& out) {
  const model::QpProblem p = io::parse_problem(path);
  model::DiagnosticOptions opts;
  opts.tol = tol;
  ojson j;
  int failures = 0;
  const auto record = [&](const char* key, auto&& compute) {
    try {
      j[key] = certificate_json(compute());
    } catch (const Error& error) {
      ojson detail;
      detail["error"] = ojson{{"code", error_code_name(error.code())}, {"message", error.what()}};
      j[key] = std::move(detail);
      ++failures;
    }
  };
  record("shift_set_closed", [&] { return model::check_shift_set_closed(p, opts); });
  record("level_bounded", [&] { return model::check_level_bounded(p, opts); });
  record("unbounded_below", [&] {
    const model::ShiftVector s = oracle::least_shift_vector(p);
    j["least_shift"] = vec_json(s.s);
    return model::check_unbounded_below(p, s.s, opts);
  });
  out << j.dump(2) << "\n";
  return failures == 3 ? 3 : 0;
}

int run_gen(const io::InstanceSeedSpec& spec, const std::string& output, std::ostream& out) {
  const model::QpProblem p = io::generate_instance(spec);
  const std::string text = io::write_problem_string(p);
  if (output.empty()) {
    out << text;
    return 0;
  }
  std::ofstream file(output, std::ios::binary);
  if (!file) throw Error(ErrorCode::ParseError, "cannot open output file: " + output);
  file << text;
  ojson j;
  j["path"] = output;
  j["family"] = io::family_name(spec.family);
  j["n"] = spec.n;
  j["m"] = spec.m;
  j["seed"] = spec.seed;
  out << j.dump(2) << "\n";
  return 0;
}

int run_verify(const std::string& problem_path, const std::string& report_path, double tol,
               std::ostream& out) {
  const model::QpProblem p = io::parse_problem(problem_path);

  std::ifstream in(report_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open report file: " + report_path);
  nlohmann::json report;
  try {
    report = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& error) {
    throw Error(ErrorCode::ParseError,
                "invalid JSON in " + report_path + ": " + std::string(error.what()));
  }
  for (const char* key : {"x", "y", "lambda", "r"}) {
    if (!report.contains(key)) {
      throw Error(ErrorCode::ParseError,
                  "report file is missing field \"" + std::string(key) + "\"");
    }
  }
  const Vec x = vec_from_json(report["x"], "report field \"x\"");
  const Vec y = vec_from_json(report["y"], "report field \"y\"");
  const Vec lambda = vec_from_json(report["lambda"], "report field \"lambda\"");
  if (!report["r"].is_number()) {
    throw Error(ErrorCode::ParseError, "report field \"r\" must be a number");
  }
  const double r = report["r"].get<double>();
  if (x.size() != p.n() || y.size() != p.m() || lambda.size() != p.m() || r <= 0.0) {
    throw Error(ErrorCode::ParseError, "report dimensions do not match the problem");
  }

  const bool certificate_ok = alm::check_optimality_certificate(p, x, y, lambda, r, tol);

  const Vec s = y - model::eval_constraint(p, x);
  const model::ShiftVector oracle_shift = oracle::least_shift_vector(p);
  const double shift_error = (s - oracle_shift.s).norm();
  const bool shift_ok = shift_error <= tol * (1.0 + oracle_shift.norm);

  ojson j;
  j["certificate_ok"] = certificate_ok;
  j["shift_ok"] = shift_ok;
  j["shift_error"] = shift_error;
  j["shift_norm"] = s.norm();
  j["oracle_shift_norm"] = oracle_shift.norm;
  j["pass"] = certificate_ok && shift_ok;
  out << j.dump(2) << "\n";
  return certificate_ok && shift_ok ? 0 : 2;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{
      "Augmented Lagrangian solver for convex QPs over cone constraints; on "
      "infeasible problems it converges to the least constraint violation."};
  app.name("lcv");
  app.require_subcommand(1);

  SolveArgs solve_args;
  CLI::App* solve_cmd =
      app.add_subcommand("solve", "Run the solver and print a JSON report on stdout");
  solve_cmd->add_option("problem", solve_args.problem_path, "Problem JSON file");
  solve_cmd->add_option("--batch", solve_args.batch_dir,
                        "Solve every *.json in a directory (sorted by name)");
  solve_cmd->add_option("--r0", solve_args.config.r0, "Initial penalty")->capture_default_str();
  solve_cmd->add_option("--r-growth", solve_args.config.r_growth, "Penalty growth factor (>= 1)")->capture_default_str();
  solve_cmd->add_option("--r-max", solve_args.config.r_max, "Penalty cap")->capture_default_str();
  solve_cmd->add_option("--tol", solve_args.config.tol, "Residual stopping tolerance")->capture_default_str();
  solve_cmd->add_option("--feas-tol", solve_args.config.feas_tol,
                        "Shift norm below which the problem counts as feasible")->capture_default_str();
  solve_cmd->add_option("--max-outer", solve_args.config.max_outer, "Outer iteration cap")->capture_default_str();
  solve_cmd->add_option("--inner-tol", solve_args.inner_tol,
                        "Inner fixed-point tolerance (default min(1e-8, 0.1 * tol))");
  solve_cmd->add_option("--inner-max-iter", solve_args.config.inner_max_iter,
                        "Inner iteration cap")->capture_default_str();
  solve_cmd->add_option("--trace", solve_args.trace_path, "Write per-iteration CSV trace here");
  solve_cmd->add_option("--lambda0", solve_args.lambda0_path,
                        "JSON array with the initial multiplier");

  std::string shift_path;
  oracle::LeastShiftOptions shift_opts;
  CLI::App* shift_cmd = app.add_subcommand(
      "shift", "Compute the least-norm feasible constraint shift (reference method)");
  shift_cmd->add_option("problem", shift_path, "Problem JSON file")->required();
  shift_cmd->add_option("--tol", shift_opts.tol, "Fixed-point residual target")->capture_default_str();
  shift_cmd->add_option("--max-iter", shift_opts.max_iter, "Iteration cap")->capture_default_str();
  shift_cmd->add_option("--restarts", shift_opts.restarts, "Extra random restarts")->capture_default_str();
  shift_cmd->add_option("--seed", shift_opts.seed, "Restart seed")->capture_default_str();

  std::string diagnose_path;
  double diagnose_tol = 1e-8;
  CLI::App* diagnose_cmd = app.add_subcommand(
      "diagnose", "Run the closedness / level-boundedness / unboundedness checks");
  diagnose_cmd->add_option("problem", diagnose_path, "Problem JSON file")->required();
  diagnose_cmd->add_option("--tol", diagnose_tol, "Certificate tolerance")->capture_default_str();

  io::InstanceSeedSpec gen_spec;
  std::string gen_family = "feasible_qp";
  std::string gen_output;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a deterministic test instance");
  gen_cmd->add_option("--family", gen_family,
                      "feasible_qp | infeasible_halfspaces | inconsistent_equalities | "
                      "random_infeasible")
      ->required();
  gen_cmd->add_option("--n", gen_spec.n, "Number of variables")->required();
  gen_cmd->add_option("--m", gen_spec.m, "Number of constraint rows")->required();
  gen_cmd->add_option("--seed", gen_spec.seed, "Seed (same seed, same instance)")->capture_default_str();
  gen_cmd->add_option("-o,--output", gen_output, "Write the problem here instead of stdout");

  std::string verify_problem;
  std::string verify_report;
  double verify_tol = 1e-6;
  CLI::App* verify_cmd = app.add_subcommand(
      "verify", "Re-check a solve report against the problem and the reference shift");
  verify_cmd->add_option("problem", verify_problem, "Problem JSON file")->required();
  verify_cmd->add_option("--report", verify_report, "Solve report JSON (needs x, y, lambda, r)")
      ->required();
  verify_cmd->add_option("--tol", verify_tol, "Verification tolerance")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& error) {
    if (error.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    ojson j;
    j["error"] = ojson{{"code", "InvalidArgument"}, {"message", error.what()}};
    err << j.dump(2) << "\n";
    return 3;
  }

  try {
    if (app.got_subcommand(solve_cmd)) {
      solve_args.inner_tol_set = solve_cmd->count("--inner-tol") > 0;
      if (solve_args.problem_path.empty() == solve_args.batch_dir.empty()) {
        throw Error(ErrorCode::InvalidArgument,
                    "solve needs exactly one of a problem file or --batch <dir>");
      }
      return run_solve(solve_args, out);
    }
    if (app.got_subcommand(shift_cmd)) return run_shift(shift_path, shift_opts, out);
    if (app.got_subcommand(diagnose_cmd)) return run_diagnose(diagnose_path, diagnose_tol, out);
    if (app.got_subcommand(gen_cmd)) {
      gen_spec.family = io::family_from_name(gen_family);
      return run_gen(gen_spec, gen_output, out);
    }
    if (app.got_subcommand(verify_cmd)) {
      return run_verify(verify_problem, verify_report, verify_tol, out);
    }
  } catch (const Error& error) {
    log().error("{}: {}", error_code_name(error.code()), error.what());
    ojson j;
    j["error"] = ojson{{"code", error_code_name(error.code())}, {"message", error.what()}};
    err << j.dump(2) << "\n";
    return exit_code_for(error.code());
  }
  return 3;
}

}  // namespace lcv::cli
