#include "lcv/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "detail_rng.hpp"

namespace lcv::io {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr Eigen::Index kDenseLimit = 64;

[[noreturn]] void fail(const std::string& message) {
  throw Error(ErrorCode::ParseError, message);
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1;
  int column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

double number_at(const json& node, const std::string& where) {
  if (!node.is_number()) fail(where + " must be a number");
  return node.get<double>();
}

Eigen::Index index_at(const json& node, const std::string& where) {
  if (!node.is_number_integer()) fail(where + " must be an integer");
  return node.get<Eigen::Index>();
}

Vec vector_at(const json& node, const std::string& where) {
  if (!node.is_array()) fail(where + " must be an array of numbers");
  Vec out(static_cast<Eigen::Index>(node.size()));
  Eigen::Index i = 0;
  for (const json& entry : node) {
    out[i] = number_at(entry, where + "[" + std::to_string(i) + "]");
    ++i;
  }
  return out;
}

Mat matrix_at(const json& node, Eigen::Index rows, Eigen::Index cols, const std::string& where) {
  if (node.is_array()) {
    if (std::max(rows, cols) > kDenseLimit) {
      fail(where + " exceeds the dense limit (n, m <= 64); use the COO object form");
    }
    if (static_cast<Eigen::Index>(node.size()) != rows) {
      fail(where + " must have " + std::to_string(rows) + " rows, got " +
           std::to_string(node.size()));
    }
    Mat out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const json& row = node[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
        fail(where + "[" + std::to_string(r) + "] must be an array of " + std::to_string(cols) +
             " numbers");
      }
      for (Eigen::Index c = 0; c < cols; ++c) {
        out(r, c) = number_at(row[static_cast<std::size_t>(c)],
                              where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
      }
    }
    return out;
  }
  if (node.is_object()) {
    for (const char* key : {"rows", "cols", "vals", "shape"}) {
      if (!node.contains(key)) fail(where + " COO form requires field \"" + key + "\"");
    }
    const json& shape = node["shape"];
    if (!shape.is_array() || shape.size() != 2 ||
        index_at(shape[0], where + ".shape[0]") != rows ||
        index_at(shape[1], where + ".shape[1]") != cols) {
      fail(where + ".shape must be [" + std::to_string(rows) + ", " + std::to_string(cols) + "]");
    }
    const json& rows_node = node["rows"];
    const json& cols_node = node["cols"];
    const json& vals_node = node["vals"];
    if (!rows_node.is_array() || !cols_node.is_array() || !vals_node.is_array() ||
        rows_node.size() != cols_node.size() || rows_node.size() != vals_node.size()) {
      fail(where + " COO arrays rows/cols/vals must have equal lengths");
    }
    Mat out = Mat::Zero(rows, cols);
    for (std::size_t k = 0; k < rows_node.size(); ++k) {
      const std::string entry = where + " COO entry " + std::to_string(k);
      const Eigen::Index r = index_at(rows_node[k], entry + " row");
      const Eigen::Index c = index_at(cols_node[k], entry + " col");
      if (r < 0 || r >= rows || c < 0 || c >= cols) {
        fail(entry + " index (" + std::to_string(r) + ", " + std::to_string(c) +
             ") is outside shape [" + std::to_string(rows) + ", " + std::to_string(cols) + "]");
      }
      out(r, c) += number_at(vals_node[k], entry + " value");  // duplicates accumulate
    }
    return out;
  }
  fail(where + " must be a dense array-of-rows or a COO object");
}

double bound_at(const json& node, bool is_lower, const std::string& where) {
  if (node.is_null()) return is_lower ? -kInf : kInf;
  if (node.is_string()) {
    const std::string text = node.get<std::string>();
    if (text == "inf" || text == "+inf") return kInf;
    if (text == "-inf") return -kInf;
    fail(where + " must be a number, \"inf\", \"-inf\", or null");
  }
  return number_at(node, where);
}

cones::ConeSpec cones_at(const json& node) {
  if (!node.is_array() || node.empty()) {
    fail("\"cones\" must be a nonempty array of blocks");
  }
  std::vector<cones::ConeBlock> blocks;
  Eigen::Index b = 0;
  for (const json& entry : node) {
    const std::string where = "cones[" + std::to_string(b) + "]";
    if (!entry.is_object() || entry.size() != 1) {
      fail(where + " must be an object with exactly one of \"zero\", \"nonpos\", \"box\", \"soc\"");
    }
    const auto item = entry.items().begin();
    const std::string& kind = item.key();
    if (kind == "zero") {
      blocks.push_back(cones::ConeBlock::zero(index_at(item.value(), where + ".zero")));
    } else if (kind == "nonpos") {
      blocks.push_back(cones::ConeBlock::nonpos(index_at(item.value(), where + ".nonpos")));
    } else if (kind == "soc") {
      blocks.push_back(cones::ConeBlock::second_order(index_at(item.value(), where + ".soc")));
    } else if (kind == "box") {
      const json& box = item.value();
      if (!box.is_object() || !box.contains("l") || !box.contains("u")) {
        fail(where + ".box must be an object with arrays \"l\" and \"u\"");
      }
      const json& lo = box["l"];
      const json& hi = box["u"];
      if (!lo.is_array() || !hi.is_array() || lo.size() != hi.size() || lo.empty()) {
        fail(where + ".box bounds must be nonempty arrays of equal length");
      }
      Vec lower(static_cast<Eigen::Index>(lo.size()));
      Vec upper(static_cast<Eigen::Index>(hi.size()));
      for (std::size_t i = 0; i < lo.size(); ++i) {
        lower[static_cast<Eigen::Index>(i)] =
            bound_at(lo[i], true, where + ".box.l[" + std::to_string(i) + "]");
        upper[static_cast<Eigen::Index>(i)] =
            bound_at(hi[i], false, where + ".box.u[" + std::to_string(i) + "]");
      }
      blocks.push_back(cones::ConeBlock::box(std::move(lower), std::move(upper)));
    } else {
      fail(where + " has unknown block kind \"" + kind + "\"");
    }
    ++b;
  }
  return cones::ConeSpec(std::move(blocks));
}

}  // namespace

std::string format_double(double value) {
  if (value == kInf) return "\"inf\"";
  if (value == -kInf) return "\"-inf\"";
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

model::QpProblem parse_problem_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& error) {
    const auto [line, column] = line_column(text, error.byte);
    std::ostringstream os;
    os << "invalid JSON at line " << line << ", column " << column << ": " << error.what();
    fail(os.str());
  }
  if (!j.is_object()) fail("problem file must contain a JSON object");
  for (const char* key : {"n", "G", "c", "H", "h", "cones"}) {
    if (!j.contains(key)) fail(std::string("missing required field \"") + key + "\"");
  }

  const Eigen::Index n = index_at(j["n"], "\"n\"");
  if (n < 1) fail("\"n\" must be a positive integer");
  model::QpProblem p;
  p.c = vector_at(j["c"], "\"c\"");
  if (p.c.size() != n) {
    fail("\"c\" must have n = " + std::to_string(n) + " entries, got " + std::to_string(p.c.size()));
  }
  p.h = vector_at(j["h"], "\"h\"");
  const Eigen::Index m = p.h.size();
  if (m < 1) fail("\"h\" must be nonempty");
  p.G = matrix_at(j["G"], n, n, "\"G\"");
  p.H = matrix_at(j["H"], m, n, "\"H\"");
  p.cone = cones_at(j["cones"]);
  model::validate(p);
  return p;
}

model::QpProblem parse_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open problem file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_problem_string(buffer.str());
}

namespace {

void write_vector(std::ostream& os, const Vec& v) {
  os << "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << format_double(v[i]);
  }
  os << "]";
}

void write_matrix(std::ostream& os, const Mat& m) {
  if (std::max(m.rows(), m.cols()) <= kDenseLimit) {
    os << "[";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (r) os << ",";
      os << "\n    [";
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c) os << ",";
        os << format_double(m(r, c));
      }
      os << "]";
    }
    os << "\n  ]";
    return;
  }
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;
  std::vector<double> vals;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (m(r, c) != 0.0) {
        rows.push_back(r);
        cols.push_back(c);
        vals.push_back(m(r, c));
      }
    }
  }
  os << "{\"rows\":[";
  for (std::size_t k = 0; k < rows.size(); ++k) os << (k ? "," : "") << rows[k];
  os << "],\"cols\":[";
  for (std::size_t k = 0; k < cols.size(); ++k) os << (k ? "," : "") << cols[k];
  os << "],\"vals\":[";
  for (std::size_t k = 0; k < vals.size(); ++k) os << (k ? "," : "") << format_double(vals[k]);
  os << "],\"shape\":[" << m.rows() << "," << m.cols() << "]}";
}

void write_cones(std::ostream& os, const cones::ConeSpec& spec) {
  os << "[";
  bool first = true;
  for (const auto& block : spec.blocks()) {
    if (!first) os << ",";
    first = false;
    switch (block.kind) {
      case cones::BlockKind::Zero:
        os << "{\"zero\":" << block.dim << "}";
        break;
      case cones::BlockKind::NonPos:
        os << "{\"nonpos\":" << block.dim << "}";
        break;
      case cones::BlockKind::SecondOrder:
        os << "{\"soc\":" << block.dim << "}";
        break;
      case cones::BlockKind::Box:
        os << "{\"box\":{\"l\":";
        write_vector(os, block.lower);
        os << ",\"u\":";
        write_vector(os, block.upper);
        os << "}}";
        break;
    }
  }
  os << "]";
}

}  // namespace

std::string write_problem_string(const model::QpProblem& p) {
  std::ostringstream os;
  os << "{\n  \"n\": " << p.n() << ",\n  \"G\": ";
  write_matrix(os, p.G);
  os << ",\n  \"c\": ";
  write_vector(os, p.c);
  os << ",\n  \"H\": ";
  write_matrix(os, p.H);
  os << ",\n  \"h\": ";
  write_vector(os, p.h);
  os << ",\n  \"cones\": ";
  write_cones(os, p.cone);
  os << "\n}\n";
  return os.str();
}

void write_problem(const model::QpProblem& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open output file: " + path);
  out << write_problem_string(p);
}

Vec parse_vector(const std::string& path, Eigen::Index expected_size) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open vector file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  json j;
  try {
    j = json::parse(buffer.str());
  } catch (const json::parse_error& error) {
    fail("invalid JSON in " + path + ": " + error.what());
  }
  const Vec v = vector_at(j, "vector file " + path);
  if (expected_size >= 0 && v.size() != expected_size) {
    fail("vector in " + path + " has " + std::to_string(v.size()) + " entries, expected " +
         std::to_string(expected_size));
  }
  return v;
}

std::string trace_csv_string(const std::vector<alm::TraceRecord>& trace) {
  std::ostringstream os;
  os << "k,r,shift_norm,opt_residual,proj_residual,lambda_norm,inner_iters,l_r_value\n";
  for (const auto& row : trace) {
    os << row.k << "," << format_double(row.r) << "," << format_double(row.shift_norm) << ","
       << format_double(row.opt_residual) << "," << format_double(row.proj_residual) << ","
       << format_double(row.lambda_norm) << "," << row.inner_iterations << ","
       << format_double(row.l_r_value) << "\n";
  }
  return os.str();
}

void write_trace_csv(const std::vector<alm::TraceRecord>& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open trace file: " + path);
  out << trace_csv_string(trace);
}

Family family_from_name(const std::string& name) {
  if (name == "feasible_qp") return Family::FeasibleQp;
  if (name == "infeasible_halfspaces") return Family::InfeasibleHalfspaces;
  if (name == "inconsistent_equalities") return Family::InconsistentEqualities;
  if (name == "random_infeasible") return Family::RandomInfeasible;
  throw Error(ErrorCode::InvalidArgument,
              "unknown family \"" + name +
                  "\"; expected feasible_qp, infeasible_halfspaces, "
                  "inconsistent_equalities, or random_infeasible");
}

const char* family_name(Family family) {
  switch (family) {
    case Family::FeasibleQp: return "feasible_qp";
    case Family::InfeasibleHalfspaces: return "infeasible_halfspaces";
    case Family::InconsistentEqualities: return "inconsistent_equalities";
    case Family::RandomInfeasible: return "random_infeasible";
  }
  return "unknown";
}

namespace {

Mat random_spd(Eigen::Index n, detail::SeededRng& rng) {
  Mat b(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) b(r, c) = scale * rng.normal();
  }
  const double ridge = 0.2 + 0.8 * rng.uniform();
  return b.transpose() * b + ridge * Mat::Identity(n, n);
}

Vec random_vec(Eigen::Index n, detail::SeededRng& rng) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

Vec random_unit_row(Eigen::Index n, detail::SeededRng& rng) {
  Vec row = random_vec(n, rng);
  const double norm = row.norm();
  if (norm < 1e-12) {
    row.setZero();
    row[0] = 1.0;
    return row;
  }
  return row / norm;
}

std::uint64_t family_salt(Family family) {
  switch (family) {
    case Family::FeasibleQp: return 0x66656173ULL;
    case Family::InfeasibleHalfspaces: return 0x68616c66ULL;
    case Family::InconsistentEqualities: return 0x65717560ULL;
    case Family::RandomInfeasible: return 0x72616e64ULL;
  }
  return 0;
}

model::QpProblem canonical_two_halfspace() {
  model::QpProblem p;
  p.G = Mat::Constant(1, 1, 2.0);
  p.c = Vec::Zero(1);
  p.H = Mat(2, 1);
  p.H << 1.0, -1.0;
  p.h = Vec(2);
  p.h << 0.0, -2.0;
  p.cone = cones::ConeSpec({cones::ConeBlock::nonpos(2)});
  return p;
}

model::QpProblem canonical_inconsistent_equalities() {
  model::QpProblem p;
  p.G = Mat::Constant(1, 1, 2.0);
  p.c = Vec::Constant(1, -10.0);
  p.H = Mat(2, 1);
  p.H << 1.0, 1.0;
  p.h = Vec(2);
  p.h << 0.0, 2.0;
  p.cone = cones::ConeSpec({cones::ConeBlock::zero(2)});
  return p;
}

}  // namespace

model::QpProblem generate_instance(const InstanceSeedSpec& spec) {
  const Eigen::Index n = spec.n;
  const Eigen::Index m = spec.m;
  if (n < 1 || m < 1) {
    throw Error(ErrorCode::InvalidArgument, "instance generation requires n >= 1 and m >= 1");
  }
  const bool infeasible_family = spec.family != Family::FeasibleQp;
  if (infeasible_family && m < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "infeasible families need m >= 2 to place the contradictory pair");
  }

  if (spec.family == Family::InfeasibleHalfspaces && n == 1 && m == 2) {
    return canonical_two_halfspace();
  }
  if (spec.family == Family::InconsistentEqualities && n == 1 && m == 2) {
    return canonical_inconsistent_equalities();
  }

  detail::SeededRng rng(spec.seed * 0x9E3779B97F4A7C15ULL + family_salt(spec.family));

  model::QpProblem p;
  p.G = random_spd(n, rng);
  p.c = random_vec(n, rng);
  p.H = Mat(m, n);
  p.h = Vec(m);
  const Vec x0 = random_vec(n, rng);

  // Block layout: [Zero(q)] [NonPos(pp)] [Box(bb)], q + pp + bb = m.
  Eigen::Index q = 0;
  Eigen::Index bb = 0;
  switch (spec.family) {
    case Family::FeasibleQp:
      q = m / 4;
      bb = (m - q >= 4 && rng.uniform() < 0.4) ? 2 : 0;
      break;
    case Family::RandomInfeasible:
      q = m / 5;
      if (m - q < 2) q = m - 2;
      bb = (m - q >= 4 && rng.uniform() < 0.3) ? 1 : 0;
      break;
    case Family::InfeasibleHalfspaces:
    case Family::InconsistentEqualities:
      q = spec.family == Family::InconsistentEqualities ? m : 0;
      bb = 0;
      break;
  }
  const Eigen::Index pp = m - q - bb;

  for (Eigen::Index i = 0; i < m; ++i) p.H.row(i) = random_unit_row(n, rng).transpose();
  const Vec gx0 = p.H * x0;

  // Baseline: x0 satisfies every row (equalities active, inequalities slack,
  // box rows centered).
  Vec box_lower(bb), box_upper(bb);
  for (Eigen::Index i = 0; i < q; ++i) p.h[i] = gx0[i];
  for (Eigen::Index i = q; i < q + pp; ++i) p.h[i] = gx0[i] + 0.1 + rng.uniform();
  for (Eigen::Index i = 0; i < bb; ++i) {
    p.h[q + pp + i] = gx0[q + pp + i];
    const double half_width = 0.2 + rng.uniform();
    box_lower[i] = -half_width;
    box_upper[i] = half_width;
  }

  // Infeasible families bake in a contradictory pair a'x <= t, a'x >= t + gap
  // (or the equality analogue), so no shift smaller than the gap can restore
  // feasibility.
  if (infeasible_family) {
    const double gap = 0.5 + 1.5 * rng.uniform();
    const double t = 0.5 * rng.normal();
    const Vec a = random_unit_row(n, rng);
    const bool equality_pair =
        spec.family == Family::InconsistentEqualities || (q >= 2 && rng.uniform() < 0.4);
    if (equality_pair && q >= 2) {
      p.H.row(q - 2) = a.transpose();
      p.h[q - 2] = t;
      p.H.row(q - 1) = a.transpose();
      p.h[q - 1] = t + gap;
    } else {
      p.H.row(q + pp - 2) = a.transpose();
      p.h[q + pp - 2] = t;
      p.H.row(q + pp - 1) = -a.transpose();
      p.h[q + pp - 1] = -t - gap;
    }
  }

  std::vector<cones::ConeBlock> blocks;
  if (q > 0) blocks.push_back(cones::ConeBlock::zero(q));
  if (pp > 0) blocks.push_back(cones::ConeBlock::nonpos(pp));
  if (bb > 0) blocks.push_back(cones::ConeBlock::box(box_lower, box_upper));
  p.cone = cones::ConeSpec(std::move(blocks));

  model::validate(p);
  return p;
}

}  // namespace lcv::io
