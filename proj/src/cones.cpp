#include "lcv/cones.hpp"

#include <cmath>
#include <limits>

namespace lcv::cones {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_dim(Eigen::Index dim, const char* kind) {
  if (dim < 1) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(kind) + " block requires dim >= 1, got " + std::to_string(dim));
  }
}

}  // namespace

ConeBlock ConeBlock::zero(Eigen::Index dim) {
  require_dim(dim, "Zero");
  return ConeBlock{BlockKind::Zero, dim, {}, {}};
}

ConeBlock ConeBlock::nonpos(Eigen::Index dim) {
  require_dim(dim, "NonPos");
  return ConeBlock{BlockKind::NonPos, dim, {}, {}};
}

ConeBlock ConeBlock::box(Vec lower, Vec upper) {
  require_dim(lower.size(), "Box");
  if (lower.size() != upper.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "Box block bounds disagree: lower has " + std::to_string(lower.size()) +
                    " entries, upper has " + std::to_string(upper.size()));
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower[i]) || std::isnan(upper[i]) || lower[i] > upper[i]) {
      throw Error(ErrorCode::EmptyCone, "Box block is empty at coordinate " + std::to_string(i) +
                                            ": lower > upper");
    }
    if (lower[i] == kInf || upper[i] == -kInf) {
      throw Error(ErrorCode::EmptyCone,
                  "Box block is empty at coordinate " + std::to_string(i) + ": infinite bound of the wrong sign");
    }
  }
  return ConeBlock{BlockKind::Box, lower.size(), std::move(lower), std::move(upper)};
}

ConeBlock ConeBlock::second_order(Eigen::Index dim) {
  require_dim(dim, "SecondOrder");
  return ConeBlock{BlockKind::SecondOrder, dim, {}, {}};
}

const char* ConeBlock::kind_name() const {
  switch (kind) {
    case BlockKind::Zero: return "Zero";
    case BlockKind::NonPos: return "NonPos";
    case BlockKind::Box: return "Box";
    case BlockKind::SecondOrder: return "SecondOrder";
  }
  return "Unknown";
}

ConeSpec::ConeSpec(std::vector<ConeBlock> blocks) : blocks_(std::move(blocks)) {
  offsets_.reserve(blocks_.size());
  for (const ConeBlock& block : blocks_) {
    offsets_.push_back(total_dim_);
    total_dim_ += block.dim;
  }
}

namespace {

void require_total_dim(const ConeSpec& spec, const Vec& v, const char* what) {
  if (v.size() != spec.total_dim()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has " +
                                                  std::to_string(v.size()) +
                                                  " entries but the cone has total dimension " +
                                                  std::to_string(spec.total_dim()));
  }
}

// Projection onto {(t, z) : ||z|| <= t}. The boundary tie ||z|| = -t
// projects to the origin (the apex), consistent with the ||z|| <= -t branch.
void project_soc(Eigen::Ref<Vec> block) {
  const Eigen::Index d = block.size();
  if (d == 1) {
    block[0] = std::max(block[0], 0.0);
    return;
  }
  const double t = block[0];
  const double zn = block.tail(d - 1).norm();
  if (zn <= t) return;        // inside the cone
  if (zn <= -t) {             // inside the polar: maps to the apex
    block.setZero();
    return;
  }
  const double alpha = 0.5 * (zn + t);
  block[0] = alpha;
  block.tail(d - 1) *= alpha / zn;
}

}  // namespace

Vec project(const ConeSpec& spec, const Vec& y) {
  require_total_dim(spec, y, "point");
  Vec out = y;
  const auto& blocks = spec.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto seg = out.segment(spec.offset(b), blocks[b].dim);
    switch (blocks[b].kind) {
      case BlockKind::Zero:
        seg.setZero();
        break;
      case BlockKind::NonPos:
        seg = seg.cwiseMin(0.0);
        break;
      case BlockKind::Box:
        seg = seg.cwiseMax(blocks[b].lower).cwiseMin(blocks[b].upper);
        break;
      case BlockKind::SecondOrder:
        project_soc(seg);
        break;
    }
  }
  return out;
}

double support_function(const ConeSpec& spec, const Vec& lambda) {
  require_total_dim(spec, lambda, "multiplier");
  double total = 0.0;
  const auto& blocks = spec.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto seg = lambda.segment(spec.offset(b), blocks[b].dim);
    switch (blocks[b].kind) {
      case BlockKind::Zero:
        break;  // sup over {0} is 0
      case BlockKind::NonPos:
        // sup over y <= 0 of <y, seg>: 0 when seg >= 0, else unbounded.
        if ((seg.array() < 0.0).any()) return kInf;
        break;
      case BlockKind::Box:
        for (Eigen::Index i = 0; i < seg.size(); ++i) {
          const double li = blocks[b].lower[i];
          const double ui = blocks[b].upper[i];
          if (seg[i] > 0.0) {
            if (ui == kInf) return kInf;
            total += ui * seg[i];
          } else if (seg[i] < 0.0) {
            if (li == -kInf) return kInf;
            total += li * seg[i];
          }
        }
        break;
      case BlockKind::SecondOrder: {
        // Self-dual cone: the support is 0 on the polar {-K} and +inf outside.
        if (blocks[b].dim == 1) {
          if (seg[0] > 0.0) return kInf;
          break;
        }
        const double t = seg[0];
        const double zn = seg.tail(blocks[b].dim - 1).norm();
        if (zn + t > 0.0) return kInf;
        break;
      }
    }
  }
  return total;
}

bool in_cone(const ConeSpec& spec, const Vec& y, double tol) {
  return (y - project(spec, y)).lpNorm<Eigen::Infinity>() <= tol;
}

}  // namespace lcv::cones
