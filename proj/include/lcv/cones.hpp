#pragma once

#include <Eigen/Core>
#include <vector>

#include "lcv/errors.hpp"

namespace lcv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace cones {

enum class BlockKind { Zero, NonPos, Box, SecondOrder };

// One block of a product cone K = K_1 x ... x K_B. Each block denotes a
// nonempty closed convex set:
//   Zero         {0}^dim
//   NonPos       {y : y <= 0}
//   Box          {y : lower <= y <= upper}, bounds may be +-infinity
//   SecondOrder  {(t, z) : ||z||_2 <= t}, dim >= 1 (dim == 1 degenerates
//                to the nonnegative ray)
struct ConeBlock {
  BlockKind kind = BlockKind::Zero;
  Eigen::Index dim = 0;
  Vec lower;  // Box only
  Vec upper;  // Box only

  static ConeBlock zero(Eigen::Index dim);
  static ConeBlock nonpos(Eigen::Index dim);
  static ConeBlock box(Vec lower, Vec upper);
  static ConeBlock second_order(Eigen::Index dim);

  const char* kind_name() const;
};

// Ordered product of blocks; total_dim() equals the row dimension of the
// constraint map it is paired with.
class ConeSpec {
 public:
  ConeSpec() = default;
  explicit ConeSpec(std::vector<ConeBlock> blocks);

  const std::vector<ConeBlock>& blocks() const { return blocks_; }
  Eigen::Index total_dim() const { return total_dim_; }
  // Offset of block b inside a stacked vector of size total_dim().
  Eigen::Index offset(std::size_t b) const { return offsets_[b]; }

 private:
  std::vector<ConeBlock> blocks_;
  std::vector<Eigen::Index> offsets_;
  Eigen::Index total_dim_ = 0;
};

// Euclidean projection onto K, computed blockwise in closed form.
Vec project(const ConeSpec& spec, const Vec& y);

// Support function sup{ <y, lambda> : y in K }. Returns +infinity when the
// supremum is unbounded (e.g. a negative multiplier on a NonPos block).
double support_function(const ConeSpec& spec, const Vec& lambda);

// Membership test: ||y - project(y)||_inf <= tol.
bool in_cone(const ConeSpec& spec, const Vec& y, double tol = 1e-10);

}  // namespace cones
}  // namespace lcv
