#pragma once

#include <functional>

#include "assembly.hpp"

namespace ebem {

// Reusable pivoted factorization of the lag-0 block; one per (mesh,
// formulation), shared by every time step and every contact iteration.
struct DiagonalFactorization {
  Eigen::PartialPivLU<MatrixXd> lu;
  int n = 0;

  MatrixXd solve(const Eigen::Ref<const MatrixXd>& b) const { return lu.solve(b); }
};

DiagonalFactorization factorize(const MatrixXd& S0);

// acc += S^(lag) * x for one history block.
using BlockApply =
    std::function<void(int lag, const Eigen::Ref<const MatrixXd>& x, Eigen::Ref<MatrixXd> acc)>;

// Back-substitution through the block lower-triangular Toeplitz system:
//   X_(l) = S0^{-1} (F_(l) - sum_{j=1..l} S^(j) X_(l-j)),
// history summed oldest-first (j = l down to 1) in a fixed order so reruns
// reproduce bitwise. rhs may carry several columns; each solves independently.
MatrixXd march_blocks(const DiagonalFactorization& fac, int nBlocks, int blockDim,
                      const BlockApply& apply, const Eigen::Ref<const MatrixXd>& rhs);

MatrixXd march(const BlockLowerToeplitz& system, const DiagonalFactorization& fac,
               const Eigen::Ref<const MatrixXd>& rhs);
MatrixXd march(const BlockLowerToeplitz& system, const Eigen::Ref<const MatrixXd>& rhs);

// Operator-form variants; blocks are applied without materializing S^(l).
MatrixXd march(const SystemBlocks& system, const DiagonalFactorization& fac,
               const Eigen::Ref<const MatrixXd>& rhs);
MatrixXd march(const SystemBlocks& system, const Eigen::Ref<const MatrixXd>& rhs);

}  // namespace ebem
