#include "mot.hpp"

#include <cmath>
#include <string>

namespace ebem {

DiagonalFactorization factorize(const MatrixXd& S0) {
  if (S0.rows() != S0.cols()) throw EbemError(errc::factorization, "factorize: block not square");
  DiagonalFactorization fac;
  fac.n = static_cast<int>(S0.rows());
  fac.lu.compute(S0);
  const VectorXd d = fac.lu.matrixLU().diagonal().cwiseAbs();
  const double pmax = d.size() ? d.maxCoeff() : 0.0;
  const double pmin = d.size() ? d.minCoeff() : 0.0;
  if (pmax == 0.0 || pmin <= 1e-13 * pmax)
    throw EbemError(errc::factorization,
                    "factorize: lag-0 block numerically singular, pivot magnitude " +
                        std::to_string(pmin));
  return fac;
}

MatrixXd march_blocks(const DiagonalFactorization& fac, int nBlocks, int blockDim,
                      const BlockApply& apply, const Eigen::Ref<const MatrixXd>& rhs) {
  if (rhs.rows() != static_cast<long>(nBlocks) * blockDim)
    throw EbemError(errc::internal, "march: rhs rows do not match the block layout");
  if (fac.n != blockDim)
    throw EbemError(errc::internal, "march: factorization dimension mismatch");
  MatrixXd X(rhs.rows(), rhs.cols());
  MatrixXd acc(blockDim, rhs.cols());
  for (int l = 0; l < nBlocks; ++l) {
    acc.setZero();
    for (int j = l; j >= 1; --j) apply(j, X.middleRows((l - j) * blockDim, blockDim), acc);
    X.middleRows(l * blockDim, blockDim) = fac.solve(rhs.middleRows(l * blockDim, blockDim) - acc);
  }
  return X;
}

MatrixXd march(const BlockLowerToeplitz& system, const DiagonalFactorization& fac,
               const Eigen::Ref<const MatrixXd>& rhs) {
  return march_blocks(
      fac, system.nBlocks(), system.dim(),
      [&](int lag, const Eigen::Ref<const MatrixXd>& x, Eigen::Ref<MatrixXd> acc) {
        acc.noalias() += system.blocks[lag] * x;
      },
      rhs);
}

MatrixXd march(const BlockLowerToeplitz& system, const Eigen::Ref<const MatrixXd>& rhs) {
  return march(system, factorize(system.blocks.at(0)), rhs);
}

MatrixXd march(const SystemBlocks& system, const DiagonalFactorization& fac,
               const Eigen::Ref<const MatrixXd>& rhs) {
  return march_blocks(
      fac, system.nLags(), system.dim(),
      [&](int lag, const Eigen::Ref<const MatrixXd>& x, Eigen::Ref<MatrixXd> acc) {
        system.applyS(lag, x, acc);
      },
      rhs);
}

MatrixXd march(const SystemBlocks& system, const Eigen::Ref<const MatrixXd>& rhs) {
  return march(system, factorize(system.Sblock(0)), rhs);
}

}  // namespace ebem
