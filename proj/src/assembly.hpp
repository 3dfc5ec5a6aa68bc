#pragma once

#include <functional>

#include "geometry.hpp"
#include "kernels.hpp"
#include "quadrature.hpp"

namespace ebem {

// Space-time coefficient layout: per time block, [psi_1, psi_2, u_1, u_2].
// psi scalar dofs are element-wise linear discontinuous, dof = 2*element + loc
// with loc 0 at the first endpoint.
inline int psi_index(const DofLayout& L, int comp, int scalarDof) {
  return comp * L.nPsi + scalarDof;
}
inline int u_index(const DofLayout& L, int comp, int scalarDof) {
  return 2 * L.nPsi + comp * L.nU + scalarDof;
}
inline int block_dim(const DofLayout& L) { return 2 * L.nPsi + 2 * L.nU; }

enum class OpKind { V, K, Kstar, W };
enum class Formulation { Symmetric, Nonsymmetric };

struct AssemblyOptions {
  int gaussOrder = 8;       // tensor rule on pairs away from wavefronts
  int frontGaussOrder = 8;  // per-panel rule around wavefront crossings
  double relTol = 1e-8;     // adaptive scheme for coincident / vertex pairs
  int maxDepth = 12;
};

struct BlockLowerToeplitz {
  std::vector<MatrixXd> blocks;  // S^(0) ... S^(N-1)
  int nBlocks() const { return static_cast<int>(blocks.size()); }
  int dim() const { return blocks.empty() ? 0 : static_cast<int>(blocks[0].rows()); }
  // Full N*dim space-time matrix; only for tests and small problems.
  MatrixXd dense() const;
};

struct RhsVector {
  int blockDim = 0;
  VectorXd data;
  int nBlocks() const { return blockDim > 0 ? static_cast<int>(data.size()) / blockDim : 0; }
  auto block(int l) { return data.segment(static_cast<long>(l) * blockDim, blockDim); }
  auto block(int l) const { return data.segment(static_cast<long>(l) * blockDim, blockDim); }
};

// Assembled lag blocks kept in operator form; S-blocks are materialized on
// demand so that long marches never hold N dense dim x dim matrices at once.
//   S^(0)   = [[V0, -(K0 + M/2)], [C, D]]
//   S^(l>0) = [[Vl, -Kl        ], [E, F]]
// symmetric:     C = (K0 + M/2)^T, D = -Wp0, E = Kl^T, F = -Wpl
// nonsymmetric:  C = M^T, D = E = F = 0
struct SystemBlocks {
  Formulation form = Formulation::Nonsymmetric;
  int nPsi2 = 0, nU2 = 0;
  std::vector<MatrixXd> V;   // symmetric blocks, nPsi2 square
  std::vector<MatrixXd> K;   // nPsi2 x nU2
  std::vector<MatrixXd> Wp;  // symmetric blocks, nU2 square; empty if nonsymmetric
  MatrixXd M;                // nPsi2 x nU2 mass coupling

  int dim() const { return nPsi2 + nU2; }
  int nLags() const { return static_cast<int>(V.size()); }
  MatrixXd Sblock(int lag) const;
  // acc += S^(lag) * x, column-wise.
  void applyS(int lag, const Eigen::Ref<const MatrixXd>& x, Eigen::Ref<MatrixXd> acc) const;
  BlockLowerToeplitz toToeplitz() const;
};

// One sweep over element pairs filling every requested lag at once; scalar
// antiderivative evaluations are cached per pair and shared across lags.
// nLags < 0 assembles all grid.nSteps lags.
SystemBlocks assemble_system(Formulation form, const BoundaryMesh& mesh, const DofLayout& layout,
                             const Material& mat, const TimeGrid& grid,
                             const AssemblyOptions& opts = {}, int nLags = -1);

MatrixXd assemble_mass(const BoundaryMesh& mesh, const DofLayout& layout);

// Single lag block of one operator. W follows the marching sign convention:
// lag 0 returns Wp0 and lag >= 1 returns -Wp(lag), so the symmetric S-blocks
// read [[V0, -(K0+M/2)], [(K0+M/2)^T, -W0]] and [[Vl, -Kl], [Kl^T, Wl]].
MatrixXd assemble_operator_block(OpKind kind, const BoundaryMesh& mesh, const DofLayout& layout,
                                 const Material& mat, const TimeGrid& grid, int lag,
                                 const AssemblyOptions& opts = {});

BlockLowerToeplitz assemble_S_blocks(Formulation form, const BoundaryMesh& mesh,
                                     const DofLayout& layout, const Material& mat,
                                     const TimeGrid& grid, const AssemblyOptions& opts = {});

using BoundaryDatum = std::function<Vector2d(double t, const Vector2d& x, Region reg)>;

// Energetic right-hand side: for each time block l and hat w_m on the
// non-Dirichlet part, (1/dt) * int_{t_l}^{t_{l+1}} int f_i w_m; psi slots
// stay exactly zero. timeBreaks lists kinks of t -> f (Heaviside onsets) so
// steps containing one integrate the pieces separately.
RhsVector assemble_rhs(const BoundaryMesh& mesh, const DofLayout& layout, const TimeGrid& grid,
                       const BoundaryDatum& datum, const std::vector<double>& timeBreaks = {});

}  // namespace ebem
