#pragma once

#include "assembly.hpp"
#include "mot.hpp"

namespace ebem {

// Signed obstacle height along the inward normal: 0 means touching, negative
// values put the obstacle away from the boundary. Contact requires the inward
// normal displacement to stay >= gap.
using GapFunction = std::function<double(const Vector2d& x, double t)>;

// Pairing between the multiplier space (piecewise constant per contact
// element, in the local normal/tangent frame, indicator functions in time)
// and the displacement trace space (hats in space, ramps in time). The time
// couplings are fixed rules, so only the spatial factor is stored; Mtilde and
// Mstar act through it.
struct CouplingMatrices {
  int nSteps = 0;
  double dt = 0.0;
  int nPsi2 = 0, nU2 = 0, nLam2 = 0;  // per-block vector sizes
  MatrixXd Mspace;  // nLam2 x nU2, rows [normal per element | tangential]
  VectorXd Gvec;    // nSteps*nU2 gap coefficients in the ramp increment basis

  int blockDim() const { return nPsi2 + nU2; }
  // Load vector F + Mstar*Lambda lives in: per time block the psi slots stay
  // zero and the trace slots receive Mspace^T * Lambda_(l).
  VectorXd applyMstar(const VectorXd& lambda) const;
  // Moments of the reconstructed trace against the multiplier basis; couples
  // earlier time blocks with full weight and the current one with half.
  VectorXd applyMtilde(const VectorXd& u) const;
  MatrixXd denseMstar() const;   // tests and small problems only
  MatrixXd denseMtilde() const;
};

CouplingMatrices assemble_coupling(const BoundaryMesh& mesh, const DofLayout& layout,
                                   const TimeGrid& grid, const GapFunction& gap);

// max(., 0) on normal multiplier slots, 0 on tangential ones.
VectorXd project_prC(const VectorXd& w, const DofLayout& layout);

struct UzawaConfig {
  double rho = 1.0;
  double eps = 1e-5;
  int maxIter = 10000;
};

struct UzawaResult {
  VectorXd X;       // full space-time solution at the final multiplier
  VectorXd Psi;     // nSteps*nPsi2 density coefficients
  VectorXd U;       // nSteps*nU2 trace coefficients
  VectorXd Lambda;  // nSteps*nLam2 multiplier coefficients
  int iterations = 0;
  std::vector<double> history;  // relative multiplier update per iteration
  double residual = 0.0;        // final |S X - F - Mstar Lambda| / |rhs|
};

// Projected fixed point iteration for the contact multiplier. Each iterate
// needs the trace response to the current multiplier; instead of marching the
// full system every time, the response to a unit multiplier impulse at time
// block zero is marched once per multiplier dof and reused for all blocks by
// time invariance. Without contact elements this reduces to a single march.
UzawaResult uzawa_solve(const SystemBlocks& system, const RhsVector& rhs,
                        const CouplingMatrices& coupling, const DofLayout& layout,
                        const UzawaConfig& cfg = {},
                        std::vector<VectorXd>* iterates = nullptr);

}  // namespace ebem
