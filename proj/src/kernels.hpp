#pragma once

#include <vector>

#include "common.hpp"

namespace ebem {

// Time antiderivative family of the 2D scalar wave kernel for one speed c,
// evaluated at distance r > 0 and elapsed time s. e[k] is the k-th primitive
// in s of e[0] = 1/(2*pi*sqrt(c^2 s^2 - r^2)) * c, em1/em2 sit below level 0.
// Everything carries the Heaviside cutoff H[c s - r] with H[0] = 0.
// Radial derivatives are filled as far as the traction kernels need them:
// er/err for all levels, errr for levels 2..5, errrr for levels 2..5.
struct WaveScalars {
  double em2 = 0.0, em1 = 0.0;
  double e[6] = {};
  double er[6] = {};
  double err[6] = {};
  double errr[6] = {};
  double errrr[6] = {};
  bool inside = false;
};
WaveScalars wave_scalars(double c, double r, double s);

// P/S-paired scalars entering the Galerkin integrands of the energetic forms.
// The Hessian data of the differences j1 = e3P - e3S, j2 = e4P - e4S and
// j3 = e5P - e5S is evaluated through cancellation-free combinations, so the
// coincident quadrature can push r many orders of magnitude below h without
// losing digits. jNr_r means (d/dr jN)/r.
struct GalerkinScalars {
  double e1P = 0.0, e1S = 0.0, e2S = 0.0, e3S = 0.0;
  double e2rP = 0.0, e2rS = 0.0, e3rP = 0.0, e3rS = 0.0;
  double j1r_r = 0.0, j1rr = 0.0;
  double j2r_r = 0.0, j2rr = 0.0;
  double j3r_r = 0.0, j3rr = 0.0;
};
GalerkinScalars galerkin_scalars(const Material& m, double r, double s);

// Second difference in the lag index with the marching weights already
// applied per operator family: the level-1 fields (V) keep weight 1, the
// level-2 fields (K) carry 1/dt, the level-3 fields (W) carry 1/dt^2.
GalerkinScalars convolved_galerkin(const Material& m, double r, int lag,
                                   double dt);

// Same combination from precomputed per-time scalars (gNext at (lag+1)dt,
// gMid at lag*dt, gPrev at (lag-1)dt); null stands for times <= 0.
GalerkinScalars combine_galerkin_stencil(const GalerkinScalars* gNext,
                                         const GalerkinScalars* gMid,
                                         const GalerkinScalars* gPrev,
                                         double dt);

// Integrand matrices of the energetic bilinear forms, built from (possibly
// lag-convolved) GalerkinScalars. dhat = (x - y)/r; tangents are rot90 of
// the normals. matV: psi(x)^T A psi(y). matK: psi(x)^T (val u + der du/ds).
// matW: rho-weighted blocks pairing (v, dv/ds) x (u, du/ds).
Matrix2d matV_galerkin(const GalerkinScalars& g, const Material& m,
                       const Vector2d& dhat);
struct KGalerkinMats {
  Matrix2d val, der;
};
KGalerkinMats matK_galerkin(const GalerkinScalars& g, const Material& m,
                            const Vector2d& dhat, const Vector2d& ny);
struct WGalerkinMats {
  Matrix2d vv, vd, dv, dd;
};
WGalerkinMats matW_galerkin(const GalerkinScalars& g, const Material& m,
                            const Vector2d& dhat, const Vector2d& nx,
                            const Vector2d& ny);

// Pointwise space-time kernels at antiderivative level k (k = 0 gives the
// distributions themselves). d = x - y, s = elapsed time.
//   kernelV_level: fundamental solution family G^(k)
//   kernelK_level: traction of G columns at y (double layer)
//   kernelKstar_level: traction at x of the transposed kernel
//   kernelW_level: traction at x of the double layer columns (hypersingular)
// kernelV/K/Kstar accept k = 0..3, kernelW k in {0, 2, 3}.
Matrix2d kernelV_level(const Material& m, const Vector2d& d, double s, int k);
Matrix2d kernelK_level(const Material& m, const Vector2d& d,
                       const Vector2d& ny, double s, int k);
Matrix2d kernelKstar_level(const Material& m, const Vector2d& d,
                           const Vector2d& nx, double s, int k);
Matrix2d kernelW_level(const Material& m, const Vector2d& d,
                       const Vector2d& nx, const Vector2d& ny, double s,
                       int k);

struct KernelBlock {
  Matrix2d block = Matrix2d::Zero();
  bool wavefront = false;
};

// Fundamental solution G(d, delta). If delta lands within `guard` of one of
// the wavefront radii c*delta the entries are not representable (the kernel
// blows up like an inverse square root there); the block is then filled with
// NaN and the flag is set.
KernelBlock eval_G(const Material& m, const Vector2d& d, double delta,
                   double guard = 0.0);

struct TractionKernels {
  Matrix2d K = Matrix2d::Zero();
  Matrix2d Kstar = Matrix2d::Zero();
  Matrix2d W = Matrix2d::Zero();
  bool wavefront = false;
  bool strongNear = false;  // W only: r so small that the r^-2 tail dominates
};
TractionKernels eval_traction_kernels(const Material& m, const Vector2d& d,
                                      double delta, const Vector2d& ny,
                                      const Vector2d& nx, double guard = 0.0);

enum class ConvKind { V, K, Kstar, W };

// Lag kernel of the marching scheme: second difference over the time grid of
// the operator's energetic antiderivative level (1 for V, 2 for K/K*, 3 for
// W) with the matching 1/dt powers. Depends on the lag only, vanishes for
// |d| >= cP * t_{lag+2}, and is continuous across the wavefront radii.
Matrix2d time_convolved_kernel(ConvKind kind, const Material& m,
                               const Vector2d& d, int lag,
                               const TimeGrid& grid,
                               const Vector2d& nx = Vector2d::Zero(),
                               const Vector2d& ny = Vector2d::Zero());

// Radii where the kernels switch regime at elapsed time delta: {cS*delta,
// cP*delta}, ascending. Empty for delta <= 0.
std::vector<double> critical_radii(const Material& m, double delta);

// Union of the critical radii over the three stencil times of a lag block,
// ascending. These are the splitting radii the pair quadrature needs.
std::vector<double> wavefront_radii(const Material& m, const TimeGrid& grid,
                                    int lag);

}  // namespace ebem
