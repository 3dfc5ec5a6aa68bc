#include "kernels.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace ebem {

namespace {

constexpr double kKappa = 1.0 / (2.0 * PI);

Matrix2d radial_hess(double fr, double frr, double r, const Vector2d& dhat) {
  const Matrix2d dd = dhat * dhat.transpose();
  return (fr / r) * (Matrix2d::Identity() - dd) + frr * dd;
}

// Third derivative tensor of a radial function, contracted with v.
Matrix2d t3_contract(double fr, double frr, double frrr, double r,
                     const Vector2d& dhat, const Vector2d& v) {
  const double b3 = (frr - fr / r) / r;
  const double a3 = frrr - 3.0 * b3;
  const double vd = v.dot(dhat);
  return (a3 * vd) * (dhat * dhat.transpose()) +
         b3 * (v * dhat.transpose() + dhat * v.transpose() +
               vd * Matrix2d::Identity());
}

// Fourth derivative tensor of a radial function, contracted with (u, v).
Matrix2d t4_contract(double fr, double frr, double frrr, double frrrr,
                     double r, const Vector2d& dhat, const Vector2d& u,
                     const Vector2d& v) {
  const double b3 = (frr - fr / r) / r;
  const double a3 = frrr - 3.0 * b3;
  const double a4 = frrrr - (6.0 * a3 + 3.0 * b3) / r;
  const double ud = u.dot(dhat), vd = v.dot(dhat), uv = u.dot(v);
  const Matrix2d dd = dhat * dhat.transpose();
  Matrix2d out = (a4 * ud * vd) * dd;
  out += (a3 / r) *
         (uv * dd + vd * (u * dhat.transpose() + dhat * u.transpose()) +
          ud * (v * dhat.transpose() + dhat * v.transpose()) +
          (ud * vd) * Matrix2d::Identity());
  out += (b3 / r) * (uv * Matrix2d::Identity() + u * v.transpose() +
                     v * u.transpose());
  return out;
}

Matrix2d rot_matrix() {
  Matrix2d r;
  r << 0.0, -1.0, 1.0, 0.0;
  return r;
}

Matrix2d nan_block() {
  return Matrix2d::Constant(std::numeric_limits<double>::quiet_NaN());
}

bool near_front(const Material& m, double r, double delta, double guard) {
  if (guard <= 0.0 || delta <= 0.0) return false;
  return std::abs(m.cP * delta - r) < guard ||
         std::abs(m.cS * delta - r) < guard;
}

}  // namespace

WaveScalars wave_scalars(double c, double r, double s) {
  assert(c > 0.0 && r > 0.0);
  WaveScalars w;
  const double cs = c * s;
  if (!(s > 0.0) || !(cs > r)) return w;
  w.inside = true;

  const double q = std::sqrt((cs - r) * (cs + r));
  const double L = std::acosh(cs / r);
  const double p = q / c;
  const double c2 = c * c;
  const double r2 = r * r;
  const double s2 = s * s;
  const double q3 = q * q * q;
  const double q5 = q3 * q * q;

  w.em2 = kKappa * c * c2 * (2.0 * cs * cs + r2) / q5;
  w.em1 = -kKappa * c * c2 * s / q3;
  w.e[0] = kKappa * c / q;
  w.e[1] = kKappa * L;
  w.e[2] = kKappa * (s * L - p);
  w.e[3] = kKappa * ((0.5 * s2 + 0.25 * r2 / c2) * L - 0.75 * s * p);
  w.e[4] = kKappa * ((s2 * s / 6.0 + 0.25 * r2 * s / c2) * L -
                     (11.0 / 36.0) * p * p * p - (5.0 / 12.0) * (r2 / c2) * p);
  w.e[5] =
      kKappa *
      ((s2 * s2 / 24.0 + 0.125 * r2 * s2 / c2 + r2 * r2 / (64.0 * c2 * c2)) *
           L -
       (5.0 / 576.0) * s * p * (10.0 * s2 + 11.0 * r2 / c2));

  w.er[0] = kKappa * c * r / q3;
  w.er[1] = -kKappa * cs / (r * q);
  w.er[2] = -kKappa * p / r;
  w.er[3] = 0.5 * kKappa * (r * L / c2 - s * p / r);
  w.er[4] = kKappa * (0.5 * r * s * L / c2 - p * s2 / (6.0 * r) -
                      p * r / (3.0 * c2));
  w.er[5] = kKappa * ((0.25 * r * s2 / c2 + r2 * r / (16.0 * c2 * c2)) * L -
                      p * s2 * s / (24.0 * r) -
                      13.0 * s * p * r / (48.0 * c2));

  w.err[0] = kKappa * c * (q * q + 3.0 * r2) / q5;
  w.err[1] = kKappa * cs * (cs * cs - 2.0 * r2) / (r2 * q3);
  for (int k = 2; k <= 5; ++k) w.err[k] = w.e[k - 2] / c2 - w.er[k] / r;
  for (int k = 2; k <= 5; ++k)
    w.errr[k] = w.er[k - 2] / c2 - w.err[k] / r + w.er[k] / r2;
  for (int k = 2; k <= 5; ++k)
    w.errrr[k] = w.err[k - 2] / c2 - w.errr[k] / r + 2.0 * w.err[k] / r2 -
                 2.0 * w.er[k] / (r2 * r);
  return w;
}

GalerkinScalars galerkin_scalars(const Material& m, double r, double s) {
  assert(r > 0.0);
  GalerkinScalars g;
  const double cP = m.cP, cS = m.cS;
  if (!(s > 0.0) || !(cP * s > r)) return g;

  const double r2 = r * r;
  const double s2 = s * s;
  const double cP2 = cP * cP, cS2 = cS * cS;
  const double qP = std::sqrt((cP * s - r) * (cP * s + r));
  const double LP = std::acosh(cP * s / r);
  const double pP = qP / cP;

  g.e1P = kKappa * LP;
  g.e2rP = -kKappa * pP / r;
  g.e3rP = 0.5 * kKappa * (r * LP / cP2 - s * pP / r);

  // Lcomb = LP/cP^2 - LS/cS^2 and friends, organised so the P-S cancellation
  // as r -> 0 never happens in floating point.
  double Lcomb, L4comb, Pcomb, Dpr2;
  if (cS * s > r) {
    const double qS = std::sqrt((cS * s - r) * (cS * s + r));
    const double LS = std::acosh(cS * s / r);
    const double pS = qS / cS;
    g.e1S = kKappa * LS;
    g.e2S = kKappa * (s * LS - pS);
    g.e3S = kKappa * ((0.5 * s2 + 0.25 * r2 / cS2) * LS - 0.75 * s * pS);
    g.e2rS = -kKappa * pS / r;
    g.e3rS = 0.5 * kKappa * (r * LS / cS2 - s * pS / r);

    const double k2 = 1.0 / cS2 - 1.0 / cP2;
    const double k4 = 1.0 / (cS2 * cS2) - 1.0 / (cP2 * cP2);
    const double DL = std::log((cP * s + qP) / (cS * s + qS));
    Dpr2 = k2 / (pP + pS);  // (pP - pS)/r^2
    Lcomb = -k2 * LP + DL / cS2;
    L4comb = -k4 * LP + DL / (cS2 * cS2);
    Pcomb = -k2 * pP + r2 * Dpr2 / cS2;
  } else {
    Dpr2 = pP / r2;
    Lcomb = LP / cP2;
    L4comb = LP / (cP2 * cP2);
    Pcomb = pP / cP2;
  }

  g.j1r_r = 0.5 * kKappa * (Lcomb - s * Dpr2);
  g.j1rr = kKappa * Lcomb - g.j1r_r;
  g.j2r_r = kKappa * (0.5 * s * Lcomb - s2 * Dpr2 / 6.0 - Pcomb / 3.0);
  g.j2rr = kKappa * (s * Lcomb - Pcomb) - g.j2r_r;
  g.j3r_r = kKappa * (0.25 * s2 * Lcomb + r2 * L4comb / 16.0 -
                      s2 * s * Dpr2 / 24.0 - 13.0 * s * Pcomb / 48.0);
  g.j3rr =
      kKappa * (0.5 * s2 * Lcomb + 0.25 * r2 * L4comb - 0.75 * s * Pcomb) -
      g.j3r_r;
  return g;
}

namespace {

void add_weighted(GalerkinScalars& out, const GalerkinScalars& g, double w, double dt) {
  const double wV = w, wK = w / dt, wW = w / (dt * dt);
  out.e1P += wV * g.e1P;
  out.e1S += wV * g.e1S;
  out.j1r_r += wV * g.j1r_r;
  out.j1rr += wV * g.j1rr;
  out.e2S += wK * g.e2S;
  out.e2rP += wK * g.e2rP;
  out.e2rS += wK * g.e2rS;
  out.j2r_r += wK * g.j2r_r;
  out.j2rr += wK * g.j2rr;
  out.e3S += wW * g.e3S;
  out.e3rP += wW * g.e3rP;
  out.e3rS += wW * g.e3rS;
  out.j3r_r += wW * g.j3r_r;
  out.j3rr += wW * g.j3rr;
}

}  // namespace

GalerkinScalars combine_galerkin_stencil(const GalerkinScalars* gNext,
                                         const GalerkinScalars* gMid,
                                         const GalerkinScalars* gPrev, double dt) {
  GalerkinScalars out;
  if (gNext) add_weighted(out, *gNext, 1.0, dt);
  if (gMid) add_weighted(out, *gMid, -2.0, dt);
  if (gPrev) add_weighted(out, *gPrev, 1.0, dt);
  return out;
}

GalerkinScalars convolved_galerkin(const Material& m, double r, int lag,
                                   double dt) {
  GalerkinScalars buf[3];
  const GalerkinScalars* at[3] = {nullptr, nullptr, nullptr};
  for (int j = 0; j < 3; ++j) {
    const double s = (lag + 1 - j) * dt;
    if (s <= 0.0) continue;
    buf[j] = galerkin_scalars(m, r, s);
    at[j] = &buf[j];
  }
  return combine_galerkin_stencil(at[0], at[1], at[2], dt);
}

Matrix2d matV_galerkin(const GalerkinScalars& g, const Material& m,
                       const Vector2d& dhat) {
  const Matrix2d dd = dhat * dhat.transpose();
  Matrix2d out = g.j1r_r * (Matrix2d::Identity() - dd) + g.j1rr * dd;
  out += (g.e1S / (m.cS * m.cS)) * Matrix2d::Identity();
  return out / m.rho;
}

KGalerkinMats matK_galerkin(const GalerkinScalars& g, const Material& m,
                            const Vector2d& dhat, const Vector2d& ny) {
  const double cS2 = m.cS * m.cS;
  const Vector2d ty = rot90(ny);
  const Vector2d rd = rot90(dhat);
  KGalerkinMats k;
  k.val = -g.e2rP * (dhat * ny.transpose()) - g.e2rS * (rd * ty.transpose());
  const Matrix2d hessJ2 =
      g.j2r_r * (Matrix2d::Identity() - dhat * dhat.transpose()) +
      g.j2rr * (dhat * dhat.transpose());
  k.der = (2.0 * g.e2S * Matrix2d::Identity() + 2.0 * cS2 * hessJ2) *
          rot_matrix();
  return k;
}

WGalerkinMats matW_galerkin(const GalerkinScalars& g, const Material& m,
                            const Vector2d& dhat, const Vector2d& nx,
                            const Vector2d& ny) {
  const double cS2 = m.cS * m.cS;
  const Vector2d tx = rot90(nx), ty = rot90(ny);
  const Vector2d rd = rot90(dhat);
  const Matrix2d R = rot_matrix();
  WGalerkinMats w;
  w.vv = m.rho * (-g.e1P * (nx * ny.transpose()) -
                  g.e1S * (tx * ty.transpose()));
  w.vd = m.rho * 2.0 * cS2 *
         (-g.e3rP * (nx * rd.transpose()) + g.e3rS * (tx * dhat.transpose()));
  w.dv = m.rho * 2.0 * cS2 *
         (g.e3rP * (rd * ny.transpose()) - g.e3rS * (dhat * ty.transpose()));
  const Matrix2d hessJ3 =
      g.j3r_r * (Matrix2d::Identity() - dhat * dhat.transpose()) +
      g.j3rr * (dhat * dhat.transpose());
  w.dd = m.rho * (4.0 * cS2 * g.e3S * Matrix2d::Identity() -
                  4.0 * cS2 * cS2 * R * hessJ3 * R);
  return w;
}

Matrix2d kernelV_level(const Material& m, const Vector2d& d, double s,
                       int k) {
  assert(k >= 0 && k <= 3);
  const double r = d.norm();
  const WaveScalars P = wave_scalars(m.cP, r, s);
  if (!P.inside) return Matrix2d::Zero();
  const WaveScalars S = wave_scalars(m.cS, r, s);
  const Vector2d dhat = d / r;
  Matrix2d out = radial_hess(P.er[k + 2] - S.er[k + 2],
                             P.err[k + 2] - S.err[k + 2], r, dhat);
  out += (S.e[k] / (m.cS * m.cS)) * Matrix2d::Identity();
  return out / m.rho;
}

Matrix2d kernelK_level(const Material& m, const Vector2d& d,
                       const Vector2d& ny, double s, int k) {
  assert(k >= 0 && k <= 3);
  const double r = d.norm();
  const WaveScalars P = wave_scalars(m.cP, r, s);
  if (!P.inside) return Matrix2d::Zero();
  const WaveScalars S = wave_scalars(m.cS, r, s);
  const Vector2d dhat = d / r;
  const double cS2 = m.cS * m.cS;
  const double a = 1.0 - 2.0 * cS2 / (m.cP * m.cP);
  const Matrix2d t3 =
      t3_contract(P.er[k + 2] - S.er[k + 2], P.err[k + 2] - S.err[k + 2],
                  P.errr[k + 2] - S.errr[k + 2], r, dhat, ny);
  return -(a * P.er[k] * (dhat * ny.transpose()) +
           S.er[k] * ny.dot(dhat) * Matrix2d::Identity() +
           S.er[k] * (ny * dhat.transpose()) + 2.0 * cS2 * t3);
}

Matrix2d kernelKstar_level(const Material& m, const Vector2d& d,
                           const Vector2d& nx, double s, int k) {
  assert(k >= 0 && k <= 3);
  const double r = d.norm();
  const WaveScalars P = wave_scalars(m.cP, r, s);
  if (!P.inside) return Matrix2d::Zero();
  const WaveScalars S = wave_scalars(m.cS, r, s);
  const Vector2d dhat = d / r;
  const double cS2 = m.cS * m.cS;
  const double a = 1.0 - 2.0 * cS2 / (m.cP * m.cP);
  const Matrix2d t3 =
      t3_contract(P.er[k + 2] - S.er[k + 2], P.err[k + 2] - S.err[k + 2],
                  P.errr[k + 2] - S.errr[k + 2], r, dhat, nx);
  return a * P.er[k] * (nx * dhat.transpose()) +
         S.er[k] * nx.dot(dhat) * Matrix2d::Identity() +
         S.er[k] * (dhat * nx.transpose()) + 2.0 * cS2 * t3;
}

Matrix2d kernelW_level(const Material& m, const Vector2d& d,
                       const Vector2d& nx, const Vector2d& ny, double s,
                       int k) {
  assert(k == 0 || k == 2 || k == 3);
  const double r = d.norm();
  const WaveScalars P = wave_scalars(m.cP, r, s);
  if (!P.inside) return Matrix2d::Zero();
  const WaveScalars S = wave_scalars(m.cS, r, s);
  const Vector2d dhat = d / r;
  const double cP2 = m.cP * m.cP, cS2 = m.cS * m.cS;
  const double a = 1.0 - 2.0 * cS2 / cP2;
  const Vector2d tx = rot90(nx), ty = rot90(ny);

  const double lapEP = (k == 0 ? P.em2 : P.e[k - 2]) / cP2;
  const Matrix2d hP = radial_hess(P.er[k], P.err[k], r, dhat);
  const Matrix2d hS = radial_hess(S.er[k], S.err[k], r, dhat);
  const Matrix2d hdJ = radial_hess(P.er[k] / cP2 - S.er[k] / cS2,
                                   P.err[k] / cP2 - S.err[k] / cS2, r, dhat);
  const Matrix2d t4 = t4_contract(
      P.er[k + 2] - S.er[k + 2], P.err[k + 2] - S.err[k + 2],
      P.errr[k + 2] - S.errr[k + 2], P.errrr[k + 2] - S.errrr[k + 2], r,
      dhat, tx, ny);

  const Vector2d divV =
      -(a * lapEP * ny + 2.0 * hS * ny + 2.0 * cS2 * hdJ * ny);
  const Vector2d curlV = -(rot90(Vector2d(hS * ny)) - hS * ty);
  const Matrix2d tgradV =
      -(a * (hP * tx) * ny.transpose() +
        tx.dot(hS * ny) * Matrix2d::Identity() +
        ny * (hS * tx).transpose() + 2.0 * cS2 * t4);
  return m.rho * (cP2 * (nx * divV.transpose()) +
                  cS2 * (tx * curlV.transpose()) +
                  2.0 * cS2 * rot_matrix() * tgradV);
}

KernelBlock eval_G(const Material& m, const Vector2d& d, double delta,
                   double guard) {
  KernelBlock out;
  const double r = d.norm();
  if (near_front(m, r, delta, guard)) {
    out.wavefront = true;
    out.block = nan_block();
    return out;
  }
  if (delta <= 0.0 || r >= m.cP * delta) return out;
  out.block = kernelV_level(m, d, delta, 0);
  return out;
}

TractionKernels eval_traction_kernels(const Material& m, const Vector2d& d,
                                      double delta, const Vector2d& ny,
                                      const Vector2d& nx, double guard) {
  TractionKernels out;
  const double r = d.norm();
  if (near_front(m, r, delta, guard)) {
    out.wavefront = true;
    out.K = out.Kstar = out.W = nan_block();
    return out;
  }
  if (delta <= 0.0 || r >= m.cP * delta) return out;
  out.strongNear = r < 1e-3 * m.cS * delta;
  out.K = kernelK_level(m, d, ny, delta, 0);
  out.Kstar = kernelKstar_level(m, d, nx, delta, 0);
  out.W = kernelW_level(m, d, nx, ny, delta, 0);
  return out;
}

Matrix2d time_convolved_kernel(ConvKind kind, const Material& m,
                               const Vector2d& d, int lag,
                               const TimeGrid& grid, const Vector2d& nx,
                               const Vector2d& ny) {
  const double dt = grid.dt();
  const double w[3] = {1.0, -2.0, 1.0};
  Matrix2d acc = Matrix2d::Zero();
  for (int j = 0; j < 3; ++j) {
    const double s = (lag + 1 - j) * dt;
    if (s <= 0.0) continue;
    switch (kind) {
      case ConvKind::V:
        acc += w[j] * kernelV_level(m, d, s, 1);
        break;
      case ConvKind::K:
        acc += (w[j] / dt) * kernelK_level(m, d, ny, s, 2);
        break;
      case ConvKind::Kstar:
        acc += (w[j] / dt) * kernelKstar_level(m, d, nx, s, 2);
        break;
      case ConvKind::W:
        acc += (w[j] / (dt * dt)) * kernelW_level(m, d, nx, ny, s, 3);
        break;
    }
  }
  return acc;
}

std::vector<double> critical_radii(const Material& m, double delta) {
  if (delta <= 0.0) return {};
  return {m.cS * delta, m.cP * delta};
}

std::vector<double> wavefront_radii(const Material& m, const TimeGrid& grid,
                                    int lag) {
  std::vector<double> out;
  for (int j = -1; j <= 1; ++j) {
    for (double r : critical_radii(m, (lag + j) * grid.dt())) out.push_back(r);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) {
                          return std::abs(a - b) <= 1e-12 * (1.0 + b);
                        }),
            out.end());
  return out;
}

}  // namespace ebem
