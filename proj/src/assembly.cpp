#include "assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>

namespace ebem {

MatrixXd BlockLowerToeplitz::dense() const {
  const int d = dim(), N = nBlocks();
  MatrixXd out = MatrixXd::Zero(static_cast<long>(N) * d, static_cast<long>(N) * d);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j <= i; ++j) out.block(i * d, j * d, d, d) = blocks[i - j];
  return out;
}

MatrixXd SystemBlocks::Sblock(int lag) const {
  MatrixXd S = MatrixXd::Zero(dim(), dim());
  S.topLeftCorner(nPsi2, nPsi2) = V[lag];
  MatrixXd A = K[lag];
  if (lag == 0) A += 0.5 * M;
  S.topRightCorner(nPsi2, nU2) = -A;
  if (form == Formulation::Symmetric) {
    S.bottomLeftCorner(nU2, nPsi2) = A.transpose();
    S.bottomRightCorner(nU2, nU2) = -Wp[lag];
  } else if (lag == 0) {
    S.bottomLeftCorner(nU2, nPsi2) = M.transpose();
  }
  return S;
}

void SystemBlocks::applyS(int lag, const Eigen::Ref<const MatrixXd>& x,
                          Eigen::Ref<MatrixXd> acc) const {
  const auto xPsi = x.topRows(nPsi2);
  const auto xU = x.bottomRows(nU2);
  acc.topRows(nPsi2).noalias() += V[lag] * xPsi;
  acc.topRows(nPsi2).noalias() -= K[lag] * xU;
  if (lag == 0) acc.topRows(nPsi2).noalias() -= 0.5 * (M * xU);
  if (form == Formulation::Symmetric) {
    acc.bottomRows(nU2).noalias() += K[lag].transpose() * xPsi;
    if (lag == 0) acc.bottomRows(nU2).noalias() += 0.5 * (M.transpose() * xPsi);
    acc.bottomRows(nU2).noalias() -= Wp[lag] * xU;
  } else if (lag == 0) {
    acc.bottomRows(nU2).noalias() += M.transpose() * xPsi;
  }
}

BlockLowerToeplitz SystemBlocks::toToeplitz() const {
  BlockLowerToeplitz T;
  T.blocks.reserve(nLags());
  for (int l = 0; l < nLags(); ++l) T.blocks.push_back(Sblock(l));
  return T;
}

namespace {

double point_seg_dist(const Vector2d& p, const Seg& s) {
  const Vector2d d = s.b - s.a;
  const double L2 = d.squaredNorm();
  const double t = L2 > 0.0 ? std::clamp((p - s.a).dot(d) / L2, 0.0, 1.0) : 0.0;
  return (p - (s.a + t * d)).norm();
}

// Boundary elements never properly cross, so endpoint projections suffice.
double seg_min_dist(const Seg& A, const Seg& B) {
  return std::min(std::min(point_seg_dist(A.a, B), point_seg_dist(A.b, B)),
                  std::min(point_seg_dist(B.a, A), point_seg_dist(B.b, A)));
}

// |x - y| is convex in the parameters, so the maximum sits at a corner.
double seg_max_dist(const Seg& A, const Seg& B) {
  double m = 0.0;
  for (const Vector2d& p : {A.a, A.b})
    for (const Vector2d& q : {B.a, B.b}) m = std::max(m, (p - q).norm());
  return m;
}

struct PairWant {
  bool V = false, Kef = false, Kfe = false, W = false;
};

struct LocalAcc {
  double* V = nullptr;
  double* Kef = nullptr;
  double* Kfe = nullptr;
  double* W = nullptr;
};

inline void add_block(double* blk, int bi, int bj, double c, const Matrix2d& k) {
  double* row0 = blk + (2 * bi) * 4 + 2 * bj;
  row0[0] += c * k(0, 0);
  row0[1] += c * k(0, 1);
  row0[4] += c * k(1, 0);
  row0[5] += c * k(1, 1);
}

// One quadrature point of the pair integrand, local blocks laid out 4x4
// row-major as (2*loc + comp).
inline void accumulate_point(const PairWant& want, const GalerkinScalars& g, const Material& mat,
                             const Vector2d& dh, const Vector2d& nxE, const Vector2d& nyF,
                             const double bx[2], const double by[2], const double dxE[2],
                             const double dyF[2], double w, const LocalAcc& out) {
  if (want.V) {
    const Matrix2d Mv = matV_galerkin(g, mat, dh);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) add_block(out.V, i, j, w * bx[i] * by[j], Mv);
  }
  if (want.Kef) {
    const KGalerkinMats km = matK_galerkin(g, mat, dh, nyF);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        add_block(out.Kef, i, j, w * bx[i] * by[j], km.val);
        add_block(out.Kef, i, j, w * bx[i] * dyF[j], km.der);
      }
  }
  if (want.Kfe) {
    const KGalerkinMats km = matK_galerkin(g, mat, -dh, nxE);
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) {
        add_block(out.Kfe, j, i, w * by[j] * bx[i], km.val);
        add_block(out.Kfe, j, i, w * by[j] * dxE[i], km.der);
      }
  }
  if (want.W) {
    const WGalerkinMats wm = matW_galerkin(g, mat, dh, nxE, nyF);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        add_block(out.W, i, j, w * bx[i] * by[j], wm.vv);
        add_block(out.W, i, j, w * bx[i] * dyF[j], wm.vd);
        add_block(out.W, i, j, w * dxE[i] * by[j], wm.dv);
        add_block(out.W, i, j, w * dxE[i] * dyF[j], wm.dd);
      }
  }
}

void sorted_unique(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end(),
                      [](double a, double b) { return std::abs(a - b) < 1e-12; }),
          v.end());
}

// Composite Gauss over the panel chain 0 < b_1 < ... < 1 with a cosine map
// per panel; the map clusters nodes at panel ends where the wavefront
// leaves square-root kinks.
template <class F>
void cosine_panels(const std::vector<double>& breaks, const QuadratureRule& rule, const F& f) {
  double lo = 0.0;
  for (size_t p = 0; p <= breaks.size(); ++p) {
    const double hi = p < breaks.size() ? breaks[p] : 1.0;
    const double width = hi - lo;
    if (width > 1e-14) {
      for (int q = 0; q < rule.order(); ++q) {
        const double u = rule.nodes[q];
        const double pos = lo + width * 0.5 * (1.0 - std::cos(PI * u));
        const double jac = width * 0.5 * PI * std::sin(PI * u) * rule.weights[q];
        f(pos, jac);
      }
    }
    lo = hi;
  }
}

// Pair integration for lags whose wavefront radii cross the element pair:
// outer panels split where a front radius around an inner endpoint (or the
// inner line) sweeps past, inner panels split per outer node at the exact
// circle crossings.
void integrate_front(const PairIntegrand& f, const Seg& ex, const Seg& ey,
                     const std::vector<double>& radii, const QuadratureRule& rule, double* acc) {
  auto splits = split_at_wavefronts(ex, ey, radii, rule);
  std::vector<double> outerBreaks = splits.first.breakpoints;
  // outer positions where a front circle is tangent to the inner line
  const Vector2d tv = ey.tangent();
  const Vector2d nrm(tv[1], -tv[0]);
  const double d0 = (ex.a - ey.a).dot(nrm), d1 = (ex.b - ey.a).dot(nrm);
  if (std::abs(d1 - d0) > 1e-14) {
    for (double R : radii)
      for (double sgn : {-1.0, 1.0}) {
        const double beta = (sgn * R - d0) / (d1 - d0);
        if (beta > 1e-12 && beta < 1.0 - 1e-12) outerBreaks.push_back(beta);
      }
  }
  sorted_unique(outerBreaks);
  const double lenx = ex.len(), leny = ey.len();
  std::vector<double> crossings;
  cosine_panels(outerBreaks, rule, [&](double beta, double wb) {
    const Vector2d x = ex.at(beta);
    crossings.clear();
    for (double R : radii) circle_crossings(x, ey, R, crossings);
    sorted_unique(crossings);
    cosine_panels(crossings, rule, [&](double gamma, double wg) {
      f(x, ey.at(gamma), beta, gamma, wb * wg * lenx * leny, acc);
    });
  });
}

struct SweepTargets {
  std::vector<MatrixXd>* V = nullptr;
  std::vector<MatrixXd>* K = nullptr;
  std::vector<MatrixXd>* W = nullptr;
};

void assemble_sweep(const BoundaryMesh& mesh, const DofLayout& L, const Material& mat,
                    const TimeGrid& grid, const AssemblyOptions& opts, int nLags, int onlyLag,
                    const SweepTargets& out) {
  mat.validate();
  grid.validate();
  mesh.validate();
  const int nE = mesh.nElements();
  const int nPsi2 = 2 * L.nPsi, nU2 = 2 * L.nU;
  const double dt = grid.dt();
  if (out.V) out.V->assign(nLags, MatrixXd::Zero(nPsi2, nPsi2));
  if (out.K) out.K->assign(nLags, MatrixXd::Zero(nPsi2, nU2));
  if (out.W) out.W->assign(nLags, MatrixXd::Zero(nU2, nU2));

  std::vector<std::vector<double>> radiiByLag(nLags);
  for (int lag = 0; lag < nLags; ++lag) radiiByLag[lag] = wavefront_radii(mat, grid, lag);

  const QuadratureRule rule = gauss_rule(opts.gaussOrder);
  const QuadratureRule frontRule = gauss_rule(opts.frontGaussOrder);
  const int nq = rule.order(), npt = nq * nq;
  const int nLev = nLags + 2;

  std::vector<GalerkinScalars> cache(static_cast<size_t>(npt) * nLev);
  std::vector<uint8_t> have(static_cast<size_t>(npt) * nLev, 0);
  using Loc = std::array<double, 16>;
  std::vector<Loc> locV(nLags), locKef(nLags), locKfe(nLags), locW(nLags);
  std::vector<char> touched(nLags, 0);
  std::vector<Vector2d> xs(nq), ys(nq);
  std::vector<double> rr(npt);
  std::vector<Vector2d> dhh(npt);
  std::vector<double> ww(npt);
  std::vector<int> fastLags;
  fastLags.reserve(nLags);

  for (int e = 0; e < nE; ++e) {
    const bool eSigma = mesh.elements[e].tag != Region::Dirichlet;
    for (int f = e; f < nE; ++f) {
      const bool fSigma = mesh.elements[f].tag != Region::Dirichlet;
      PairWant want;
      want.V = out.V != nullptr;
      want.Kef = out.K != nullptr && fSigma;
      want.Kfe = out.K != nullptr && eSigma && f != e;
      want.W = out.W != nullptr && eSigma && fSigma;
      if (!(want.V || want.Kef || want.Kfe || want.W)) continue;

      const Seg segE = mesh.seg(e), segF = mesh.seg(f);
      const bool coincident = (e == f);
      const bool shareVertex =
          !coincident && (mesh.elements[e].a == mesh.elements[f].a ||
                          mesh.elements[e].a == mesh.elements[f].b ||
                          mesh.elements[e].b == mesh.elements[f].a ||
                          mesh.elements[e].b == mesh.elements[f].b);
      const double rmin = (coincident || shareVertex) ? 0.0 : seg_min_dist(segE, segF);
      const double rmax = coincident ? segE.len() : seg_max_dist(segE, segF);
      if (rmin >= mat.cP * nLags * dt) continue;  // beyond every assembled cone

      const Vector2d nxE = mesh.elements[e].normal, nyF = mesh.elements[f].normal;
      const double lenE = mesh.elements[e].len, lenF = mesh.elements[f].len;
      const double dxE[2] = {-1.0 / lenE, 1.0 / lenE}, dyF[2] = {-1.0 / lenF, 1.0 / lenF};

      std::fill(have.begin(), have.end(), uint8_t{0});
      std::fill(touched.begin(), touched.end(), char{0});
      fastLags.clear();
      bool havePts = false;

      int curLag = 0;
      std::array<double, 64> tmp{};
      const LocalAcc tmpAcc{tmp.data(), tmp.data() + 16, tmp.data() + 32, tmp.data() + 48};
      const PairIntegrand integrand = [&](const Vector2d& x, const Vector2d& y, double al,
                                          double be, double w, double* acc) {
        const Vector2d d = x - y;
        const double r = d.norm();
        if (r <= 0.0 || r >= mat.cP * (curLag + 1) * dt) return;
        const GalerkinScalars g = convolved_galerkin(mat, r, curLag, dt);
        const Vector2d dh = d / r;
        const double bx[2] = {1.0 - al, al}, by[2] = {1.0 - be, be};
        const LocalAcc slots{acc, acc + 16, acc + 32, acc + 48};
        accumulate_point(want, g, mat, dh, nxE, nyF, bx, by, dxE, dyF, w, slots);
      };
      auto flushTmp = [&](int lag, const PairQuadResult& res) {
        if (!res.converged)
          throw EbemError(errc::assembly,
                          "pair quadrature did not converge on elements (" + std::to_string(e) +
                              ", " + std::to_string(f) + "), lag " + std::to_string(lag));
        for (int s = 0; s < 16; ++s) {
          locV[lag][s] += tmp[s];
          locKef[lag][s] += tmp[16 + s];
          locKfe[lag][s] += tmp[32 + s];
          locW[lag][s] += tmp[48 + s];
        }
        touched[lag] = 1;
      };

      const int lagStart = std::max(0, static_cast<int>(rmin / (mat.cP * dt)) - 1);
      for (int lag = lagStart; lag < nLags; ++lag) {
        if (onlyLag >= 0 && lag != onlyLag) continue;
        if (rmin >= mat.cP * (lag + 1) * dt) continue;  // outside the light cone
        const std::vector<double>& radii = radiiByLag[lag];
        if (coincident) {
          curLag = lag;
          tmp.fill(0.0);
          std::vector<double> uBreaks;
          for (double R : radii)
            if (R < rmax) uBreaks.push_back(R / rmax);
          flushTmp(lag, integrate_pair(integrand, 64, segE, segF, frontRule, {}, {}, tmp.data(),
                                       opts.relTol, opts.maxDepth, uBreaks));
          continue;
        }
        // Touching pairs keep an r -> 0 log term at the shared vertex at
        // every lag (the time stencil cancels it for the weaker kernels but
        // not for the hypersingular one), so they always stay adaptive.
        if (shareVertex) {
          curLag = lag;
          tmp.fill(0.0);
          auto splits = split_at_wavefronts(segE, segF, radii, frontRule);
          flushTmp(lag, integrate_pair(integrand, 64, segE, segF, frontRule, splits.first,
                                       splits.second, tmp.data(), opts.relTol, opts.maxDepth));
          continue;
        }
        const double tol = 1e-9 * std::max(rmax, dt);
        bool crossing = false;
        for (double R : radii) crossing = crossing || (R > rmin + tol && R < rmax - tol);
        if (!crossing) {
          fastLags.push_back(lag);
        } else {
          curLag = lag;
          tmp.fill(0.0);
          integrate_front(integrand, segE, segF, radii, frontRule, tmp.data());
          flushTmp(lag, {});
        }
      }

      if (!fastLags.empty()) {
        if (!havePts) {
          havePts = true;
          for (int i = 0; i < nq; ++i) xs[i] = segE.at(rule.nodes[i]);
          for (int j = 0; j < nq; ++j) ys[j] = segF.at(rule.nodes[j]);
          for (int i = 0; i < nq; ++i)
            for (int j = 0; j < nq; ++j) {
              const int pt = i * nq + j;
              const Vector2d d = xs[i] - ys[j];
              rr[pt] = d.norm();
              dhh[pt] = d / rr[pt];
              ww[pt] = rule.weights[i] * rule.weights[j] * lenE * lenF;
            }
        }
        auto cachedAt = [&](int pt, int k) -> const GalerkinScalars* {
          if (k < 1) return nullptr;
          const size_t idx = static_cast<size_t>(pt) * nLev + k;
          if (!have[idx]) {
            cache[idx] = galerkin_scalars(mat, rr[pt], k * dt);
            have[idx] = 1;
          }
          return &cache[idx];
        };
        for (int lag : fastLags) {
          const double rcut = mat.cP * (lag + 1) * dt;
          const LocalAcc slots{locV[lag].data(), locKef[lag].data(), locKfe[lag].data(),
                               locW[lag].data()};
          for (int pt = 0; pt < npt; ++pt) {
            if (rr[pt] >= rcut) continue;
            const GalerkinScalars g = combine_galerkin_stencil(
                cachedAt(pt, lag + 1), cachedAt(pt, lag), cachedAt(pt, lag - 1), dt);
            const int i = pt / nq, j = pt % nq;
            const double bx[2] = {1.0 - rule.nodes[i], rule.nodes[i]};
            const double by[2] = {1.0 - rule.nodes[j], rule.nodes[j]};
            accumulate_point(want, g, mat, dhh[pt], nxE, nyF, bx, by, dxE, dyF, ww[pt], slots);
          }
          touched[lag] = 1;
        }
      }

      // scatter into the global lag blocks; V and W mirror by transposition
      auto uDofAt = [&](int elem, int node) {
        const int v = node == 0 ? mesh.elements[elem].a : mesh.elements[elem].b;
        return L.uDofOfVertex[v];
      };
      for (int lag = 0; lag < nLags; ++lag) {
        if (!touched[lag]) continue;
        if (want.V) {
          Loc& lv = locV[lag];
          if (coincident)  // enforce exact block symmetry of the Galerkin form
            for (int s = 0; s < 4; ++s)
              for (int t = s + 1; t < 4; ++t) {
                const double avg = 0.5 * (lv[s * 4 + t] + lv[t * 4 + s]);
                lv[s * 4 + t] = lv[t * 4 + s] = avg;
              }
          MatrixXd& B = (*out.V)[lag];
          for (int i = 0; i < 2; ++i)
            for (int a = 0; a < 2; ++a)
              for (int j = 0; j < 2; ++j)
                for (int b = 0; b < 2; ++b) {
                  const double v = lv[(2 * i + a) * 4 + 2 * j + b];
                  const int row = psi_index(L, a, 2 * e + i), col = psi_index(L, b, 2 * f + j);
                  B(row, col) += v;
                  if (!coincident) B(col, row) += v;
                }
        }
        if (want.Kef || want.Kfe) {
          MatrixXd& B = (*out.K)[lag];
          for (int i = 0; i < 2; ++i)
            for (int a = 0; a < 2; ++a)
              for (int j = 0; j < 2; ++j)
                for (int b = 0; b < 2; ++b) {
                  if (want.Kef) {
                    const int ud = uDofAt(f, j);
                    if (ud >= 0)
                      B(psi_index(L, a, 2 * e + i), b * L.nU + ud) +=
                          locKef[lag][(2 * i + a) * 4 + 2 * j + b];
                  }
                  if (want.Kfe) {
                    const int ud = uDofAt(e, j);
                    if (ud >= 0)
                      B(psi_index(L, a, 2 * f + i), b * L.nU + ud) +=
                          locKfe[lag][(2 * i + a) * 4 + 2 * j + b];
                  }
                }
        }
        if (want.W) {
          Loc& lw = locW[lag];
          if (coincident)
            for (int s = 0; s < 4; ++s)
              for (int t = s + 1; t < 4; ++t) {
                const double avg = 0.5 * (lw[s * 4 + t] + lw[t * 4 + s]);
                lw[s * 4 + t] = lw[t * 4 + s] = avg;
              }
          MatrixXd& B = (*out.W)[lag];
          for (int i = 0; i < 2; ++i)
            for (int a = 0; a < 2; ++a) {
              const int rd = uDofAt(e, i);
              if (rd < 0) continue;
              for (int j = 0; j < 2; ++j)
                for (int b = 0; b < 2; ++b) {
                  const int cd = uDofAt(f, j);
                  if (cd < 0) continue;
                  const double v = lw[(2 * i + a) * 4 + 2 * j + b];
                  const int row = a * L.nU + rd, col = b * L.nU + cd;
                  B(row, col) += v;
                  if (!coincident) B(col, row) += v;
                }
            }
        }
        locV[lag].fill(0.0);
        locKef[lag].fill(0.0);
        locKfe[lag].fill(0.0);
        locW[lag].fill(0.0);
      }
    }
  }
}

}  // namespace

MatrixXd assemble_mass(const BoundaryMesh& mesh, const DofLayout& L) {
  MatrixXd M = MatrixXd::Zero(2 * L.nPsi, 2 * L.nU);
  for (int e = 0; e < mesh.nElements(); ++e) {
    const MeshElement& el = mesh.elements[e];
    if (el.tag == Region::Dirichlet) continue;
    for (int j = 0; j < 2; ++j) {
      const int ud = L.uDofOfVertex[j == 0 ? el.a : el.b];
      if (ud < 0) continue;
      for (int i = 0; i < 2; ++i) {
        const double val = el.len * (i == j ? 1.0 / 3.0 : 1.0 / 6.0);
        for (int c = 0; c < 2; ++c) M(psi_index(L, c, 2 * e + i), c * L.nU + ud) += val;
      }
    }
  }
  return M;
}

SystemBlocks assemble_system(Formulation form, const BoundaryMesh& mesh, const DofLayout& layout,
                             const Material& mat, const TimeGrid& grid,
                             const AssemblyOptions& opts, int nLags) {
  if (nLags < 0) nLags = grid.nSteps;
  SystemBlocks S;
  S.form = form;
  S.nPsi2 = 2 * layout.nPsi;
  S.nU2 = 2 * layout.nU;
  S.M = assemble_mass(mesh, layout);
  SweepTargets t;
  t.V = &S.V;
  t.K = &S.K;
  if (form == Formulation::Symmetric) t.W = &S.Wp;
  assemble_sweep(mesh, layout, mat, grid, opts, nLags, -1, t);
  return S;
}

MatrixXd assemble_operator_block(OpKind kind, const BoundaryMesh& mesh, const DofLayout& layout,
                                 const Material& mat, const TimeGrid& grid, int lag,
                                 const AssemblyOptions& opts) {
  if (lag < 0 || lag >= grid.nSteps)
    throw EbemError(errc::assembly, "operator block: lag outside the time grid");
  std::vector<MatrixXd> Vb, Kb, Wb;
  SweepTargets t;
  switch (kind) {
    case OpKind::V: t.V = &Vb; break;
    case OpKind::K:
    case OpKind::Kstar: t.K = &Kb; break;
    case OpKind::W: t.W = &Wb; break;
  }
  assemble_sweep(mesh, layout, mat, grid, opts, lag + 1, lag, t);
  switch (kind) {
    case OpKind::V: return Vb[lag];
    case OpKind::K: return Kb[lag];
    case OpKind::Kstar: return Kb[lag].transpose();
    case OpKind::W: return lag == 0 ? Wb[0] : MatrixXd(-Wb[lag]);
  }
  throw EbemError(errc::internal, "operator block: bad kind");
}

BlockLowerToeplitz assemble_S_blocks(Formulation form, const BoundaryMesh& mesh,
                                     const DofLayout& layout, const Material& mat,
                                     const TimeGrid& grid, const AssemblyOptions& opts) {
  return assemble_system(form, mesh, layout, mat, grid, opts).toToeplitz();
}

RhsVector assemble_rhs(const BoundaryMesh& mesh, const DofLayout& layout, const TimeGrid& grid,
                       const BoundaryDatum& datum, const std::vector<double>& timeBreaks) {
  grid.validate();
  const int dim = block_dim(layout), N = grid.nSteps;
  const double dt = grid.dt();
  RhsVector F;
  F.blockDim = dim;
  F.data = VectorXd::Zero(static_cast<long>(N) * dim);
  const QuadratureRule xr = gauss_rule(8), tr = gauss_rule(8);
  std::vector<double> cuts;
  for (int e = 0; e < mesh.nElements(); ++e) {
    const MeshElement& el = mesh.elements[e];
    if (el.tag == Region::Dirichlet) continue;
    const int ud[2] = {layout.uDofOfVertex[el.a], layout.uDofOfVertex[el.b]};
    if (ud[0] < 0 && ud[1] < 0) continue;
    const Seg s = mesh.seg(e);
    for (int q = 0; q < xr.order(); ++q) {
      const double beta = xr.nodes[q];
      const Vector2d x = s.at(beta);
      const double wx = xr.weights[q] * el.len;
      const double shape[2] = {1.0 - beta, beta};
      for (int l = 0; l < N; ++l) {
        const double t0 = grid.t(l), t1 = grid.t(l + 1);
        cuts.clear();
        for (double b : timeBreaks)
          if (b > t0 + 1e-14 * grid.T && b < t1 - 1e-14 * grid.T) cuts.push_back(b);
        std::sort(cuts.begin(), cuts.end());
        Vector2d avg = Vector2d::Zero();
        double lo = t0;
        for (size_t p = 0; p <= cuts.size(); ++p) {
          const double hi = p < cuts.size() ? cuts[p] : t1;
          for (int k = 0; k < tr.order(); ++k)
            avg += (tr.weights[k] * (hi - lo) / dt) * datum(lo + (hi - lo) * tr.nodes[k], x, el.tag);
          lo = hi;
        }
        auto blk = F.block(l);
        for (int i = 0; i < 2; ++i) {
          if (ud[i] < 0) continue;
          for (int c = 0; c < 2; ++c) blk[u_index(layout, c, ud[i])] += wx * shape[i] * avg[c];
        }
      }
    }
  }
  return F;
}

}  // namespace ebem
