#include "postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "kernels.hpp"
#include "quadrature.hpp"

namespace ebem {

namespace {

double point_seg_distance(const Vector2d& p, const Seg& s) {
  const Vector2d d = s.b - s.a;
  const double L2 = d.squaredNorm();
  const double u = L2 > 0.0 ? std::clamp((p - s.a).dot(d) / L2, 0.0, 1.0) : 0.0;
  return (p - (s.a + u * d)).norm();
}

}  // namespace

Vector2d DisplacementTrace::at(int uDof, double t) const {
  const double tc = std::clamp(t, 0.0, dt * nSteps);
  const int k = std::clamp(static_cast<int>(tc / dt), 0, nSteps - 1);
  const double th = std::clamp(tc / dt - k, 0.0, 1.0);
  Vector2d v;
  for (int c = 0; c < 2; ++c) {
    const int r = c * nU + uDof;
    v[c] = (1.0 - th) * nodal(r, k) + th * nodal(r, k + 1);
  }
  return v;
}

DisplacementTrace reconstruct_displacement(const VectorXd& U, const DofLayout& layout,
                                           const TimeGrid& grid) {
  const int nU2 = 2 * layout.nU;
  if (U.size() != static_cast<long>(nU2) * grid.nSteps)
    throw EbemError(errc::internal, "reconstruct: coefficient vector does not match the layout");
  DisplacementTrace tr;
  tr.nU = layout.nU;
  tr.nSteps = grid.nSteps;
  tr.dt = grid.dt();
  tr.nodal = MatrixXd::Zero(nU2, grid.nSteps + 1);
  for (int k = 0; k < grid.nSteps; ++k)
    tr.nodal.col(k + 1) = tr.nodal.col(k) + U.segment(static_cast<long>(k) * nU2, nU2);
  return tr;
}

Vector2d trace_eval(const DisplacementTrace& tr, const BoundaryMesh& mesh,
                    const DofLayout& layout, int elem, double s, double t) {
  const MeshElement& el = mesh.elements[elem];
  const int da = layout.uDofOfVertex[el.a], db = layout.uDofOfVertex[el.b];
  Vector2d val = Vector2d::Zero();
  if (da >= 0) val += (1.0 - s) * tr.at(da, t);
  if (db >= 0) val += s * tr.at(db, t);
  return val;
}

EnergyReport energy(const SystemBlocks& system, const VectorXd& X) {
  const int dim = system.dim();
  if (dim <= 0 || X.size() % dim != 0)
    throw EbemError(errc::internal, "energy: vector does not split into system blocks");
  const int nB = static_cast<int>(X.size() / dim);
  Eigen::Map<const MatrixXd> Xm(X.data(), dim, nB);

  EnergyReport rep;
  rep.cumulative.assign(nB + 1, 0.0);
  MatrixXd y(dim, 1);
  double e = 0.0;
  for (int k = 0; k < nB; ++k) {
    y.setZero();
    for (int j = std::max(0, k - system.nLags() + 1); j <= k; ++j)
      system.applyS(k - j, Xm.col(j), y);
    e += Xm.col(k).dot(y.col(0));
    rep.cumulative[k + 1] = e;
  }
  rep.totalEnergy = e;
  return rep;
}

double l2_spacetime_error(const TraceField& numeric, const SpaceTimeField& exact,
                          const BoundaryMesh& mesh, const TimeGrid& grid, int order) {
  const QuadratureRule q = gauss_rule(order);
  const double dt = grid.dt();
  double acc = 0.0;
  for (int e = 0; e < mesh.nElements(); ++e) {
    const Seg sg = mesh.seg(e);
    const double cell = sg.len() * dt;
    for (int k = 0; k < grid.nSteps; ++k) {
      const double t0 = grid.t(k);
      for (int i = 0; i < q.order(); ++i) {
        const double s = q.nodes[i];
        const Vector2d x = sg.at(s);
        for (int j = 0; j < q.order(); ++j) {
          const double t = t0 + dt * q.nodes[j];
          acc += q.weights[i] * q.weights[j] * cell * (numeric(e, s, t) - exact(x, t)).squaredNorm();
        }
      }
    }
  }
  return std::sqrt(acc);
}

RichardsonFit richardson_reference(double Eh, double Eh2, double Eh4) {
  RichardsonFit fit;
  const double d1 = Eh - Eh2, d2 = Eh2 - Eh4;
  if (!(d1 * d2 > 0.0)) return fit;  // differences must shrink with one sign
  const double ratio = d1 / d2;      // equals 2^order for a clean power law
  if (!(ratio > 1.0)) return fit;
  fit.order = std::log2(ratio);
  fit.reference = Eh4 - d2 / (ratio - 1.0);
  fit.ok = true;
  return fit;
}

InteriorSample eval_interior(const Vector2d& x, double t, const VectorXd& Psi, const VectorXd& U,
                             const BoundaryMesh& mesh, const DofLayout& layout, const Material& mat,
                             const TimeGrid& grid, int gaussOrder) {
  InteriorSample out;
  out.distance = std::numeric_limits<double>::infinity();
  for (int e = 0; e < mesh.nElements(); ++e)
    out.distance = std::min(out.distance, point_seg_distance(x, mesh.seg(e)));
  if (t <= 0.0) return out;

  const int N = grid.nSteps;
  const int nPsi2 = 2 * layout.nPsi, nU2 = 2 * layout.nU;
  if (Psi.size() != static_cast<long>(N) * nPsi2 || U.size() != static_cast<long>(N) * nU2)
    throw EbemError(errc::internal, "eval_interior: coefficient sizes do not match the layout");
  const double dt = grid.dt();

  // Grid times still inside the light cone; their wavefront radii cut each
  // element into panels on which the reduced integrand is smooth.
  int lmax = -1;
  std::vector<double> radii;
  for (int l = 0; l <= N; ++l) {
    const double s = t - grid.t(l);
    if (s <= 0.0) break;
    lmax = l;
    radii.push_back(mat.cP * s);
    radii.push_back(mat.cS * s);
  }
  const int L = std::min(N - 1, lmax);  // last coefficient block that can contribute
  if (L < 0) return out;

  const QuadratureRule rule = gauss_rule(gaussOrder);
  Vector2d acc = Vector2d::Zero();
  std::vector<double> cuts;
  std::vector<Matrix2d> G1(L + 2), K2(L + 2);

  for (int e = 0; e < mesh.nElements(); ++e) {
    const Seg sg = mesh.seg(e);
    const Vector2d ny = mesh.elements[e].normal;
    const double len = sg.len();

    cuts.clear();
    for (double R : radii) circle_crossings(x, sg, R, cuts);
    const double L2 = (sg.b - sg.a).squaredNorm();
    const double proj = L2 > 0.0 ? (x - sg.a).dot(sg.b - sg.a) / L2 : 0.0;
    if (proj > 1e-12 && proj < 1.0 - 1e-12) cuts.push_back(proj);
    cuts.push_back(0.0);
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               cuts.end());

    const int da = layout.uDofOfVertex[mesh.elements[e].a];
    const int db = layout.uDofOfVertex[mesh.elements[e].b];

    for (size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double a0 = cuts[c], w0 = cuts[c + 1] - cuts[c];
      for (int i = 0; i < rule.order(); ++i) {
        // cosine map: clusters nodes at the panel ends, where the wavefront
        // crossings leave square-root kinks
        const double ph = PI * rule.nodes[i];
        const double be = a0 + w0 * 0.5 * (1.0 - std::cos(ph));
        const double w = rule.weights[i] * w0 * 0.5 * PI * std::sin(ph) * len;
        const Vector2d y = sg.at(be);
        const Vector2d d = x - y;

        for (int l = 0; l <= L + 1; ++l) {
          const double s = t - grid.t(l);
          G1[l] = s > 0.0 ? kernelV_level(mat, d, s, 1) : Matrix2d::Zero();
          K2[l] = s > 0.0 ? kernelK_level(mat, d, ny, s, 2) : Matrix2d::Zero();
        }
        for (int l = 0; l <= L; ++l) {
          Vector2d psi, u;
          for (int comp = 0; comp < 2; ++comp) {
            const long pb = static_cast<long>(l) * nPsi2 + comp * layout.nPsi + 2 * e;
            psi[comp] = (1.0 - be) * Psi[pb] + be * Psi[pb + 1];
            const long ub = static_cast<long>(l) * nU2 + comp * layout.nU;
            u[comp] = (da >= 0 ? (1.0 - be) * U[ub + da] : 0.0) +
                      (db >= 0 ? be * U[ub + db] : 0.0);
          }
          acc += w * ((G1[l] - G1[l + 1]) * psi - (1.0 / dt) * (K2[l] - K2[l + 1]) * u);
        }
      }
    }
  }
  out.u = acc;
  return out;
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path);
  if (!os) throw EbemError(errc::io, "cannot open " + path + " for writing");
  for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  char buf[40];
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      os << (i ? "," : "") << buf;
    }
    os << "\n";
  }
  os.flush();
  if (!os.good()) throw EbemError(errc::io, "write failed: " + path);
}

}  // namespace ebem
