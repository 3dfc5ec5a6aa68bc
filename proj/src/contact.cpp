#include "contact.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ebem {

VectorXd CouplingMatrices::applyMstar(const VectorXd& lambda) const {
  if (lambda.size() != static_cast<long>(nSteps) * nLam2)
    throw EbemError(errc::config, "applyMstar: multiplier vector has wrong length");
  VectorXd out = VectorXd::Zero(static_cast<long>(nSteps) * blockDim());
  for (int l = 0; l < nSteps; ++l)
    out.segment(static_cast<long>(l) * blockDim() + nPsi2, nU2).noalias() =
        Mspace.transpose() * lambda.segment(static_cast<long>(l) * nLam2, nLam2);
  return out;
}

VectorXd CouplingMatrices::applyMtilde(const VectorXd& u) const {
  if (u.size() != static_cast<long>(nSteps) * nU2)
    throw EbemError(errc::config, "applyMtilde: trace vector has wrong length");
  VectorXd out(static_cast<long>(nSteps) * nLam2);
  VectorXd run = VectorXd::Zero(nLam2);
  for (int m = 0; m < nSteps; ++m) {
    VectorXd z = Mspace * u.segment(static_cast<long>(m) * nU2, nU2);
    out.segment(static_cast<long>(m) * nLam2, nLam2) = dt * (run + 0.5 * z);
    run += z;
  }
  return out;
}

MatrixXd CouplingMatrices::denseMstar() const {
  MatrixXd out = MatrixXd::Zero(static_cast<long>(nSteps) * blockDim(),
                                static_cast<long>(nSteps) * nLam2);
  for (int l = 0; l < nSteps; ++l)
    out.block(static_cast<long>(l) * blockDim() + nPsi2, static_cast<long>(l) * nLam2, nU2,
              nLam2) = Mspace.transpose();
  return out;
}

MatrixXd CouplingMatrices::denseMtilde() const {
  MatrixXd out = MatrixXd::Zero(static_cast<long>(nSteps) * nLam2,
                                static_cast<long>(nSteps) * nU2);
  for (int m = 0; m < nSteps; ++m)
    for (int l = 0; l <= m; ++l)
      out.block(static_cast<long>(m) * nLam2, static_cast<long>(l) * nU2, nLam2, nU2) =
          (l < m ? dt : 0.5 * dt) * Mspace;
  return out;
}

CouplingMatrices assemble_coupling(const BoundaryMesh& mesh, const DofLayout& layout,
                                   const TimeGrid& grid, const GapFunction& gap) {
  mesh.validate();
  grid.validate();
  CouplingMatrices cm;
  cm.nSteps = grid.nSteps;
  cm.dt = grid.dt();
  cm.nPsi2 = 2 * layout.nPsi;
  cm.nU2 = 2 * layout.nU;
  cm.nLam2 = 2 * layout.nLambda;
  cm.Mspace = MatrixXd::Zero(cm.nLam2, cm.nU2);
  cm.Gvec = VectorXd::Zero(static_cast<long>(cm.nSteps) * cm.nU2);
  if (layout.nLambda == 0) return cm;

  for (int j = 0; j < layout.nLambda; ++j) {
    const MeshElement& el = mesh.elements[layout.contactElems[j]];
    const Vector2d nu = -el.normal;  // points from the boundary toward the body
    const Vector2d tau = rot90(el.normal);
    const double w = 0.5 * el.len;
    for (int vtx : {el.a, el.b}) {
      const int ud = layout.uDofOfVertex[vtx];
      if (ud < 0) continue;
      for (int c = 0; c < 2; ++c) {
        cm.Mspace(j, c * layout.nU + ud) += w * nu[c];
        cm.Mspace(layout.nLambda + j, c * layout.nU + ud) += w * tau[c];
      }
    }
  }

  // Nodal contact directions: average of the adjacent contact element
  // directions. The gap coefficients are ramp increments so that the
  // reconstructed trace matches gap * direction at every node and time node.
  std::vector<Vector2d> nodal(mesh.nVertices(), Vector2d::Zero());
  for (int j = 0; j < layout.nLambda; ++j) {
    const MeshElement& el = mesh.elements[layout.contactElems[j]];
    nodal[el.a] -= el.normal;
    nodal[el.b] -= el.normal;
  }
  for (int v = 0; v < mesh.nVertices(); ++v) {
    if (nodal[v].isZero()) continue;
    const int ud = layout.uDofOfVertex[v];
    if (ud < 0) continue;
    const double nn = nodal[v].norm();
    if (nn < 1e-12)
      throw EbemError(errc::geometry, "assemble_coupling: contact normals cancel at a vertex");
    const Vector2d nu = nodal[v] / nn;
    double prev = 0.0;
    for (int l = 0; l < cm.nSteps; ++l) {
      const double gl = gap(mesh.vertices[v], grid.t(l + 1));
      if (!std::isfinite(gl))
        throw EbemError(errc::config, "assemble_coupling: gap function returned a non-finite value");
      const double inc = gl - prev;
      prev = gl;
      for (int c = 0; c < 2; ++c)
        cm.Gvec[static_cast<long>(l) * cm.nU2 + c * layout.nU + ud] = inc * nu[c];
    }
  }
  return cm;
}

VectorXd project_prC(const VectorXd& w, const DofLayout& layout) {
  if (w.size() != static_cast<long>(layout.normalIdx.size() + layout.tangentIdx.size()))
    throw EbemError(errc::config, "project_prC: vector length does not match the layout");
  VectorXd out(w.size());
  for (int i : layout.normalIdx) out[i] = std::max(w[i], 0.0);
  for (int i : layout.tangentIdx) out[i] = 0.0;
  return out;
}

namespace {

VectorXd extract_trace(const VectorXd& x, int nSteps, int nPsi2, int nU2) {
  VectorXd u(static_cast<long>(nSteps) * nU2);
  const int dim = nPsi2 + nU2;
  for (int l = 0; l < nSteps; ++l)
    u.segment(static_cast<long>(l) * nU2, nU2) =
        x.segment(static_cast<long>(l) * dim + nPsi2, nU2);
  return u;
}

std::string history_tail(const std::vector<double>& hist) {
  std::ostringstream os;
  const size_t n = hist.size();
  for (size_t i = n > 5 ? n - 5 : 0; i < n; ++i) os << (os.tellp() > 0 ? ", " : "") << hist[i];
  return os.str();
}

}  // namespace

UzawaResult uzawa_solve(const SystemBlocks& system, const RhsVector& rhs,
                        const CouplingMatrices& coupling, const DofLayout& layout,
                        const UzawaConfig& cfg, std::vector<VectorXd>* iterates) {
  if (!(cfg.rho > 0.0) || !(cfg.eps > 0.0) || cfg.maxIter < 1)
    throw EbemError(errc::config, "uzawa_solve: rho and eps must be positive, maxIter >= 1");
  const int dim = system.dim();
  const int N = coupling.nSteps;
  if (rhs.blockDim != dim || coupling.blockDim() != dim || rhs.nBlocks() != N ||
      system.nLags() != N)
    throw EbemError(errc::config, "uzawa_solve: system, rhs and coupling sizes disagree");
  const int nPsi2 = coupling.nPsi2, nU2 = coupling.nU2, nLam2 = coupling.nLam2;

  UzawaResult res;
  DiagonalFactorization fac = factorize(system.Sblock(0));

  auto finish = [&](const VectorXd& lambda) {
    VectorXd load = rhs.data;
    if (nLam2 > 0) load += coupling.applyMstar(lambda);
    res.X = march(system, fac, load);
    VectorXd r = load;
    for (int l = 0; l < N; ++l) {
      MatrixXd acc = MatrixXd::Zero(dim, 1);
      for (int j = 0; j <= l; ++j)
        system.applyS(j, res.X.segment(static_cast<long>(l - j) * dim, dim), acc);
      r.segment(static_cast<long>(l) * dim, dim) -= acc.col(0);
    }
    const double scale = std::max(load.norm(), 1e-300);
    res.residual = r.norm() / scale;
    res.Psi = VectorXd(static_cast<long>(N) * nPsi2);
    for (int l = 0; l < N; ++l)
      res.Psi.segment(static_cast<long>(l) * nPsi2, nPsi2) =
          res.X.segment(static_cast<long>(l) * dim, nPsi2);
    res.U = extract_trace(res.X, N, nPsi2, nU2);
    res.Lambda = lambda;
  };

  if (nLam2 == 0) {
    res.iterations = 1;
    finish(VectorXd());
    return res;
  }

  // Unconstrained part and the multiplier impulse bank. Column j of the bank
  // at shift k is the trace moment response at time block m+k to a unit
  // multiplier at (block m, dof j); one multi-column march covers all m.
  const VectorXd xFree = march(system, fac, rhs.data);
  VectorXd zBase;
  {
    const VectorXd uFree = extract_trace(xFree, N, nPsi2, nU2);
    zBase = coupling.applyMtilde(uFree - coupling.Gvec);
  }
  std::vector<MatrixXd> bank(N);
  {
    MatrixXd imp = MatrixXd::Zero(static_cast<long>(N) * dim, nLam2);
    imp.block(nPsi2, 0, nU2, nLam2) = coupling.Mspace.transpose();
    MatrixXd y = march(system, fac, imp);
    for (int k = 0; k < N; ++k)
      bank[k] = coupling.Mspace * y.block(static_cast<long>(k) * dim + nPsi2, 0, nU2, nLam2);
  }

  VectorXd lambda = VectorXd::Zero(static_cast<long>(N) * nLam2);
  VectorXd zResp(static_cast<long>(N) * nLam2);
  bool converged = false;
  int k = 0;
  while (k < cfg.maxIter) {
    ++k;
    // Trace moments of the multiplier response, then the ramp-vs-indicator
    // time weights (full for past blocks, half for the current one).
    VectorXd z = zBase;
    if (lambda.cwiseAbs().maxCoeff() > 0.0) {
      for (int l = 0; l < N; ++l) {
        auto seg = zResp.segment(static_cast<long>(l) * nLam2, nLam2);
        seg.setZero();
        for (int j = 0; j <= l; ++j)
          seg.noalias() += bank[l - j] * lambda.segment(static_cast<long>(j) * nLam2, nLam2);
      }
      VectorXd run = VectorXd::Zero(nLam2);
      for (int m = 0; m < N; ++m) {
        auto zr = zResp.segment(static_cast<long>(m) * nLam2, nLam2);
        z.segment(static_cast<long>(m) * nLam2, nLam2) += coupling.dt * (run + 0.5 * zr);
        run += zr;
      }
    }
    const VectorXd next = project_prC(lambda - cfg.rho * z, layout);
    const double diff = (next - lambda).norm();
    const double nn = next.norm();
    const double rel =
        diff == 0.0 ? 0.0 : (nn == 0.0 ? std::numeric_limits<double>::infinity() : diff / nn);
    res.history.push_back(rel);
    if (iterates) iterates->push_back(next);
    lambda = next;
    if (rel <= cfg.eps) {
      converged = true;
      break;
    }
    const size_t h = res.history.size();
    if (h > 20 && res.history[h - 1] > 10.0 * res.history[h - 21] &&
        std::isfinite(res.history[h - 21])) {
      std::ostringstream os;
      os << "uzawa_solve: diverging, relative update grew from " << res.history[h - 21]
         << " to " << res.history[h - 1] << " over 20 iterations; reduce rho";
      throw EbemError(errc::uzawa, os.str());
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "uzawa_solve: no convergence within " << cfg.maxIter
       << " iterations, last relative updates: " << history_tail(res.history);
    throw EbemError(errc::uzawa, os.str());
  }
  res.iterations = k;
  finish(lambda);
  return res;
}

}  // namespace ebem
