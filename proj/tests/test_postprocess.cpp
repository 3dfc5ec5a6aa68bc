#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "../src/kernels.hpp"
#include "../src/postprocess.hpp"
#include "../src/quadrature.hpp"
#include "doctest.h"

using namespace ebem;

namespace {

std::mt19937 gen(41);

double urand() {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  return U(gen);
}

VectorXd random_vec(int n) {
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = urand();
  return v;
}

MatrixXd random_mat(int r, int c) {
  MatrixXd A(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) A(i, j) = urand();
  return A;
}

SystemBlocks random_system(Formulation form, int nPsi2, int nU2, int nLags) {
  SystemBlocks S;
  S.form = form;
  S.nPsi2 = nPsi2;
  S.nU2 = nU2;
  S.M = random_mat(nPsi2, nU2);
  for (int l = 0; l < nLags; ++l) {
    S.V.push_back(random_mat(nPsi2, nPsi2));
    S.K.push_back(random_mat(nPsi2, nU2));
    if (form == Formulation::Symmetric) S.Wp.push_back(random_mat(nU2, nU2));
  }
  return S;
}

// geometric refinement toward every cut so that plain Gauss panels ride out
// the square-root kinks the wavefront circles leave behind
std::vector<double> graded_cuts(std::vector<double> cuts) {
  cuts.push_back(0.0);
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<double> out = cuts;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], w = cuts[i + 1] - cuts[i];
    for (int k = 1; k <= 20; ++k) {
      out.push_back(a + w * std::ldexp(1.0, -k));
      out.push_back(a + w * (1.0 - std::ldexp(1.0, -k)));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// open three-element mesh on the x axis with a Dirichlet middle piece
BoundaryMesh strip_mesh() {
  BoundaryMesh m;
  for (int i = 0; i <= 3; ++i) m.vertices.push_back(Vector2d(i, 0.0));
  for (int i = 0; i < 3; ++i) {
    MeshElement e;
    e.a = i;
    e.b = i + 1;
    e.tag = i == 1 ? Region::Dirichlet : Region::Neumann;
    m.elements.push_back(e);
  }
  m.finalize();
  return m;
}

}  // namespace

TEST_CASE("reconstruction turns increments into held ramps") {
  const BoundaryMesh mesh = build_preset_mesh(MeshPreset::Square, 0.5);
  const TimeGrid grid{1.0, 4};
  const DofLayout layout = build_dof_layout(mesh, grid);
  const int nU2 = 2 * layout.nU;

  SUBCASE("zero coefficients stay zero") {
    DisplacementTrace tr = reconstruct_displacement(VectorXd::Zero(nU2 * grid.nSteps), layout, grid);
    CHECK(tr.nodal.norm() == 0.0);
    CHECK(tr.at(3, 0.7).norm() == 0.0);
  }

  SUBCASE("a single increment rises over its step and then holds") {
    VectorXd U = VectorXd::Zero(nU2 * grid.nSteps);
    const int m = 3, comp = 1, block = 1;
    U[block * nU2 + comp * layout.nU + m] = 1.0;
    DisplacementTrace tr = reconstruct_displacement(U, layout, grid);
    CHECK(tr.at(m, 0.25)[comp] == doctest::Approx(0.0));
    CHECK(tr.at(m, 0.375)[comp] == doctest::Approx(0.5));
    CHECK(tr.at(m, 0.5)[comp] == doctest::Approx(1.0));
    CHECK(tr.at(m, 0.93)[comp] == doctest::Approx(1.0));
    CHECK(tr.at(m, 7.0)[comp] == doctest::Approx(1.0));  // clamped beyond T
    CHECK(tr.at(m, -2.0)[comp] == doctest::Approx(0.0));
    CHECK(tr.at(m, 0.8)[0] == 0.0);  // other component untouched
    CHECK(tr.at((m + 1) % layout.nU, 0.8).norm() == 0.0);
  }

  SUBCASE("reconstruction is linear") {
    const VectorXd U1 = random_vec(nU2 * grid.nSteps), U2 = random_vec(nU2 * grid.nSteps);
    DisplacementTrace a = reconstruct_displacement(U1 + 2.0 * U2, layout, grid);
    DisplacementTrace b1 = reconstruct_displacement(U1, layout, grid);
    DisplacementTrace b2 = reconstruct_displacement(U2, layout, grid);
    CHECK((a.nodal - b1.nodal - 2.0 * b2.nodal).norm() < 1e-12);
  }
}

TEST_CASE("trace evaluation interpolates hats and drops clamped nodes") {
  const TimeGrid grid{1.0, 2};

  SUBCASE("closed mesh: hat interpolation and continuity across vertices") {
    const BoundaryMesh mesh = build_preset_mesh(MeshPreset::Square, 0.5);
    const DofLayout layout = build_dof_layout(mesh, grid);
    const int nU2 = 2 * layout.nU;
    VectorXd U = VectorXd::Zero(nU2 * grid.nSteps);
    U.head(nU2) = random_vec(nU2);  // everything moves during the first step
    DisplacementTrace tr = reconstruct_displacement(U, layout, grid);

    const double t = 0.8;  // past the first step, displacement frozen
    for (int e = 0; e < mesh.nElements(); ++e) {
      const int da = layout.uDofOfVertex[mesh.elements[e].a];
      const int db = layout.uDofOfVertex[mesh.elements[e].b];
      const double s = 0.3;
      const Vector2d want = (1.0 - s) * tr.at(da, t) + s * tr.at(db, t);
      CHECK((trace_eval(tr, mesh, layout, e, s, t) - want).norm() < 1e-15);
      const int en = (e + 1) % mesh.nElements();
      CHECK((trace_eval(tr, mesh, layout, e, 1.0, t) - trace_eval(tr, mesh, layout, en, 0.0, t))
                .norm() < 1e-15);
    }
  }

  SUBCASE("vertices touching a Dirichlet element carry no hat") {
    const BoundaryMesh mesh = strip_mesh();
    const DofLayout layout = build_dof_layout(mesh, grid);
    REQUIRE(layout.nU == 2);  // only the outer endpoints survive
    CHECK(layout.uDofOfVertex[1] == -1);
    CHECK(layout.uDofOfVertex[2] == -1);

    const int nU2 = 2 * layout.nU;
    VectorXd U = VectorXd::Zero(nU2 * grid.nSteps);
    U.head(nU2) = random_vec(nU2);
    DisplacementTrace tr = reconstruct_displacement(U, layout, grid);
    const double t = 0.9;
    const int d0 = layout.uDofOfVertex[0];
    CHECK((trace_eval(tr, mesh, layout, 0, 0.25, t) - 0.75 * tr.at(d0, t)).norm() < 1e-15);
    CHECK(trace_eval(tr, mesh, layout, 1, 0.5, t).norm() == 0.0);
    CHECK(trace_eval(tr, mesh, layout, 0, 1.0, t).norm() == 0.0);
  }
}

TEST_CASE("energy equals the dense space-time quadratic form") {
  SUBCASE("zero vector has zero energy") {
    SystemBlocks S = random_system(Formulation::Symmetric, 3, 2, 2);
    EnergyReport rep = energy(S, VectorXd::Zero(3 * S.dim()));
    CHECK(rep.totalEnergy == 0.0);
    for (double c : rep.cumulative) CHECK(c == 0.0);
  }

  SUBCASE("hand-sized identity system") {
    SystemBlocks S;
    S.form = Formulation::Symmetric;
    S.nPsi2 = 1;
    S.nU2 = 1;
    S.M = MatrixXd::Zero(1, 1);
    S.V.push_back(MatrixXd::Identity(1, 1));
    S.K.push_back(MatrixXd::Zero(1, 1));
    S.Wp.push_back(-MatrixXd::Identity(1, 1));
    REQUIRE(S.Sblock(0).isApprox(MatrixXd::Identity(2, 2)));
    VectorXd X(2);
    X << 3.0, 4.0;
    EnergyReport rep = energy(S, X);
    CHECK(rep.totalEnergy == doctest::Approx(25.0));
    REQUIRE(rep.cumulative.size() == 2);
    CHECK(rep.cumulative[0] == 0.0);
    CHECK(rep.cumulative[1] == doctest::Approx(25.0));
  }

  for (Formulation form : {Formulation::Symmetric, Formulation::Nonsymmetric}) {
    CAPTURE(static_cast<int>(form));
    SystemBlocks S = random_system(form, 4, 3, 3);
    const int dim = S.dim();

    SUBCASE("as many blocks as lags") {
      const int nB = S.nLags();
      const VectorXd X = random_vec(nB * dim);
      const MatrixXd D = S.toToeplitz().dense();
      const double want = X.dot(D * X);
      EnergyReport rep = energy(S, X);
      CHECK(rep.totalEnergy == doctest::Approx(want).epsilon(1e-12));
      CHECK(rep.cumulative.back() == rep.totalEnergy);
      for (int k = 0; k <= nB; ++k) {
        const VectorXd lead = X.head(k * dim);
        const double wk = lead.dot(D.topLeftCorner(k * dim, k * dim) * lead);
        CHECK(rep.cumulative[k] == doctest::Approx(wk).epsilon(1e-12));
      }
    }

    SUBCASE("more blocks than lags pads with zero blocks") {
      const int nB = S.nLags() + 3;
      const VectorXd X = random_vec(nB * dim);
      BlockLowerToeplitz T = S.toToeplitz();
      while (T.nBlocks() < nB) T.blocks.push_back(MatrixXd::Zero(dim, dim));
      const double want = X.dot(T.dense() * X);
      EnergyReport rep = energy(S, X);
      CHECK(rep.totalEnergy == doctest::Approx(want).epsilon(1e-12));
      CHECK(rep.cumulative.size() == static_cast<size_t>(nB) + 1);
    }
  }
}

TEST_CASE("space-time L2 error handles exact matches and known offsets") {
  const BoundaryMesh mesh = build_preset_mesh(MeshPreset::Square, 0.5);
  const TimeGrid grid{1.0, 2};
  const SpaceTimeField exact = [](const Vector2d& x, double t) {
    return Vector2d(std::sin(x[0] + t), x[1] * t);
  };

  SUBCASE("sampling the exact field gives zero") {
    const TraceField numeric = [&](int e, double s, double t) {
      return Vector2d(exact(mesh.seg(e).at(s), t));
    };
    CHECK(l2_spacetime_error(numeric, exact, mesh, grid) < 1e-14);
  }

  SUBCASE("constant offset integrates to c * sqrt(|boundary| T)") {
    const double c = 0.3;
    const TraceField numeric = [&](int e, double s, double t) {
      return Vector2d(exact(mesh.seg(e).at(s), t) + Vector2d(c, 0.0));
    };
    CHECK(l2_spacetime_error(numeric, exact, mesh, grid) ==
          doctest::Approx(c * std::sqrt(mesh.totalLength() * grid.T)).epsilon(1e-13));
  }

  SUBCASE("linear-in-time offset matches the closed form") {
    const TraceField numeric = [&](int e, double s, double t) {
      return Vector2d(exact(mesh.seg(e).at(s), t) + Vector2d(0.0, t));
    };
    const double want = std::sqrt(mesh.totalLength() * grid.T * grid.T * grid.T / 3.0);
    CHECK(l2_spacetime_error(numeric, exact, mesh, grid) == doctest::Approx(want).epsilon(1e-13));
  }
}

TEST_CASE("richardson fit recovers power laws and refuses junk") {
  SUBCASE("first order") {
    RichardsonFit fit = richardson_reference(1.4, 1.2, 1.1);
    REQUIRE(fit.ok);
    CHECK(fit.order == doctest::Approx(1.0));
    CHECK(fit.reference == doctest::Approx(1.0));
  }
  SUBCASE("second order from below") {
    RichardsonFit fit = richardson_reference(5.0, 2.75, 2.1875);  // 2 + 3 h^2 at h = 1
    REQUIRE(fit.ok);
    CHECK(fit.order == doctest::Approx(2.0));
    CHECK(fit.reference == doctest::Approx(2.0));
  }
  SUBCASE("non-monotone sequences are rejected") {
    CHECK_FALSE(richardson_reference(1.0, 1.5, 1.2).ok);
    CHECK_FALSE(richardson_reference(1.0, 1.0, 1.0).ok);
    CHECK_FALSE(richardson_reference(2.0, 3.0, 5.0).ok);  // growing differences
  }
}

TEST_CASE("interior evaluation: causality, linearity and a single-layer oracle") {
  const BoundaryMesh mesh = build_preset_mesh(MeshPreset::Square, 0.5);
  const Material mat{1.0, 1.3, 0.8};
  const TimeGrid grid{1.0, 4};
  const DofLayout layout = build_dof_layout(mesh, grid);
  const int nPsi2 = 2 * layout.nPsi, nU2 = 2 * layout.nU;
  const Vector2d x(0.1, 0.2);

  SUBCASE("zero densities and distance to the boundary") {
    InteriorSample s = eval_interior(x, 0.9, VectorXd::Zero(nPsi2 * grid.nSteps),
                                     VectorXd::Zero(nU2 * grid.nSteps), mesh, layout, mat, grid);
    CHECK(s.u.norm() == 0.0);
    CHECK(s.distance == doctest::Approx(0.3));
    InteriorSample c = eval_interior(Vector2d(0.0, 0.0), 0.9, VectorXd::Zero(nPsi2 * grid.nSteps),
                                     VectorXd::Zero(nU2 * grid.nSteps), mesh, layout, mat, grid);
    CHECK(c.distance == doctest::Approx(0.5));
  }

  SUBCASE("nothing arrives before the first wavefront") {
    const VectorXd Psi = random_vec(nPsi2 * grid.nSteps), U = random_vec(nU2 * grid.nSteps);
    const double tooEarly = 0.9 * 0.3 / mat.cP;  // distance 0.3 at speed cP
    InteriorSample s = eval_interior(x, tooEarly, Psi, U, mesh, layout, mat, grid);
    CHECK(s.u.norm() == 0.0);
  }

  SUBCASE("the map is linear in both densities") {
    const VectorXd P1 = random_vec(nPsi2 * grid.nSteps), P2 = random_vec(nPsi2 * grid.nSteps);
    const VectorXd U1 = random_vec(nU2 * grid.nSteps), U2 = random_vec(nU2 * grid.nSteps);
    const double t = 0.9;
    const Vector2d a = eval_interior(x, t, 2.0 * P1 + P2, 2.0 * U1 + U2, mesh, layout, mat, grid).u;
    const Vector2d b1 = eval_interior(x, t, P1, U1, mesh, layout, mat, grid).u;
    const Vector2d b2 = eval_interior(x, t, P2, U2, mesh, layout, mat, grid).u;
    CHECK((a - 2.0 * b1 - b2).norm() < 1e-12);
  }

  SUBCASE("constant-in-time density telescopes to one kernel antiderivative") {
    // psi = e_comp on element e0 for the whole window; the level differences
    // collapse and the potential is the spatial integral of G^(1) at time t.
    const double t = 0.9;
    for (int comp = 0; comp < 2; ++comp) {
      const int e0 = 2;
      VectorXd Psi = VectorXd::Zero(nPsi2 * grid.nSteps);
      for (int l = 0; l < grid.nSteps; ++l)
        for (int loc = 0; loc < 2; ++loc) Psi[l * nPsi2 + comp * layout.nPsi + 2 * e0 + loc] = 1.0;
      const Vector2d got =
          eval_interior(x, t, Psi, VectorXd::Zero(nU2 * grid.nSteps), mesh, layout, mat, grid, 16)
              .u;

      const Seg sg = mesh.seg(e0);
      std::vector<double> cuts;
      circle_crossings(x, sg, mat.cP * t, cuts);
      circle_crossings(x, sg, mat.cS * t, cuts);
      const QuadratureRule fine = gauss_rule(24);
      Vector2d want = Vector2d::Zero();
      for (int r = 0; r < 2; ++r) {
        want[r] = sg.len() * integrate_1d(
                                 [&](double b) {
                                   return kernelV_level(mat, x - sg.at(b), t, 1)(r, comp);
                                 },
                                 0.0, 1.0, fine, graded_cuts(cuts));
      }
      CHECK((got - want).norm() < 1e-8 * std::max(1.0, want.norm()));
    }
  }

  SUBCASE("single displacement block reproduces the double-layer level difference") {
    const double t = 0.9, dt = grid.dt();
    VectorXd U = VectorXd::Zero(nU2 * grid.nSteps);
    U.head(nU2) = random_vec(nU2);
    const Vector2d got =
        eval_interior(x, t, VectorXd::Zero(nPsi2 * grid.nSteps), U, mesh, layout, mat, grid, 16).u;

    const QuadratureRule fine = gauss_rule(24);
    Vector2d want = Vector2d::Zero();
    for (int e = 0; e < mesh.nElements(); ++e) {
      const Seg sg = mesh.seg(e);
      const Vector2d ny = mesh.elements[e].normal;
      const int da = layout.uDofOfVertex[mesh.elements[e].a];
      const int db = layout.uDofOfVertex[mesh.elements[e].b];
      std::vector<double> cuts;
      for (double s : {t, t - dt})
        for (double c : {mat.cP, mat.cS}) circle_crossings(x, sg, c * s, cuts);
      for (int r = 0; r < 2; ++r) {
        want[r] -= sg.len() / dt *
                   integrate_1d(
                       [&](double b) {
                         const Matrix2d D = kernelK_level(mat, x - sg.at(b), ny, t, 2) -
                                            kernelK_level(mat, x - sg.at(b), ny, t - dt, 2);
                         Vector2d u;
                         for (int comp = 0; comp < 2; ++comp)
                           u[comp] = (da >= 0 ? (1.0 - b) * U[comp * layout.nU + da] : 0.0) +
                                     (db >= 0 ? b * U[comp * layout.nU + db] : 0.0);
                         return (D * u)[r];
                       },
                       0.0, 1.0, fine, graded_cuts(cuts));
      }
    }
    CHECK((got - want).norm() < 1e-8 * std::max(1.0, want.norm()));
  }
}

TEST_CASE("csv writer emits full-precision values and reports io failures") {
  const std::string path = "/tmp/ebem_pp_table.csv";
  write_table_csv(path, {"t", "value"}, {{0.1, 1.0 / 3.0}, {2.0, -4.5e-13}});
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  char l1[96], l2[96];
  std::snprintf(l1, sizeof l1, "%.17g,%.17g", 0.1, 1.0 / 3.0);
  std::snprintf(l2, sizeof l2, "%.17g,%.17g", 2.0, -4.5e-13);
  CHECK(ss.str() == std::string("t,value\n") + l1 + "\n" + l2 + "\n");
  std::remove(path.c_str());

  try {
    write_table_csv("/nonexistent-dir/x.csv", {"a"}, {{1.0}});
    FAIL("expected an io error");
  } catch (const EbemError& err) {
    CHECK(err.category == errc::io);
  }
}
