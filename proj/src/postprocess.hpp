#pragma once

#include <functional>
#include <string>
#include <vector>

#include "assembly.hpp"

namespace ebem {

// Nodal displacement history recovered from the ramp increment coefficients.
// Each ramp reaches 1 at the end of its step and stays there, so grid values
// are prefix sums of the increments; between grid times the field is linear.
struct DisplacementTrace {
  int nU = 0;
  int nSteps = 0;
  double dt = 0.0;
  MatrixXd nodal;  // 2*nU x (nSteps+1), row comp*nU + m, column k = value at t_k

  // Both displacement components of one spatial dof at time t (clamped to [0, T]).
  Vector2d at(int uDof, double t) const;
};

DisplacementTrace reconstruct_displacement(const VectorXd& U, const DofLayout& layout,
                                           const TimeGrid& grid);

// Trace field on an element: hat interpolation between the end nodes, with
// zero at nodes the layout dropped. s in [0,1] runs from seg().a to seg().b.
Vector2d trace_eval(const DisplacementTrace& tr, const BoundaryMesh& mesh,
                    const DofLayout& layout, int elem, double s, double t);

struct EnergyReport {
  double totalEnergy = 0.0;
  std::vector<double> cumulative;  // quadratic form of the leading k-block system, k = 0..nSteps
};

// X^T S X evaluated through the block lower triangular Toeplitz structure.
// cumulative[k] is the same form restricted to the first k time blocks, so
// the last entry equals totalEnergy.
EnergyReport energy(const SystemBlocks& system, const VectorXd& X);

using SpaceTimeField = std::function<Vector2d(const Vector2d& x, double t)>;
using TraceField = std::function<Vector2d(int elem, double s, double t)>;

// L2 norm of (numeric - exact) over the space-time boundary cylinder, by
// tensor Gauss quadrature on every element x time step cell.
double l2_spacetime_error(const TraceField& numeric, const SpaceTimeField& exact,
                          const BoundaryMesh& mesh, const TimeGrid& grid, int order = 4);

struct RichardsonFit {
  bool ok = false;
  double reference = 0.0;  // extrapolated limit
  double order = 0.0;      // fitted power of h
};

// Fit E(h) = E* + C h^p through samples at h, h/2, h/4. Refuses sequences
// whose consecutive differences change sign or vanish.
RichardsonFit richardson_reference(double Eh, double Eh2, double Eh4);

struct ConvergenceRow {
  double h = 0.0;
  double dt = 0.0;
  std::string quantity;
  double error = 0.0;
  double rate = 0.0;  // log2(error(2h)/error(h)); NaN on the coarsest row
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double reference = 0.0;
  double fittedOrder = 0.0;
};

struct InteriorSample {
  Vector2d u{0.0, 0.0};
  double distance = 0.0;  // from x to the nearest boundary point
};

// Representation formula u = V psi - K u at a point away from the boundary.
// The densities are piecewise constant (psi) and piecewise linear (u) in
// time, so the retarded time integrals reduce to differences of kernel
// antiderivatives and only the space integral needs quadrature. Accuracy
// degrades within about one element length of the boundary.
InteriorSample eval_interior(const Vector2d& x, double t, const VectorXd& Psi, const VectorXd& U,
                             const BoundaryMesh& mesh, const DofLayout& layout, const Material& mat,
                             const TimeGrid& grid, int gaussOrder = 8);

// One row per line, every value formatted %.17g so identical runs diff clean.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

}  // namespace ebem
