#pragma once

#include <functional>
#include <utility>

#include "common.hpp"

namespace ebem {

struct QuadratureRule {
  std::vector<double> nodes;    // in (0,1)
  std::vector<double> weights;  // sum to 1
  int order() const { return static_cast<int>(nodes.size()); }
};

// Gauss-Legendre rule with `order` points mapped to [0,1].
QuadratureRule gauss_rule(int order);

struct Seg {
  Vector2d a, b;
  Vector2d at(double s) const { return a + s * (b - a); }
  double len() const { return (b - a).norm(); }
  Vector2d tangent() const { return (b - a).normalized(); }
};

struct PanelSplit {
  std::vector<double> breakpoints;  // strictly increasing, inside (0,1)
};

// Parameters s in (0,1) with |p - seg.at(s)| = R, appended to out.
void circle_crossings(const Vector2d& p, const Seg& seg, double R, std::vector<double>& out);

// Breakpoints where the distance from a fixed point set on one element to the
// other element crosses a critical radius; near-singular pairs additionally get
// the projection of the closest points. Returns (outer split, inner split).
std::pair<PanelSplit, PanelSplit> split_at_wavefronts(const Seg& outer, const Seg& inner,
                                                      const std::vector<double>& radii,
                                                      const QuadratureRule& rule);

// f(x, y, alpha, beta, weight, acc): accumulate weight * integrand into acc[0..nout).
using PairIntegrand =
    std::function<void(const Vector2d&, const Vector2d&, double, double, double, double*)>;

struct PairQuadResult {
  bool converged = true;
  double errorEstimate = 0.0;
};

// Double integral over outer x inner element of f against the arclength measure.
// Coincident pairs (same segment) reduce to a graded 1D scheme in u = |alpha-beta|
// (uBreaks: kink locations in u, e.g. wavefront radius / element length);
// pairs sharing a vertex integrate over geometrically graded rings around it;
// everything else uses tensor panels with adaptive halving (depth <= maxDepth).
PairQuadResult integrate_pair(const PairIntegrand& f, int nout, const Seg& ex, const Seg& ey,
                              const QuadratureRule& rule, const PanelSplit& sx,
                              const PanelSplit& sy, double* out, double relTol = 1e-8,
                              int maxDepth = 12, const std::vector<double>& uBreaks = {});

// 1D composite Gauss over [a,b] with interior breakpoints.
double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    const QuadratureRule& rule, const std::vector<double>& breakpoints = {});

}  // namespace ebem
