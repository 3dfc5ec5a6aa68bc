#include "quadrature.hpp"

#include <algorithm>
#include <array>

namespace ebem {

QuadratureRule gauss_rule(int order) {
  if (order < 1) throw std::invalid_argument("gauss_rule: order >= 1 required");
  QuadratureRule r;
  r.nodes.resize(order);
  r.weights.resize(order);
  const int n = order;
  for (int k = 0; k < (n + 1) / 2; ++k) {
    double x = std::cos(PI * (k + 0.75) / (n + 0.5));  // guess for ascending roots
    double p1 = 0.0;
    for (int it = 0; it < 100; ++it) {
      p1 = 1.0;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * x * p2 - j * p3) / (j + 1.0);
      }
      double dp = n * (x * p1 - p2) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p2 = 0.0;
    {
      p1 = 1.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * x * p2 - j * p3) / (j + 1.0);
      }
    }
    double dp = n * (x * p1 - p2) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[k] = 0.5 * (1.0 - x);
    r.nodes[n - 1 - k] = 0.5 * (1.0 + x);
    r.weights[k] = 0.5 * w;
    r.weights[n - 1 - k] = 0.5 * w;
  }
  return r;
}

void circle_crossings(const Vector2d& p, const Seg& seg, double R, std::vector<double>& out) {
  const Vector2d d = seg.b - seg.a;
  const Vector2d m = seg.a - p;
  const double A = d.squaredNorm();
  const double B = 2.0 * m.dot(d);
  const double C = m.squaredNorm() - R * R;
  const double disc = B * B - 4.0 * A * C;
  if (disc <= 0.0 || A == 0.0) return;
  const double sq = std::sqrt(disc);
  for (double s : {(-B - sq) / (2.0 * A), (-B + sq) / (2.0 * A)}) {
    if (s > 1e-12 && s < 1.0 - 1e-12) out.push_back(s);
  }
}

namespace {

void add_projection(const Vector2d& p, const Seg& seg, std::vector<double>& out) {
  const Vector2d d = seg.b - seg.a;
  const double s = (p - seg.a).dot(d) / d.squaredNorm();
  if (s > 1e-12 && s < 1.0 - 1e-12) out.push_back(s);
}

void finalize(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end(),
                      [](double a, double b) { return std::abs(a - b) < 1e-10; }),
          v.end());
}

double seg_distance(const Seg& s1, const Seg& s2) {
  double d = std::numeric_limits<double>::max();
  auto pointSeg = [](const Vector2d& p, const Seg& s) {
    const Vector2d e = s.b - s.a;
    double t = std::clamp((p - s.a).dot(e) / e.squaredNorm(), 0.0, 1.0);
    return (p - s.at(t)).norm();
  };
  d = std::min(d, pointSeg(s1.a, s2));
  d = std::min(d, pointSeg(s1.b, s2));
  d = std::min(d, pointSeg(s2.a, s1));
  d = std::min(d, pointSeg(s2.b, s1));
  for (double t : {0.25, 0.5, 0.75}) d = std::min(d, pointSeg(s1.at(t), s2));
  return d;
}

}  // namespace

std::pair<PanelSplit, PanelSplit> split_at_wavefronts(const Seg& outer, const Seg& inner,
                                                      const std::vector<double>& radii,
                                                      const QuadratureRule& rule) {
  PanelSplit so, si;
  const bool near = seg_distance(outer, inner) < 0.25 * std::min(outer.len(), inner.len());
  std::vector<Vector2d> outerPts = {outer.a, outer.b};
  for (double s : rule.nodes) outerPts.push_back(outer.at(s));
  for (const Vector2d& p : outerPts) {
    for (double R : radii) circle_crossings(p, inner, R, si.breakpoints);
    if (near) add_projection(p, inner, si.breakpoints);
  }
  for (const Vector2d& p : {inner.a, inner.b}) {
    for (double R : radii) circle_crossings(p, outer, R, so.breakpoints);
    if (near) add_projection(p, outer, so.breakpoints);
  }
  finalize(so.breakpoints);
  finalize(si.breakpoints);
  return {so, si};
}

namespace {

struct Accum {
  std::vector<double> v;
  explicit Accum(int n) : v(n, 0.0) {}
  void reset() { std::fill(v.begin(), v.end(), 0.0); }
};

// Plain tensor Gauss on [ax0,ax1] x [ay0,ay1].
void tensor_cell(const PairIntegrand& f, int nout, const Seg& ex, const Seg& ey,
                 const QuadratureRule& rule, double ax0, double ax1, double ay0, double ay1,
                 double jac, double* acc) {
  const int n = rule.order();
  for (int i = 0; i < n; ++i) {
    const double al = ax0 + (ax1 - ax0) * rule.nodes[i];
    const Vector2d x = ex.at(al);
    const double wi = rule.weights[i] * (ax1 - ax0);
    for (int j = 0; j < n; ++j) {
      const double be = ay0 + (ay1 - ay0) * rule.nodes[j];
      const Vector2d y = ey.at(be);
      const double w = wi * rule.weights[j] * (ay1 - ay0) * jac;
      f(x, y, al, be, w, acc);
    }
  }
}

struct AdaptState {
  const PairIntegrand* f;
  int nout;
  const Seg *ex, *ey;
  const QuadratureRule* rule;
  double jac;
  double relTol;
  int maxDepth;
  double scale = 0.0;
  double errAccum = 0.0;
  bool converged = true;
};

void adapt_cell(AdaptState& st, double ax0, double ax1, double ay0, double ay1, int depth,
                const double* coarse, double* out) {
  std::vector<double> kids(st.nout, 0.0);
  const double mx = 0.5 * (ax0 + ax1), my = 0.5 * (ay0 + ay1);
  std::vector<double> q[4];
  const double xs[4][2] = {{ax0, mx}, {mx, ax1}, {ax0, mx}, {mx, ax1}};
  const double ys[4][2] = {{ay0, my}, {ay0, my}, {my, ay1}, {my, ay1}};
  for (int k = 0; k < 4; ++k) {
    q[k].assign(st.nout, 0.0);
    tensor_cell(*st.f, st.nout, *st.ex, *st.ey, *st.rule, xs[k][0], xs[k][1], ys[k][0], ys[k][1],
                st.jac, q[k].data());
    for (int i = 0; i < st.nout; ++i) kids[i] += q[k][i];
  }
  double err = 0.0;
  for (int i = 0; i < st.nout; ++i) err = std::max(err, std::abs(kids[i] - coarse[i]));
  const double ref = std::max(st.scale, 1e-300);
  if (err <= st.relTol * ref || depth >= st.maxDepth) {
    for (int i = 0; i < st.nout; ++i) out[i] += kids[i];
    st.errAccum += err;
    if (err > 1e-6 * ref && depth >= st.maxDepth) st.converged = false;
    return;
  }
  for (int k = 0; k < 4; ++k)
    adapt_cell(st, xs[k][0], xs[k][1], ys[k][0], ys[k][1], depth + 1, q[k].data(), out);
}

std::vector<double> panel_edges(const PanelSplit& s) {
  std::vector<double> e;
  e.push_back(0.0);
  for (double b : s.breakpoints) e.push_back(b);
  e.push_back(1.0);
  return e;
}

}  // namespace

PairQuadResult integrate_pair(const PairIntegrand& f, int nout, const Seg& ex, const Seg& ey,
                              const QuadratureRule& rule, const PanelSplit& sx,
                              const PanelSplit& sy, double* out, double relTol, int maxDepth,
                              const std::vector<double>& uBreaks) {
  std::fill(out, out + nout, 0.0);
  const double jac = ex.len() * ey.len();
  PairQuadResult res;

  // Cosine-mapped rule: quadratic node clustering at both cell ends removes
  // sqrt-type kinks sitting on cell edges (wavefronts after panel splitting).
  QuadratureRule mapped;
  mapped.nodes.resize(rule.order());
  mapped.weights.resize(rule.order());
  for (int i = 0; i < rule.order(); ++i) {
    mapped.nodes[i] = 0.5 * (1.0 - std::cos(PI * rule.nodes[i]));
    mapped.weights[i] = rule.weights[i] * 0.5 * PI * std::sin(PI * rule.nodes[i]);
  }

  const bool coincident = (ex.a - ey.a).norm() < 1e-14 && (ex.b - ey.b).norm() < 1e-14;
  const bool shareA = ((ex.a - ey.a).norm() < 1e-14 || (ex.a - ey.b).norm() < 1e-14);
  const bool shareB = ((ex.b - ey.a).norm() < 1e-14 || (ex.b - ey.b).norm() < 1e-14);

  if (coincident) {
    // Reduce over u = beta - alpha; both orientations sampled so odd principal
    // value parts cancel within each cell. Geometric grading toward u = 0.
    std::vector<double> kinks;
    for (double u : uBreaks)
      if (u > 1e-12 && u < 1.0 - 1e-12) kinks.push_back(u);
    std::sort(kinks.begin(), kinks.end());
    std::vector<double> edges;
    const double u0 = 1e-14;
    double g = kinks.empty() ? 1.0 : kinks.front();
    edges.push_back(g);
    while (g > u0) {
      g *= 0.25;
      edges.push_back(g);
    }
    for (double u : kinks) edges.push_back(u);
    edges.push_back(1.0);
    finalize(edges);
    const auto fine = gauss_rule(std::max(16, 2 * rule.order()));
    QuadratureRule fineMap;
    fineMap.nodes.resize(fine.order());
    fineMap.weights.resize(fine.order());
    for (int i = 0; i < fine.order(); ++i) {
      fineMap.nodes[i] = 0.5 * (1.0 - std::cos(PI * fine.nodes[i]));
      fineMap.weights[i] = fine.weights[i] * 0.5 * PI * std::sin(PI * fine.nodes[i]);
    }
    std::vector<double> acc(nout, 0.0);
    const Vector2d dvec = ey.b - ey.a;
    for (size_t c = 0; c + 1 < edges.size(); ++c) {
      const double ua = edges[c], ub = edges[c + 1];
      for (int i = 0; i < fine.order(); ++i) {
        const double u = ua + (ub - ua) * fineMap.nodes[i];
        const double wu = fineMap.weights[i] * (ub - ua);
        for (int j = 0; j < fine.order(); ++j) {
          const double v = (1.0 - u) * fine.nodes[j];
          const double wv = fine.weights[j] * (1.0 - u);
          const double w = wu * wv * jac;
          const Vector2d p = ex.at(v), q = p + u * dvec;
          f(p, q, v, v + u, w, acc.data());
          f(q, p, v + u, v, w, acc.data());
        }
      }
    }
    std::copy(acc.begin(), acc.end(), out);
    return res;
  }

  AdaptState st{&f, nout, &ex, &ey, &mapped, jac, relTol, maxDepth};

  auto edges = [](const PanelSplit& s, int corner) {
    std::vector<double> e = panel_edges(s);
    if (corner >= 0) {
      // geometric stack toward the shared vertex; r stays > 0 at quad nodes
      std::vector<double> add;
      double lo = 1.0;
      for (double b : e)
        if (corner == 0 ? b > 1e-13 : b < 1.0 - 1e-13)
          lo = std::min(lo, corner == 0 ? b : 1.0 - b);
      double g = lo;
      while (g > 1e-14) {
        g *= 0.25;
        add.push_back(corner == 0 ? g : 1.0 - g);
      }
      e.insert(e.end(), add.begin(), add.end());
      finalize(e);
      if (e.front() != 0.0) e.insert(e.begin(), 0.0);
      if (e.back() != 1.0) e.push_back(1.0);
    }
    return e;
  };

  int cornerX = -1, cornerY = -1;
  if (shareA || shareB) {
    cornerX = ((ex.a - ey.a).norm() < 1e-14 || (ex.a - ey.b).norm() < 1e-14) ? 0 : 1;
    const Vector2d shared = (cornerX == 0) ? ex.a : ex.b;
    cornerY = (shared - ey.a).norm() < 1e-14 ? 0 : 1;
  }
  const auto ev = edges(sx, cornerX);
  const auto eu = edges(sy, cornerY);

  std::vector<double> coarse(nout, 0.0);
  std::vector<std::vector<double>> cellVals;
  for (size_t i = 0; i + 1 < ev.size(); ++i)
    for (size_t j = 0; j + 1 < eu.size(); ++j) {
      std::vector<double> c(nout, 0.0);
      tensor_cell(f, nout, ex, ey, mapped, ev[i], ev[i + 1], eu[j], eu[j + 1], jac, c.data());
      for (int k = 0; k < nout; ++k) coarse[k] += c[k];
      cellVals.push_back(std::move(c));
    }
  for (int k = 0; k < nout; ++k) st.scale = std::max(st.scale, std::abs(coarse[k]));
  size_t idx = 0;
  for (size_t i = 0; i + 1 < ev.size(); ++i)
    for (size_t j = 0; j + 1 < eu.size(); ++j)
      adapt_cell(st, ev[i], ev[i + 1], eu[j], eu[j + 1], 0, cellVals[idx++].data(), out);
  res.converged = st.converged;
  res.errorEstimate = st.errAccum;
  return res;
}

double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    const QuadratureRule& rule, const std::vector<double>& breakpoints) {
  std::vector<double> edges;
  edges.push_back(a);
  for (double s : breakpoints)
    if (s > a + 1e-14 && s < b - 1e-14) edges.push_back(s);
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  double acc = 0.0;
  for (size_t c = 0; c + 1 < edges.size(); ++c) {
    const double lo = edges[c], hi = edges[c + 1];
    for (int i = 0; i < rule.order(); ++i)
      acc += rule.weights[i] * (hi - lo) * f(lo + (hi - lo) * rule.nodes[i]);
  }
  return acc;
}

}  // namespace ebem
