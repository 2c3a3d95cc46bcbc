#pragma once

#include <Eigen/Dense>

#include "tecd/errors.hpp"
#include "tecd/layout.hpp"

namespace tecd {

// Truncated straightened half-space: uniform nodes on [0, x1max] in the
// normal direction and a periodic unit torus tangentially. Points are
// stored x1-major.
struct Grid {
  int d = 2;
  int n1 = 128;        // cells in x1, nodes 0..n1
  double x1max = 8.0;
  int ntan = 32;       // nodes per tangential direction, even

  static Grid make(int dim, int cells, int tan_nodes, double xmax = 8.0) {
    Grid g;
    g.d = dim;
    g.n1 = cells;
    g.ntan = tan_nodes;
    g.x1max = xmax;
    g.validate();
    return g;
  }

  void validate() const {
    if (!valid_dim(d)) throw ConfigError("grid dimension must be 2 or 3");
    if (n1 < 8) throw ConfigError("need at least 8 cells in x1");
    if (ntan < 4 || ntan % 2 != 0) throw ConfigError("tangential nodes must be even and >= 4");
    if (!(x1max > 0.0)) throw ConfigError("x1max must be positive");
  }

  double h1() const { return x1max / n1; }
  double htan() const { return 1.0 / ntan; }
  int nx1() const { return n1 + 1; }
  int ntt() const { return d == 2 ? ntan : ntan * ntan; }
  int npoints() const { return nx1() * ntt(); }

  int pid(int i1, int it) const { return i1 * ntt() + it; }
  int it_of(int i2, int i3 = 0) const { return d == 2 ? i2 : i2 * ntan + i3; }

  double x1(int i1) const { return i1 * h1(); }
  double x2(int it) const { return (d == 2 ? it : it / ntan) * htan(); }
  double x3(int it) const { return (d == 2 ? 0 : it % ntan) * htan(); }

  // periodic tangential neighbor of a flattened tangential index
  int tan_shift(int it, int dir, int step) const {
    if (d == 2) {
      return ((it + step) % ntan + ntan) % ntan;
    }
    int i2 = it / ntan, i3 = it % ntan;
    if (dir == 2)
      i2 = ((i2 + step) % ntan + ntan) % ntan;
    else
      i3 = ((i3 + step) % ntan + ntan) % ntan;
    return i2 * ntan + i3;
  }

  // trapezoid in x1 (the fields of interest vanish at the outer edge),
  // exact uniform weights on the torus
  double quad_weight(int i1) const {
    const double w1 = (i1 == 0 || i1 == n1) ? 0.5 : 1.0;
    return w1 * h1() * std::pow(htan(), d - 1);
  }
};

// Multi-component grid function: one column per point, stored x1-major.
struct Field {
  Mat m;  // (ncomp, npoints)

  Field() = default;
  Field(int ncomp, const Grid& g) : m(Mat::Zero(ncomp, g.npoints())) {}

  int ncomp() const { return static_cast<int>(m.rows()); }
  auto col(int q) { return m.col(q); }
  auto col(int q) const { return m.col(q); }
};

using ScalarField = Eigen::ArrayXd;

// --------------------------------------------------------------------------
// Second-order stencils: centered in the interior, one-sided at the two
// x1 edges, centered periodic tangentially.
// --------------------------------------------------------------------------

inline Field deriv_x1(const Grid& g, const Field& f) {
  Field out(f.ncomp(), g);
  const double h = g.h1();
  for (int i1 = 0; i1 <= g.n1; ++i1)
    for (int it = 0; it < g.ntt(); ++it) {
      const int q = g.pid(i1, it);
      if (i1 == 0)
        out.m.col(q) = (-3.0 * f.m.col(g.pid(0, it)) + 4.0 * f.m.col(g.pid(1, it)) -
                        f.m.col(g.pid(2, it))) /
                       (2.0 * h);
      else if (i1 == g.n1)
        out.m.col(q) = (3.0 * f.m.col(g.pid(g.n1, it)) -
                        4.0 * f.m.col(g.pid(g.n1 - 1, it)) +
                        f.m.col(g.pid(g.n1 - 2, it))) /
                       (2.0 * h);
      else
        out.m.col(q) =
            (f.m.col(g.pid(i1 + 1, it)) - f.m.col(g.pid(i1 - 1, it))) / (2.0 * h);
    }
  return out;
}

inline Field deriv_tan(const Grid& g, const Field& f, int dir) {
  Field out(f.ncomp(), g);
  const double h = g.htan();
  for (int i1 = 0; i1 <= g.n1; ++i1)
    for (int it = 0; it < g.ntt(); ++it) {
      const int qp = g.pid(i1, g.tan_shift(it, dir, +1));
      const int qm = g.pid(i1, g.tan_shift(it, dir, -1));
      out.m.col(g.pid(i1, it)) = (f.m.col(qp) - f.m.col(qm)) / (2.0 * h);
    }
  return out;
}

inline ScalarField deriv_x1(const Grid& g, const ScalarField& f) {
  Field wrap(1, g);
  wrap.m.row(0) = f.matrix().transpose();
  return deriv_x1(g, wrap).m.row(0).transpose().array();
}

inline ScalarField deriv_tan(const Grid& g, const ScalarField& f, int dir) {
  Field wrap(1, g);
  wrap.m.row(0) = f.matrix().transpose();
  return deriv_tan(g, wrap, dir).m.row(0).transpose().array();
}

// Tangential-only arrays (boundary traces, front heights): length ntt.
inline Eigen::ArrayXd trace_deriv_tan(const Grid& g, const Eigen::ArrayXd& f, int dir) {
  Eigen::ArrayXd out(g.ntt());
  const double h = g.htan();
  for (int it = 0; it < g.ntt(); ++it)
    out(it) = (f(g.tan_shift(it, dir, +1)) - f(g.tan_shift(it, dir, -1))) / (2.0 * h);
  return out;
}

inline double l2_norm(const Grid& g, const Field& f) {
  double s = 0.0;
  for (int i1 = 0; i1 <= g.n1; ++i1) {
    const double w = g.quad_weight(i1);
    for (int it = 0; it < g.ntt(); ++it) s += w * f.m.col(g.pid(i1, it)).squaredNorm();
  }
  return std::sqrt(s);
}

inline double l2_norm_trace(const Grid& g, const Eigen::ArrayXd& f) {
  return std::sqrt(f.square().sum() * std::pow(g.htan(), g.d - 1));
}

}  // namespace tecd
