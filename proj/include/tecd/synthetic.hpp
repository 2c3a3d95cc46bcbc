#pragma once

#include <cstdint>

#include "tecd/linearized.hpp"

namespace tecd {

// --------------------------------------------------------------------------
// Closed-form test fields. Everything here is analytic so that operator
// checks can separate stencil truncation from modeling errors.
// --------------------------------------------------------------------------

// One smooth scalar mode amp * bump(x1) * trig(x') * sin(omega t). The
// envelope is a Gaussian: derivative constants stay modest, so stencil
// truncation reaches its asymptotic rate on coarse grids already.
struct SyntheticMode {
  double amp = 0.0;
  double x1_center = 1.5, x1_width = 1.0;
  int k2 = 1, k3 = 0;
  int phase2 = 0, phase3 = 0;  // 0 = cos, 1 = sin
  double omega = 1.0;

  double bump(double x1) const {
    const double s = (x1 - x1_center) / x1_width;
    return std::exp(-s * s);
  }
  double bump_d(double x1) const {
    const double s = (x1 - x1_center) / x1_width;
    return -2.0 * s / x1_width * std::exp(-s * s);
  }
  static double trig(int phase, double t) {
    return phase == 0 ? std::cos(t) : std::sin(t);
  }
  static double trig_d(int phase, double t) {
    return phase == 0 ? -std::sin(t) : std::cos(t);
  }

  // value and (t, x1, x2, x3) derivatives at one point
  Jet eval(double t, double x1, double x2, double x3, int d) const {
    const double b = bump(x1);
    double tr2 = trig(phase2, 2.0 * M_PI * k2 * x2);
    double tr3 = d == 3 ? trig(phase3, 2.0 * M_PI * k3 * x3) : 1.0;
    const double st = std::sin(omega * t);
    Jet j;
    j.v = amp * b * tr2 * tr3 * st;
    j.d(0) = amp * b * tr2 * tr3 * omega * std::cos(omega * t);
    j.d(1) = amp * bump_d(x1) * tr2 * tr3 * st;
    j.d(2) = amp * b * 2.0 * M_PI * k2 * trig_d(phase2, 2.0 * M_PI * k2 * x2) * tr3 * st;
    if (d == 3)
      j.d(3) = amp * b * tr2 * 2.0 * M_PI * k3 *
               trig_d(phase3, 2.0 * M_PI * k3 * x3) * st;
    return j;
  }
};

// Deterministic random modes for every component of a linear field.
struct SyntheticField {
  std::vector<std::vector<SyntheticMode>> comp_modes;  // per component
  int d = 2;

  // anchored fields put mass on the wall so boundary operators see data
  static SyntheticField random(int d, int ncomp, std::uint64_t seed,
                               double amp = 1.0, bool anchored = false) {
    SyntheticField sf;
    sf.d = d;
    std::uint64_t state = seed ^ 0x9e3779b97f4a7c15ull;
    auto next = [&]() {
      state ^= state >> 12;
      state ^= state << 25;
      state ^= state >> 27;
      return state * 0x2545f4914f6cdd1dull;
    };
    auto uni = [&](double lo, double hi) {
      return lo + (hi - lo) * (static_cast<double>(next() >> 11) * 0x1.0p-53);
    };
    sf.comp_modes.resize(ncomp);
    for (int c = 0; c < ncomp; ++c) {
      const int nm = 1 + static_cast<int>(next() % 2);
      for (int m = 0; m < nm; ++m) {
        SyntheticMode md;
        md.amp = amp * uni(-1.0, 1.0);
        md.x1_center = anchored ? uni(-0.2, 0.5) : uni(1.5, 2.1);
        md.x1_width = anchored ? uni(0.8, 1.2) : uni(0.7, 1.0);
        md.k2 = 1 + static_cast<int>(next() % 2);
        md.k3 = 1 + static_cast<int>(next() % 2);
        md.phase2 = static_cast<int>(next() % 2);
        md.phase3 = static_cast<int>(next() % 2);
        md.omega = uni(0.5, 2.0);
        sf.comp_modes[c].push_back(md);
      }
    }
    return sf;
  }

  Jet eval(int comp, double t, double x1, double x2, double x3) const {
    Jet j;
    for (const auto& m : comp_modes[comp]) {
      const Jet e = m.eval(t, x1, x2, x3, d);
      j.v += e.v;
      j.d += e.d;
    }
    return j;
  }

  // sample values and the time derivative on a grid at time t
  void sample(const Grid& g, double t, Field& value, Field& dt) const {
    const int nc = static_cast<int>(comp_modes.size());
    value = Field(nc, g);
    dt = Field(nc, g);
    for (int i1 = 0; i1 <= g.n1; ++i1)
      for (int it = 0; it < g.ntt(); ++it) {
        const int q = g.pid(i1, it);
        for (int c = 0; c < nc; ++c) {
          const Jet j = eval(c, t, g.x1(i1), g.x2(it), g.x3(it));
          value.m(c, q) = j.v;
          dt.m(c, q) = j.d(0);
        }
      }
  }
};

// random front perturbation with closed-form derivatives
struct SyntheticFront {
  double amp = 0.0;
  int k2 = 1, k3 = 1;
  double omega = 1.3;

  void sample(const Grid& g, double t, Eigen::ArrayXd& psi,
              Eigen::ArrayXd& dpsi_dt) const {
    psi.resize(g.ntt());
    dpsi_dt.resize(g.ntt());
    for (int it = 0; it < g.ntt(); ++it) {
      double s = std::cos(2.0 * M_PI * k2 * g.x2(it));
      if (g.d == 3) s += std::sin(2.0 * M_PI * k3 * g.x3(it));
      psi(it) = amp * s * std::sin(omega * t);
      dpsi_dt(it) = amp * s * omega * std::cos(omega * t);
    }
  }
};

// --------------------------------------------------------------------------
// Initial data whose linearized involution residuals vanish identically in
// the continuum: deformation columns from a potential and the pressure
// balancing the linearized divergence. Built at the exact interface state.
// --------------------------------------------------------------------------

inline void involution_clean_data(const BasicState& bs, double amplitude,
                                  Field& Wplus, Field& Wminus) {
  const Grid& g = bs.g;
  const int d = g.d;
  const Layout L(d);
  if (bs.K != 0.0)
    throw ConfigError("clean data construction assumes the exact interface state");

  for (int s = 0; s < 2; ++s) {
    const int side = s == 0 ? +1 : -1;
    const double rho = s == 0 ? bs.bg.rho_plus : bs.bg.rho_minus;
    const double c = s == 0 ? bs.bg.c_plus : bs.bg.c_minus;
    const Eigen::VectorXd stretch =
        s == 0 ? bs.bg.stretch_plus : bs.bg.stretch_minus;
    const double sgn = side;  // d1 with respect to the straightened normal

    // potentials w_i, one per row of F
    std::vector<SyntheticMode> w(d);
    for (int i = 0; i < d; ++i) {
      w[i].amp = amplitude * (0.6 + 0.2 * i) * (s == 0 ? 1.0 : -0.8);
      w[i].x1_center = 2.2 + 0.2 * i;
      w[i].x1_width = 0.5;
      w[i].k2 = 1 + (i % 2);
      w[i].k3 = 1;
      w[i].phase2 = i % 2;
      w[i].omega = 1.0;  // evaluated at the quarter period below
    }
    const double t0 = 0.5 * M_PI;  // sin = 1, so the data are nontrivial

    Field V(L.n(), g);
    for (int i1 = 0; i1 <= g.n1; ++i1)
      for (int it = 0; it < g.ntt(); ++it) {
        const int q = g.pid(i1, it);
        const double x1 = g.x1(i1), x2 = g.x2(it), x3 = g.x3(it);
        for (int i = 1; i <= d; ++i) {
          const Jet ji = w[i - 1].eval(t0, x1, x2, x3, d);
          // F_i1 = F11 * d1^Phi w_i, F_ij = Fjj * dj w_i
          V.m(L.F(i, 1), q) = stretch(0) * sgn * ji.d(1);
          for (int j = 2; j <= d; ++j)
            V.m(L.F(i, j), q) = stretch(j - 1) * ji.d(j);
        }
        // linearized divergence balance: p = -rho c^2 sum_i di^Phi w_i
        double divphi = 0.0;
        for (int i = 1; i <= d; ++i) {
          const Jet ji = w[i - 1].eval(t0, x1, x2, x3, d);
          divphi += i == 1 ? sgn * ji.d(1) : ji.d(i);
        }
        V.m(L.p(), q) = -rho * c * c * divphi;
        // free smooth velocity, entropy left at zero
        const Jet jv = w[0].eval(t0, x1, x2, x3, d);
        V.m(L.v(1), q) = 0.5 * amplitude * jv.v;
        V.m(L.v(2), q) = -0.3 * amplitude * jv.v;
      }

    Field W = to_W(V, bs, side);
    if (s == 0)
      Wplus = W;
    else
      Wminus = W;
  }
}

}  // namespace tecd
