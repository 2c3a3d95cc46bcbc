#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "tecd/constitutive.hpp"
#include "tecd/hyperbolic.hpp"

namespace tecd {

// Traces of the two states on the moving interface together with the front
// geometry. No consistency is imposed at construction; the residual
// operations below measure whatever violations are present.
struct JumpState {
  ThermoState plus;
  ThermoState minus;
  FrontGeometry front;

  double mass_flux(int side) const {
    const ThermoState& st = side >= 0 ? plus : minus;
    const Eigen::VectorXd N = front.normal();
    return density_from_F<double>(st.F) * (front.dt_phi - st.v.dot(N));
  }
};

// phi = 0 piecewise-constant contact interface: diagonal stretches with a
// normal-stretch jump balanced by the pressure jump.
struct BackgroundState {
  MaterialParams params;
  Eigen::VectorXd stretch_plus;   // diag of F+ (F11+, F22, ..., Fdd)
  Eigen::VectorXd stretch_minus;  // same tangential stretches, smaller F11
  double S_plus = 0.0;
  double S_minus = 0.0;
  double rho_plus = 0.0, rho_minus = 0.0;
  double p_plus = 0.0, p_minus = 0.0;
  double c_plus = 0.0, c_minus = 0.0;

  ThermoState state(int side) const {
    ThermoState st;
    st.v = Eigen::VectorXd::Zero(params.d);
    st.F = (side >= 0 ? stretch_plus : stretch_minus).asDiagonal();
    st.S = side >= 0 ? S_plus : S_minus;
    st.p = side >= 0 ? p_plus : p_minus;
    return st;
  }

  JumpState traces() const {
    return {state(+1), state(-1), FrontGeometry::flat(params.d)};
  }
};

// --------------------------------------------------------------------------
// Jump-condition residuals
// --------------------------------------------------------------------------

// Stacked residuals: mass, momentum (d), energy, deformation transport
// (d^2), normal-trace continuity (d), and the antisymmetric compatibility
// jumps (d^2 (d-1)/2 independent pairs j < k). Zero iff the traces form a
// weak-solution interface.
inline Vec rh_residual(const JumpState& js, const MaterialParams& mp) {
  const int d = mp.d;
  const Eigen::VectorXd N = js.front.normal();

  struct Side {
    double rho, mN, p, vN, eps;
    Eigen::VectorXd v, FN;  // FN(j) = F_j . N
    Mat F;
  };
  auto build = [&](const ThermoState& st) {
    Side s;
    s.rho = density_from_F<double>(st.F);
    s.v = st.v;
    s.F = st.F;
    s.p = st.p;
    s.vN = st.v.dot(N);
    s.mN = s.rho * (js.front.dt_phi - s.vN);
    s.eps = internal_energy(st.F, st.S, mp);
    s.FN = Eigen::VectorXd(d);
    for (int j = 0; j < d; ++j) s.FN(j) = st.F.col(j).dot(N);
    return s;
  };
  const Side a = build(js.plus), b = build(js.minus);

  const int rows = 1 + d + 1 + d * d + d + d * d * (d - 1) / 2;
  Vec r(rows);
  int k = 0;

  r(k++) = a.mN - b.mN;

  for (int i = 0; i < d; ++i) {
    double flux = a.mN * a.v(i) - b.mN * b.v(i);
    for (int l = 0; l < d; ++l)
      flux += a.rho * a.FN(l) * a.F(i, l) - b.rho * b.FN(l) * b.F(i, l);
    r(k++) = flux - N(i) * (a.p - b.p);
  }

  {
    double flux = a.mN * (a.eps + 0.5 * a.v.squaredNorm()) -
                  b.mN * (b.eps + 0.5 * b.v.squaredNorm());
    for (int l = 0; l < d; ++l)
      flux += a.rho * a.FN(l) * a.F.col(l).dot(a.v) -
              b.rho * b.FN(l) * b.F.col(l).dot(b.v);
    r(k++) = flux - (a.p * a.vN - b.p * b.vN);
  }

  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i)
      r(k++) = a.mN * a.F(i, j) - b.mN * b.F(i, j) + a.rho * a.FN(j) * a.v(i) -
               b.rho * b.FN(j) * b.v(i);

  for (int j = 0; j < d; ++j) r(k++) = a.rho * a.FN(j) - b.rho * b.FN(j);

  for (int j = 0; j < d; ++j)
    for (int kk = j + 1; kk < d; ++kk)
      for (int i = 0; i < d; ++i)
        r(k++) = (a.rho * a.FN(kk) * a.F(i, j) - a.rho * a.FN(j) * a.F(i, kk)) -
                 (b.rho * b.FN(kk) * b.F(i, j) - b.rho * b.FN(j) * b.F(i, kk));
  return r;
}

// --------------------------------------------------------------------------
// varrho and the boundary operator
// --------------------------------------------------------------------------

// Reciprocal of the tangential minor of F. Its reciprocal equals
// rho F_1N on traces whose tangential columns have no normal component.
inline double varrho_eval(const Mat& F) {
  const int d = static_cast<int>(F.rows());
  const double minor =
      d == 2 ? F(1, 1) : F(1, 1) * F(2, 2) - F(1, 2) * F(2, 1);
  if (std::abs(minor) < 1e-12) throw SingularMinor("tangential minor of F vanishes");
  return 1.0 / minor;
}

// d varrho / d F_ij, closed form; nonzero only in the tangential block.
inline Mat varrho_grad(const Mat& F) {
  const int d = static_cast<int>(F.rows());
  Mat g = Mat::Zero(d, d);
  if (d == 2) {
    const double m = F(1, 1);
    if (std::abs(m) < 1e-12) throw SingularMinor("tangential minor of F vanishes");
    g(1, 1) = -1.0 / (m * m);
  } else {
    const double m = F(1, 1) * F(2, 2) - F(1, 2) * F(2, 1);
    if (std::abs(m) < 1e-12) throw SingularMinor("tangential minor of F vanishes");
    const double inv2 = 1.0 / (m * m);
    g(1, 1) = -F(2, 2) * inv2;
    g(2, 2) = -F(1, 1) * inv2;
    g(1, 2) = F(2, 1) * inv2;
    g(2, 1) = F(1, 2) * inv2;
  }
  return g;
}

enum class BoundaryForm { General, Varrho };

// The 2d+1 interface conditions: front transport, velocity continuity,
// the pressure/normal-stretch balance, and the tangential compatibility
// rows. The two forms differ only in the coefficient of [F_11].
inline Vec boundary_operator(const JumpState& js, const MaterialParams& mp,
                             BoundaryForm form, double fjn_tol = 1e-6) {
  const int d = mp.d;
  const Eigen::VectorXd N = js.front.normal();
  Vec out(2 * d + 1);
  int k = 0;
  out(k++) = js.front.dt_phi - js.plus.v.dot(N);
  for (int i = 0; i < d; ++i) out(k++) = js.plus.v(i) - js.minus.v(i);

  double coeff;
  if (form == BoundaryForm::Varrho) {
    for (int j = 1; j < d; ++j) {
      const double fjnp = js.plus.F.col(j).dot(N);
      const double fjnm = js.minus.F.col(j).dot(N);
      if (std::abs(fjnp) > fjn_tol || std::abs(fjnm) > fjn_tol)
        throw ConstraintViolated("tangential F_jN not zero; varrho form invalid");
    }
    coeff = varrho_eval(js.plus.F);
  } else {
    coeff = density_from_F<double>(js.plus.F) * js.plus.F.col(0).dot(N);
  }
  out(k++) = (js.plus.p - js.minus.p) - coeff * (js.plus.F(0, 0) - js.minus.F(0, 0));

  for (int i = 2; i <= d; ++i) {
    const double dphi = js.front.grad(i - 2);
    out(k++) = (js.plus.F(0, 0) * dphi + js.plus.F(i - 1, 0)) -
               (js.minus.F(0, 0) * dphi + js.minus.F(i - 1, 0));
  }
  return out;
}

// --------------------------------------------------------------------------
// Background construction
// --------------------------------------------------------------------------

inline BackgroundState build_background(const Eigen::VectorXd& stretch_plus,
                                        double f11_minus, double S_plus,
                                        const MaterialParams& mp) {
  const int d = mp.d;
  if (stretch_plus.size() != d) throw ConfigError("need d principal stretches");
  if (!(stretch_plus.array() > 0.0).all() || !(f11_minus > 0.0))
    throw ConfigError("principal stretches must be positive");
  if (!(stretch_plus(0) > f11_minus))
    throw ConfigError("background requires F11+ > F11-");

  BackgroundState bg;
  bg.params = mp;
  bg.stretch_plus = stretch_plus;
  bg.stretch_minus = stretch_plus;
  bg.stretch_minus(0) = f11_minus;
  bg.S_plus = S_plus;

  bg.rho_plus = 1.0 / stretch_plus.prod();
  bg.rho_minus = 1.0 / bg.stretch_minus.prod();

  const EosEval plus = mp.eos.eval(bg.rho_plus, S_plus);
  bg.p_plus = plus.p;
  bg.c_plus = std::sqrt(plus.c2);

  const double jump = stretch_plus(0) - f11_minus;
  bg.p_minus = bg.p_plus - bg.rho_plus * stretch_plus(0) * jump;
  if (!(bg.p_minus > 0.0)) throw NegativeTargetPressure(bg.p_minus);

  bg.S_minus = mp.eos.entropy_for_pressure(bg.p_minus, bg.rho_minus);
  bg.c_minus = std::sqrt(mp.eos.eval(bg.rho_minus, bg.S_minus).c2);
  return bg;
}

// --------------------------------------------------------------------------
// Rigidity probe: Newton search for non-trivial contact roots
// --------------------------------------------------------------------------

struct RigidityTrial {
  int trial = 0;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  double distance_to_plus = 0.0;  // |U- - U+| over (v,F,S) with p implied
  Vec root;                       // (v-, F- col-major, dtphi)
};

struct RigidityReport {
  std::vector<RigidityTrial> trials;
  int converged_count = 0;
  int nontrivial_roots = 0;  // converged roots farther than `rigid_tol` from U+
  double rigid_tol = 1e-8;
};

namespace detail {

// Residual of the full contact system: all jump conditions plus a vanishing
// mass flux on the plus side, with the minus entropy pinned to S+ + dS.
// Unknowns: (v-, F- col-major, dtphi). Pressures follow from the EOS.
inline Vec rigidity_residual(const Vec& x, const ThermoState& plus,
                             const FrontGeometry& front_in, double dS,
                             const MaterialParams& mp) {
  const int d = mp.d;
  JumpState js;
  js.plus = plus;
  js.front = front_in;
  js.front.dt_phi = x(d + d * d);
  js.minus.v = x.head(d);
  js.minus.F = Mat(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) js.minus.F(i, j) = x(d + j * d + i);
  const double det = js.minus.F.determinant();
  const int rows = 1 + d + 1 + d * d + d + d * d * (d - 1) / 2 + 1;
  if (!(det > 1e-12)) {
    // outside the admissible chart: smooth penalty so the line search backs off
    return Vec::Constant(rows, 1e6 * (1.0 + det * det));
  }
  js.minus.S = plus.S + dS;
  const double rho_m = 1.0 / det;
  js.minus.p = mp.eos.eval(rho_m, js.minus.S).p;
  // plus-side pressure must also be EOS-consistent for the energy row
  const Vec rh = rh_residual(js, mp);
  Vec r(rh.size() + 1);
  r.head(rh.size()) = rh;
  r(rh.size()) = js.mass_flux(+1);
  return r;
}

}  // namespace detail

// Damped Gauss-Newton over random seeds near U+. Converged roots of the
// closed contact system are reported with their distance to the trivial
// root; non-convergence is recorded, not thrown.
inline RigidityReport rigidity_probe(const ThermoState& plus_in,
                                     const FrontGeometry& front,
                                     const MaterialParams& mp, int trials,
                                     std::uint64_t seed, double dS = 0.0,
                                     double spread = 0.1) {
  const int d = mp.d;
  // the probe states must themselves be EOS-consistent
  ThermoState plus = plus_in;
  plus.p = mp.eos.eval(density_from_F<double>(plus.F), plus.S).p;

  const int nx = d + d * d + 1;
  Vec x_trivial(nx);
  x_trivial.head(d) = plus.v;
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) x_trivial(d + j * d + i) = plus.F(i, j);
  x_trivial(nx - 1) = plus.v.dot(front.normal());

  RigidityReport rep;
  rep.trials.resize(trials);

  auto resid = [&](const Vec& x) {
    return detail::rigidity_residual(x, plus, front, dS, mp);
  };

  std::uint64_t state = seed ^ 0x9e3779b97f4a7c15ull;
  auto next_u = [&]() {
    // xorshift64*, mapped to [-1, 1); deterministic across platforms
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    const std::uint64_t z = state * 0x2545f4914f6cdd1dull;
    return 2.0 * (static_cast<double>(z >> 11) * 0x1.0p-53) - 1.0;
  };

  for (int t = 0; t < trials; ++t) {
    RigidityTrial& tr = rep.trials[t];
    tr.trial = t;
    Vec x = x_trivial;
    for (int i = 0; i < nx; ++i) x(i) += spread * next_u() * (1.0 + std::abs(x(i)));

    Vec r = resid(x);
    double norm2 = r.squaredNorm();
    int it = 0;
    const int max_iter = 60;
    for (; it < max_iter; ++it) {
      if (r.lpNorm<Eigen::Infinity>() < 1e-12) break;
      // finite-difference Jacobian; the system is small and smooth
      Mat Jac(r.size(), nx);
      for (int c = 0; c < nx; ++c) {
        const double h = 1e-7 * (1.0 + std::abs(x(c)));
        Vec xp = x, xm = x;
        xp(c) += h;
        xm(c) -= h;
        Jac.col(c) = (resid(xp) - resid(xm)) / (2.0 * h);
      }
      const Vec step = Jac.colPivHouseholderQr().solve(-r);
      if (!step.allFinite()) break;
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 40; ++ls) {
        const Vec xn = x + alpha * step;
        const Vec rn = resid(xn);
        if (rn.squaredNorm() < norm2 * (1.0 - 1e-4 * alpha)) {
          x = xn;
          r = rn;
          norm2 = rn.squaredNorm();
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
    }
    tr.iterations = it;
    tr.residual = r.lpNorm<Eigen::Infinity>();
    tr.converged = tr.residual < 1e-12;
    tr.root = x;
    tr.distance_to_plus = (x - x_trivial).lpNorm<Eigen::Infinity>();
    if (tr.converged) {
      ++rep.converged_count;
      if (tr.distance_to_plus > rep.rigid_tol) ++rep.nontrivial_roots;
    }
  }
  return rep;
}

}  // namespace tecd
