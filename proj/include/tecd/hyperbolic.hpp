#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <vector>

#include "tecd/constitutive.hpp"
#include "tecd/errors.hpp"
#include "tecd/layout.hpp"

namespace tecd {

// Everything the coefficient matrices need at one point, with the derived
// quantities computed once.
struct StatePoint {
  ThermoState st;
  double rho = 0.0;
  double c2 = 0.0;
  Mat Finv;
  EosDerivs ed{};

  static StatePoint make(const ThermoState& s, const MaterialParams& mp) {
    StatePoint sp;
    sp.st = s;
    sp.rho = density_from_F<double>(s.F);
    const EosEval ev = mp.eos.eval(sp.rho, s.S);
    if (!(ev.c2 > 0.0)) throw ModelError("sound speed squared not positive");
    sp.c2 = ev.c2;
    sp.Finv = s.F.inverse();
    sp.ed = mp.eos.derivs(sp.rho, s.S);
    return sp;
  }
};

// Front description on the interface: tangential gradient of the height
// function, its speed, and the induced spatial normal N = (1, -grad').
struct FrontGeometry {
  Eigen::VectorXd grad;  // (d2 phi, ..., dd phi), size d-1
  double dt_phi = 0.0;

  Eigen::VectorXd normal() const {
    Eigen::VectorXd N(grad.size() + 1);
    N(0) = 1.0;
    for (int i = 0; i < grad.size(); ++i) N(i + 1) = -grad(i);
    return N;
  }

  static FrontGeometry flat(int d) {
    FrontGeometry f;
    f.grad = Eigen::VectorXd::Zero(d - 1);
    return f;
  }
};

// First derivatives of a lifting function at one point, enough to build
// the transformed normal matrix.
struct LiftPoint {
  double dt = 0.0;
  double d1 = 1.0;
  Eigen::VectorXd dtan;  // (d2 Phi, ..., dd Phi), size d-1

  static LiftPoint identity(int d) {
    LiftPoint lp;
    lp.dtan = Eigen::VectorXd::Zero(d - 1);
    return lp;
  }

  Eigen::VectorXd normal() const {
    Eigen::VectorXd N(dtan.size() + 1);
    N(0) = 1.0;
    for (int i = 0; i < dtan.size(); ++i) N(i + 1) = -dtan(i);
    return N;
  }
};

inline Mat assemble_a0(const StatePoint& sp, const MaterialParams& mp) {
  const Layout L(mp.d);
  Mat A = Mat::Zero(L.n(), L.n());
  A(L.p(), L.p()) = 1.0 / (sp.rho * sp.c2);
  for (int k = L.v(1); k <= L.F(mp.d, mp.d); ++k) A(k, k) = sp.rho;
  A(L.S(), L.S()) = 1.0;
  return A;
}

inline Mat assemble_ai(const StatePoint& sp, const MaterialParams& mp, int i) {
  const Layout L(mp.d);
  const int d = mp.d;
  Mat A = Mat::Zero(L.n(), L.n());
  const double vi = sp.st.v(i - 1);
  A(L.p(), L.p()) = vi / (sp.rho * sp.c2);
  A(L.p(), L.v(i)) = 1.0;
  A(L.v(i), L.p()) = 1.0;
  for (int k = 1; k <= d; ++k) A(L.v(k), L.v(k)) = sp.rho * vi;
  for (int j = 1; j <= d; ++j) {
    const double cij = -sp.rho * sp.st.F(i - 1, j - 1);
    for (int k = 1; k <= d; ++k) {
      A(L.v(k), L.F(k, j)) = cij;
      A(L.F(k, j), L.v(k)) = cij;
    }
  }
  for (int j = 1; j <= d; ++j)
    for (int k = 1; k <= d; ++k) A(L.F(k, j), L.F(k, j)) = sp.rho * vi;
  A(L.S(), L.S()) = vi;
  return A;
}

inline std::vector<Mat> assemble_a(const StatePoint& sp, const MaterialParams& mp) {
  std::vector<Mat> A;
  A.push_back(assemble_a0(sp, mp));
  for (int i = 1; i <= mp.d; ++i) A.push_back(assemble_ai(sp, mp, i));
  return A;
}

// --------------------------------------------------------------------------
// Directional derivatives of the coefficient matrices in a state direction
// dU = (dp, dv, dF, dS). The matrices depend on the state only through
// (rho(F), c^2(rho,S), v, F); dp never enters.
// --------------------------------------------------------------------------

struct StateDirection {
  Eigen::VectorXd dv;
  Mat dF;
  double dS = 0.0;

  static StateDirection from_vector(const Vec& du, int d) {
    const Layout L(d);
    StateDirection sd;
    sd.dv = Eigen::VectorXd(d);
    sd.dF = Mat(d, d);
    for (int i = 1; i <= d; ++i) sd.dv(i - 1) = du(L.v(i));
    for (int j = 1; j <= d; ++j)
      for (int i = 1; i <= d; ++i) sd.dF(i - 1, j - 1) = du(L.F(i, j));
    sd.dS = du(L.S());
    return sd;
  }
};

inline double drho_dir(const StatePoint& sp, const StateDirection& dir) {
  return -sp.rho * (sp.Finv * dir.dF).trace();
}

inline double dc2_dir(const StatePoint& sp, const StateDirection& dir) {
  return sp.ed.p_rho_rho * drho_dir(sp, dir) + sp.ed.p_rho_S * dir.dS;
}

inline Mat d_assemble_a0(const StatePoint& sp, const MaterialParams& mp,
                         const StateDirection& dir) {
  const Layout L(mp.d);
  const double dr = drho_dir(sp, dir);
  const double dc2 = dc2_dir(sp, dir);
  Mat A = Mat::Zero(L.n(), L.n());
  A(L.p(), L.p()) = -(dr * sp.c2 + sp.rho * dc2) / (sp.rho * sp.c2 * sp.rho * sp.c2);
  for (int k = L.v(1); k <= L.F(mp.d, mp.d); ++k) A(k, k) = dr;
  return A;
}

inline Mat d_assemble_ai(const StatePoint& sp, const MaterialParams& mp, int i,
                         const StateDirection& dir) {
  const Layout L(mp.d);
  const int d = mp.d;
  const double dr = drho_dir(sp, dir);
  const double dc2 = dc2_dir(sp, dir);
  const double vi = sp.st.v(i - 1);
  const double dvi = dir.dv(i - 1);
  const double rc2 = sp.rho * sp.c2;
  Mat A = Mat::Zero(L.n(), L.n());
  A(L.p(), L.p()) = dvi / rc2 - vi * (dr * sp.c2 + sp.rho * dc2) / (rc2 * rc2);
  const double drv = dr * vi + sp.rho * dvi;
  for (int k = 1; k <= d; ++k) A(L.v(k), L.v(k)) = drv;
  for (int j = 1; j <= d; ++j) {
    const double cij = -(dr * sp.st.F(i - 1, j - 1) + sp.rho * dir.dF(i - 1, j - 1));
    for (int k = 1; k <= d; ++k) {
      A(L.v(k), L.F(k, j)) = cij;
      A(L.F(k, j), L.v(k)) = cij;
    }
  }
  for (int j = 1; j <= d; ++j)
    for (int k = 1; k <= d; ++k) A(L.F(k, j), L.F(k, j)) = drv;
  A(L.S(), L.S()) = dvi;
  return A;
}

// --------------------------------------------------------------------------
// Straightened normal matrix and the interface boundary matrix
// --------------------------------------------------------------------------

inline Mat assemble_a1tilde(const StatePoint& sp, const MaterialParams& mp,
                            const LiftPoint& lp) {
  if (std::abs(lp.d1) < 1e-8) throw DegenerateLift(lp.d1);
  Mat A = assemble_ai(sp, mp, 1) - lp.dt * assemble_a0(sp, mp);
  for (int i = 2; i <= mp.d; ++i) A -= lp.dtan(i - 2) * assemble_ai(sp, mp, i);
  return A / lp.d1;
}

inline Mat d_assemble_a1tilde(const StatePoint& sp, const MaterialParams& mp,
                              const LiftPoint& lp, const StateDirection& dir) {
  if (std::abs(lp.d1) < 1e-8) throw DegenerateLift(lp.d1);
  Mat A = d_assemble_ai(sp, mp, 1, dir) - lp.dt * d_assemble_a0(sp, mp, dir);
  for (int i = 2; i <= mp.d; ++i) A -= lp.dtan(i - 2) * d_assemble_ai(sp, mp, i, dir);
  return A / lp.d1;
}

// dtphi A0 - N_l A_l restricted to the interface.
inline Mat boundary_matrix(const StatePoint& sp, const MaterialParams& mp,
                           const FrontGeometry& front) {
  const Eigen::VectorXd N = front.normal();
  Mat M = front.dt_phi * assemble_a0(sp, mp);
  for (int l = 1; l <= mp.d; ++l) M -= N(l - 1) * assemble_ai(sp, mp, l);
  return M;
}

struct EigenReport {
  Eigen::VectorXd eigs_plus;
  Eigen::VectorXd eigs_minus;
  double lambda_fast = 0.0;   // sqrt(|N|^2 + rho^2 |F_N|^2)
  double lambda_slow = 0.0;   // rho |F_N|
  int zero_multiplicity = 0;  // per side
  int doubled_negative = 0;
  int doubled_positive = 0;
  int doubled_zero = 0;
};

namespace detail {

inline void count_signs(const Eigen::VectorXd& eigs, double tol, int& neg, int& pos,
                        int& zero) {
  neg = pos = zero = 0;
  for (int i = 0; i < eigs.size(); ++i) {
    if (std::abs(eigs(i)) <= tol)
      ++zero;
    else if (eigs(i) < 0)
      ++neg;
    else
      ++pos;
  }
}

// Multiset comparison against the analytic pattern with a clustering
// tolerance: eigenvalues within tol of an analytic value are assigned to it.
inline bool matches_pattern(const Eigen::VectorXd& eigs,
                            const std::vector<std::pair<double, int>>& pattern,
                            double tol) {
  std::vector<double> values(eigs.data(), eigs.data() + eigs.size());
  for (const auto& [val, mult] : pattern) {
    int found = 0;
    for (auto it = values.begin(); it != values.end() && found < mult;) {
      if (std::abs(*it - val) <= tol) {
        it = values.erase(it);
        ++found;
      } else {
        ++it;
      }
    }
    if (found != mult) return false;
  }
  return values.empty();
}

}  // namespace detail

// Diagonalizes the interface boundary matrix on each side, checks the
// multiplicity pattern, and checks the sign counts of the doubled system.
inline EigenReport boundary_matrix_eigencheck(const ThermoState& left,
                                              const ThermoState& right,
                                              const FrontGeometry& front,
                                              const MaterialParams& mp,
                                              double mass_flux_tol = 1e-10,
                                              double cluster_tol = 1e-8) {
  const int d = mp.d;
  const Eigen::VectorXd N = front.normal();
  EigenReport rep;

  const StatePoint sides[2] = {StatePoint::make(left, mp), StatePoint::make(right, mp)};
  Eigen::VectorXd* out[2] = {&rep.eigs_plus, &rep.eigs_minus};

  int neg = 0, pos = 0, zero = 0;
  for (int s = 0; s < 2; ++s) {
    const StatePoint& sp = sides[s];
    const double mN = sp.rho * (front.dt_phi - sp.st.v.dot(N));
    if (std::abs(mN) > mass_flux_tol) throw MassFluxNonzero(mN);

    Mat M = boundary_matrix(sp, mp, front);
    Eigen::SelfAdjointEigenSolver<Mat> es(M);
    *out[s] = es.eigenvalues();

    double FN2 = 0.0;
    for (int j = 1; j <= d; ++j) {
      const double FjN = sp.st.F.col(j - 1).dot(N);
      FN2 += FjN * FjN;
    }
    const double fast = std::sqrt(N.squaredNorm() + sp.rho * sp.rho * FN2);
    const double slow = sp.rho * std::sqrt(FN2);
    if (s == 0) {
      rep.lambda_fast = fast;
      rep.lambda_slow = slow;
      rep.zero_multiplicity = d * d - d + 2;
    }

    const double tol = cluster_tol * std::max(1.0, M.norm());
    std::vector<std::pair<double, int>> pattern = {
        {fast, 1}, {-fast, 1}, {slow, d - 1}, {-slow, d - 1}, {0.0, d * d - d + 2}};
    if (!detail::matches_pattern(*out[s], pattern, tol))
      throw MultiplicityMismatch("interface spectrum does not match the analytic pattern");

    // doubled system: second block enters with the opposite sign
    int n1, p1, z1;
    detail::count_signs(s == 0 ? *out[s] : Eigen::VectorXd(-*out[s]), tol, n1, p1, z1);
    neg += n1;
    pos += p1;
    zero += z1;
  }
  rep.doubled_negative = neg;
  rep.doubled_positive = pos;
  rep.doubled_zero = zero;
  if (neg != 2 * d || pos != 2 * d || zero != 2 * (d * d - d + 2))
    throw MultiplicityMismatch("doubled interface system has wrong sign counts");
  return rep;
}

// --------------------------------------------------------------------------
// Change of variables J between the primary unknowns and the boundary-
// adapted unknowns W, and the congruent coefficient matrices.
// --------------------------------------------------------------------------

inline double f1n_of(const Mat& F, const Eigen::VectorXd& N) {
  return F.col(0).dot(N);
}

inline Mat assemble_J(const StatePoint& sp, const MaterialParams& mp,
                      const LiftPoint& lp) {
  const int d = mp.d;
  const Layout L(d);
  const WLayout W(d);
  const Eigen::VectorXd N = lp.normal();
  const double rF = sp.rho * f1n_of(sp.st.F, N);
  if (std::abs(rF) < 1e-10) throw DegenerateF1N(rF);

  Mat J = Mat::Zero(L.n(), L.n());
  J(L.p(), W.w1()) = 1.0;
  J(L.v(1), W.w2()) = 1.0;
  for (int j = 2; j <= d; ++j) J(L.v(1), W.wv(j)) = lp.dtan(j - 2);
  for (int j = 2; j <= d; ++j) J(L.v(j), W.wv(j)) = 1.0;
  J(L.F(1, 1), W.w1()) = 1.0 / rF;
  J(L.F(1, 1), W.wd2()) = -1.0 / rF;
  for (int j = 2; j <= d; ++j) {
    J(L.F(j, 1), W.w1()) = -lp.dtan(j - 2) / rF;
    J(L.F(j, 1), W.wd2()) = lp.dtan(j - 2) / rF;
    J(L.F(j, 1), W.wdj(j)) = 1.0;
  }
  for (int j = 2; j <= d; ++j)
    for (int i = 1; i <= d; ++i) J(L.F(i, j), W.wF(i, j)) = 1.0;
  J(L.S(), W.wS()) = 1.0;
  return J;
}

// Directional derivative of J under (dU, d grad Phi).
inline Mat d_assemble_J(const StatePoint& sp, const MaterialParams& mp,
                        const LiftPoint& lp, const StateDirection& dir,
                        const Eigen::VectorXd& d_dtan) {
  const int d = mp.d;
  const Layout L(d);
  const WLayout W(d);
  const Eigen::VectorXd N = lp.normal();
  const double f1n = f1n_of(sp.st.F, N);
  const double rF = sp.rho * f1n;
  if (std::abs(rF) < 1e-10) throw DegenerateF1N(rF);

  double df1n = dir.dF.col(0).dot(N);
  for (int j = 2; j <= d; ++j) df1n -= sp.st.F(j - 1, 0) * d_dtan(j - 2);
  const double drF = drho_dir(sp, dir) * f1n + sp.rho * df1n;
  const double dinv = -drF / (rF * rF);

  Mat dJ = Mat::Zero(L.n(), L.n());
  for (int j = 2; j <= d; ++j) dJ(L.v(1), W.wv(j)) = d_dtan(j - 2);
  dJ(L.F(1, 1), W.w1()) = dinv;
  dJ(L.F(1, 1), W.wd2()) = -dinv;
  for (int j = 2; j <= d; ++j) {
    dJ(L.F(j, 1), W.w1()) = -(d_dtan(j - 2) / rF + lp.dtan(j - 2) * dinv);
    dJ(L.F(j, 1), W.wd2()) = d_dtan(j - 2) / rF + lp.dtan(j - 2) * dinv;
  }
  return dJ;
}

inline Mat symmetrize(const Mat& M) {
  Mat S = M;
  for (int r = 0; r < S.rows(); ++r)
    for (int c = 0; c < r; ++c) S(r, c) = S(c, r);
  return S;
}

struct CoefficientMatrices {
  Mat A0;                 // primary-variable symmetrizer
  std::vector<Mat> A;     // A_1..A_d
  Mat A1tilde;
  Mat J, Jinv;
  std::vector<Mat> calA;  // calA_0..calA_d (index 1 is the transformed normal)
  Mat calA1a;
  Mat Bsel;               // selector that exposes d1 of the noncharacteristic block
};

// A(U,Phi) = diag(1, -rho F_1N I_{d-1}) sitting in the off-diagonal blocks
// that couple W_2..W_{d+1} with W_{d+2}..W_{2d+1}; `side` carries the
// overall +/- of the corresponding half-problem.
inline Mat assemble_calA1a(const StatePoint& sp, const MaterialParams& mp,
                           const LiftPoint& lp, int side) {
  const int d = mp.d;
  const WLayout W(d);
  const double rF = sp.rho * f1n_of(sp.st.F, lp.normal());
  Mat M = Mat::Zero(W.n(), W.n());
  const double sgn = side >= 0 ? 1.0 : -1.0;
  M(W.w2(), W.wd2()) = sgn;
  M(W.wd2(), W.w2()) = sgn;
  for (int j = 2; j <= d; ++j) {
    M(W.wv(j), W.wdj(j)) = -sgn * rF;
    M(W.wdj(j), W.wv(j)) = -sgn * rF;
  }
  return M;
}

inline Mat assemble_bsel(const StatePoint& sp, const MaterialParams& mp,
                         const LiftPoint& lp, int side) {
  const int d = mp.d;
  const WLayout W(d);
  const double rF = sp.rho * f1n_of(sp.st.F, lp.normal());
  if (std::abs(rF) < 1e-10) throw DegenerateF1N(rF);
  Mat M = Mat::Zero(W.n(), W.n());
  const double sgn = side >= 0 ? 1.0 : -1.0;
  M(W.w2(), W.wd2()) = sgn;
  M(W.wd2(), W.w2()) = sgn;
  for (int j = 2; j <= d; ++j) {
    M(W.wv(j), W.wdj(j)) = -sgn / rF;
    M(W.wdj(j), W.wv(j)) = -sgn / rF;
  }
  return M;
}

inline CoefficientMatrices assemble_coefficients(const StatePoint& sp,
                                                 const MaterialParams& mp,
                                                 const LiftPoint& lp, int side) {
  CoefficientMatrices cm;
  cm.A0 = assemble_a0(sp, mp);
  for (int i = 1; i <= mp.d; ++i) cm.A.push_back(assemble_ai(sp, mp, i));
  cm.A1tilde = assemble_a1tilde(sp, mp, lp);
  cm.J = assemble_J(sp, mp, lp);
  cm.Jinv = cm.J.inverse();
  cm.calA.resize(mp.d + 1);
  cm.calA[0] = symmetrize(cm.J.transpose() * cm.A0 * cm.J);
  cm.calA[1] = symmetrize(cm.J.transpose() * cm.A1tilde * cm.J);
  for (int i = 2; i <= mp.d; ++i)
    cm.calA[i] = symmetrize(cm.J.transpose() * cm.A[i - 1] * cm.J);
  cm.calA1a = assemble_calA1a(sp, mp, lp, side);
  cm.Bsel = assemble_bsel(sp, mp, lp, side);
  return cm;
}

// --------------------------------------------------------------------------
// Zeroth-order pieces: the operator C(U,Phi)X and the transformed calA4
// --------------------------------------------------------------------------

// Derivatives of the coefficient fields at one point. dU[mu] is the mu-th
// derivative of the state vector (mu = 0 is time, then x_1..x_d); likewise
// d_dtan[mu] differentiates the tangential lift gradient, d_dt/d_d1 the
// other lift derivatives. Callers supply whatever stencil or closed form
// they have; nothing here touches a grid.
struct CoefficientDerivs {
  std::vector<Vec> dU;                  // size d+1, each n
  std::vector<Eigen::VectorXd> d_dtan;  // size d+1, each d-1
  Eigen::VectorXd d_dt;                 // size d+1: derivative of dt(Phi)
  Eigen::VectorXd d_d1;                 // size d+1: derivative of d1(Phi)

  static CoefficientDerivs zero(int d, int n) {
    CoefficientDerivs cd;
    cd.dU.assign(d + 1, Vec::Zero(n));
    cd.d_dtan.assign(d + 1, Eigen::VectorXd::Zero(d - 1));
    cd.d_dt = Eigen::VectorXd::Zero(d + 1);
    cd.d_d1 = Eigen::VectorXd::Zero(d + 1);
    return cd;
  }
};

// C(U,Phi) applied to a direction X: X_l dA0/dU_l dtU + X_l dA1t/dU_l d1U
// + sum_i X_l dAi/dU_l diU.
inline Vec apply_C(const StatePoint& sp, const MaterialParams& mp, const LiftPoint& lp,
                   const CoefficientDerivs& cd, const Vec& X) {
  const StateDirection dir = StateDirection::from_vector(X, mp.d);
  Vec out = d_assemble_a0(sp, mp, dir) * cd.dU[0];
  out += d_assemble_a1tilde(sp, mp, lp, dir) * cd.dU[1];
  for (int i = 2; i <= mp.d; ++i) out += d_assemble_ai(sp, mp, i, dir) * cd.dU[i];
  return out;
}

// calA4 = J^T (A0 dtJ + A1t d1J + sum Ai diJ + C J), with the derivatives of
// J expanded through its dependence on (U, grad' Phi).
inline Mat assemble_calA4(const StatePoint& sp, const MaterialParams& mp,
                          const LiftPoint& lp, const CoefficientDerivs& cd) {
  const int d = mp.d;
  const int n = Layout(d).n();
  const Mat J = assemble_J(sp, mp, lp);
  const Mat A0 = assemble_a0(sp, mp);
  const Mat A1t = assemble_a1tilde(sp, mp, lp);

  auto dJ_mu = [&](int mu) {
    return d_assemble_J(sp, mp, lp, StateDirection::from_vector(cd.dU[mu], d),
                        cd.d_dtan[mu]);
  };

  Mat LJ = A0 * dJ_mu(0) + A1t * dJ_mu(1);
  for (int i = 2; i <= d; ++i) LJ += assemble_ai(sp, mp, i) * dJ_mu(i);

  Mat CJ(n, n);
  for (int k = 0; k < n; ++k) CJ.col(k) = apply_C(sp, mp, lp, cd, Vec(J.col(k)));

  return J.transpose() * (LJ + CJ);
}

}  // namespace tecd
