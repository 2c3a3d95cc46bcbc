#pragma once

#include <vector>

#include "tecd/chi.hpp"
#include "tecd/grid.hpp"
#include "tecd/hyperbolic.hpp"

namespace tecd {

// Lifting function Phi(t,x) = side * x1 + chi(x1) phi(t,x') realized on a
// grid: the cutoff profile is tabulated on the x1 nodes, the front height
// and its derivatives on the tangential torus. phi is held at one time
// instant; time derivatives are separate arrays so manufactured and
// evolving fronts use the same plumbing.
struct Lift {
  Grid g;
  Chi chi;
  Eigen::ArrayXd chi_v, chi_d1, chi_d2;        // profiles on the x1 nodes
  Eigen::ArrayXd phi, dt_phi, dtt_phi;         // on the torus
  std::vector<Eigen::ArrayXd> dtan_phi;        // d-1 first derivatives
  std::vector<Eigen::ArrayXd> dtan_dt_phi;     // d-1 derivatives of dt_phi
  std::vector<std::vector<Eigen::ArrayXd>> d2tan_phi;  // (d-1)^2 second derivatives

  // Tangential derivatives by the periodic stencil; callers with closed
  // forms can overwrite the arrays afterwards.
  static Lift make(const Grid& grid, const Chi& cutoff, const Eigen::ArrayXd& phi,
                   const Eigen::ArrayXd& dt_phi);

  static Lift zero(const Grid& grid, const Chi& cutoff = Chi{}) {
    return make(grid, cutoff, Eigen::ArrayXd::Zero(grid.ntt()),
                Eigen::ArrayXd::Zero(grid.ntt()));
  }

  LiftPoint point(int side, int i1, int it) const {
    LiftPoint lp;
    lp.dt = chi_v(i1) * dt_phi(it);
    lp.d1 = (side >= 0 ? 1.0 : -1.0) + chi_d1(i1) * phi(it);
    lp.dtan = Eigen::VectorXd(g.d - 1);
    for (int j = 0; j < g.d - 1; ++j) lp.dtan(j) = chi_v(i1) * dtan_phi[j](it);
    return lp;
  }

  // mu = 0 is time, then x1..xd. Derivatives of (dt Phi, d1 Phi, dtan Phi).
  void point_second(int i1, int it, int mu, double& d_dt, double& d_d1,
                    Eigen::VectorXd& d_dtan) const {
    d_dtan.resize(g.d - 1);
    if (mu == 0) {
      d_dt = chi_v(i1) * dtt_phi(it);
      d_d1 = chi_d1(i1) * dt_phi(it);
      for (int j = 0; j < g.d - 1; ++j) d_dtan(j) = chi_v(i1) * dtan_dt_phi[j](it);
    } else if (mu == 1) {
      d_dt = chi_d1(i1) * dt_phi(it);
      d_d1 = chi_d2(i1) * phi(it);
      for (int j = 0; j < g.d - 1; ++j) d_dtan(j) = chi_d1(i1) * dtan_phi[j](it);
    } else {
      const int j = mu - 2;
      d_dt = chi_v(i1) * dtan_dt_phi[j](it);
      d_d1 = chi_d1(i1) * dtan_phi[j](it);
      for (int l = 0; l < g.d - 1; ++l) d_dtan(l) = chi_v(i1) * d2tan_phi[j][l](it);
    }
  }

  double min_d1(int side) const {
    double m = 1e30;
    for (int i1 = 0; i1 <= g.n1; ++i1)
      for (int it = 0; it < g.ntt(); ++it)
        m = std::min(m, (side >= 0 ? 1.0 : -1.0) * point(side, i1, it).d1);
    return m;
  }
};

// Derivatives with respect to the lifting function, assembled from the
// plain grid stencils. The time member needs the raw time derivative of
// the field, which the caller supplies.
struct PhiDerivs {
  Field dt;            // field of dt^Phi u
  Field d1;            // field of d1^Phi u
  std::vector<Field> dtan;  // fields of di^Phi u, i = 2..d
};

PhiDerivs phi_differentials(const Grid& g, const Lift& lift, int side, const Field& u,
                            const Field& du_dt);

// L(U,Phi)U with derivatives of U taken by the grid stencils and the time
// derivative supplied. The result is the interior residual of the
// straightened balance laws.
Field apply_L(const Grid& g, const Lift& lift, int side, const MaterialParams& mp,
              const Field& U, const Field& dU_dt);

// Interior involution residuals of a state field. The rho argument lets a
// caller probe independently carried densities; pass the derived one to get
// the exact zero.
struct InvolutionResiduals {
  Field inv_gradient;   // d * d(d-1)/2 rows: curl-type compatibility
  Field inv_divergence; // d rows: div(rho F_j)
  ScalarField rho_relation;  // |rho - (det F)^{-1}|
};

InvolutionResiduals involution_residuals(const Grid& g, const Lift& lift, int side,
                                         const MaterialParams& mp, const Field& U,
                                         const ScalarField* rho_independent = nullptr);

// Boundary-slice involution residuals between the two sides: continuity of
// rho F_jN, the antisymmetric compatibility jumps, the tangential normal
// traces, and the reciprocal-minor identity rho F_1N - varrho(F).
struct BoundaryInvolutionResiduals {
  Mat rho_fjn_jump;     // (d, ntt)
  Mat fjn_tangential;   // (2(d-1), ntt), plus side first
  Mat key_identity;     // (2, ntt)
  Mat antisym_jump;     // (d*d(d-1)/2, ntt)
};

BoundaryInvolutionResiduals boundary_involution_residuals(const Grid& g,
                                                          const Lift& lift,
                                                          const MaterialParams& mp,
                                                          const Field& Uplus,
                                                          const Field& Uminus);

// Largest drift of a recorded residual-norm series relative to its start.
inline double involution_drift(const std::vector<double>& series) {
  if (series.empty()) return 0.0;
  double m = 0.0;
  for (double v : series) m = std::max(m, v);
  return m;
}

}  // namespace tecd
