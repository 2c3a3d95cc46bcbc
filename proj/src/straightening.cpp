#include "tecd/straightening.hpp"

#include "tecd/constitutive.hpp"
#include "tecd/interface.hpp"

namespace tecd {

Lift Lift::make(const Grid& grid, const Chi& cutoff, const Eigen::ArrayXd& phi_in,
                const Eigen::ArrayXd& dt_phi_in) {
  Lift lf;
  lf.g = grid;
  lf.chi = cutoff;
  lf.chi_v.resize(grid.nx1());
  lf.chi_d1.resize(grid.nx1());
  lf.chi_d2.resize(grid.nx1());
  for (int i1 = 0; i1 <= grid.n1; ++i1) {
    const double x = grid.x1(i1);
    lf.chi_v(i1) = cutoff.value(x);
    lf.chi_d1(i1) = cutoff.d1(x);
    lf.chi_d2(i1) = cutoff.d2(x);
  }
  lf.phi = phi_in;
  lf.dt_phi = dt_phi_in;
  lf.dtt_phi = Eigen::ArrayXd::Zero(grid.ntt());
  for (int j = 0; j < grid.d - 1; ++j) {
    lf.dtan_phi.push_back(trace_deriv_tan(grid, lf.phi, j + 2));
    lf.dtan_dt_phi.push_back(trace_deriv_tan(grid, lf.dt_phi, j + 2));
  }
  lf.d2tan_phi.resize(grid.d - 1);
  for (int j = 0; j < grid.d - 1; ++j)
    for (int l = 0; l < grid.d - 1; ++l)
      lf.d2tan_phi[j].push_back(trace_deriv_tan(grid, lf.dtan_phi[j], l + 2));
  return lf;
}

PhiDerivs phi_differentials(const Grid& g, const Lift& lift, int side, const Field& u,
                            const Field& du_dt) {
  PhiDerivs out;
  const Field d1 = deriv_x1(g, u);
  out.d1 = Field(u.ncomp(), g);
  out.dt = Field(u.ncomp(), g);
  for (int dir = 2; dir <= g.d; ++dir) out.dtan.push_back(deriv_tan(g, u, dir));

  for (int i1 = 0; i1 <= g.n1; ++i1)
    for (int it = 0; it < g.ntt(); ++it) {
      const int q = g.pid(i1, it);
      const LiftPoint lp = lift.point(side, i1, it);
      if (std::abs(lp.d1) < 1e-8) throw DegenerateLift(lp.d1);
      out.d1.m.col(q) = d1.m.col(q) / lp.d1;
      out.dt.m.col(q) = du_dt.m.col(q) - (lp.dt / lp.d1) * d1.m.col(q);
      for (int dir = 2; dir <= g.d; ++dir)
        out.dtan[dir - 2].m.col(q) -= (lp.dtan(dir - 2) / lp.d1) * d1.m.col(q);
    }
  return out;
}

Field apply_L(const Grid& g, const Lift& lift, int side, const MaterialParams& mp,
              const Field& U, const Field& dU_dt) {
  const Field d1 = deriv_x1(g, U);
  std::vector<Field> dtan;
  for (int dir = 2; dir <= g.d; ++dir) dtan.push_back(deriv_tan(g, U, dir));

  Field out(U.ncomp(), g);
  for (int i1 = 0; i1 <= g.n1; ++i1)
    for (int it = 0; it < g.ntt(); ++it) {
      const int q = g.pid(i1, it);
      const StatePoint sp = StatePoint::make(ThermoState::from_vector(U.m.col(q), mp), mp);
      const LiftPoint lp = lift.point(side, i1, it);
      Vec r = assemble_a0(sp, mp) * dU_dt.m.col(q) +
              assemble_a1tilde(sp, mp, lp) * d1.m.col(q);
      for (int dir = 2; dir <= g.d; ++dir)
        r += assemble_ai(sp, mp, dir) * dtan[dir - 2].m.col(q);
      out.m.col(q) = r;
    }
  return out;
}

InvolutionResiduals involution_residuals(const Grid& g, const Lift& lift, int side,
                                         const MaterialParams&, const Field& U,
                                         const ScalarField* rho_independent) {
  const int d = g.d;
  const Layout L(d);

  // rho and the momentum-like products rho F_(l j)
  ScalarField rho(g.npoints());
  Field rhoF(d * d, g);
  for (int q = 0; q < g.npoints(); ++q) {
    Mat F(d, d);
    for (int j = 1; j <= d; ++j)
      for (int i = 1; i <= d; ++i) F(i - 1, j - 1) = U.m(L.F(i, j), q);
    rho(q) = density_from_F<double>(F);
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) rhoF.m(j * d + i, q) = rho(q) * F(i, j);
  }

  // Phi-gradients of every F component and of rho F
  Field zero_t(U.ncomp(), g);
  const PhiDerivs dU = phi_differentials(g, lift, side, U, zero_t);
  Field zero_t2(d * d, g);
  const PhiDerivs dRF = phi_differentials(g, lift, side, rhoF, zero_t2);

  auto dF = [&](int l, int i, int j, int q) {  // d_l^Phi F_ij, all 1-based
    const int row = L.F(i, j);
    return l == 1 ? dU.d1.m(row, q) : dU.dtan[l - 2].m(row, q);
  };

  InvolutionResiduals out;
  out.inv_gradient = Field(d * d * (d - 1) / 2, g);
  out.inv_divergence = Field(d, g);
  out.rho_relation = ScalarField::Zero(g.npoints());

  for (int q = 0; q < g.npoints(); ++q) {
    Mat F(d, d);
    for (int j = 1; j <= d; ++j)
      for (int i = 1; i <= d; ++i) F(i - 1, j - 1) = U.m(L.F(i, j), q);

    int row = 0;
    for (int j = 1; j <= d; ++j)
      for (int k = j + 1; k <= d; ++k)
        for (int i = 1; i <= d; ++i) {
          double s = 0.0;
          for (int l = 1; l <= d; ++l)
            s += F(l - 1, k - 1) * dF(l, i, j, q) - F(l - 1, j - 1) * dF(l, i, k, q);
          out.inv_gradient.m(row++, q) = s;
        }

    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int l = 1; l <= d; ++l) {
        const int comp = j * d + (l - 1);
        s += l == 1 ? dRF.d1.m(comp, q) : dRF.dtan[l - 2].m(comp, q);
      }
      out.inv_divergence.m(j, q) = s;
    }

    if (rho_independent)
      out.rho_relation(q) = std::abs((*rho_independent)(q)-rho(q));
  }
  return out;
}

BoundaryInvolutionResiduals boundary_involution_residuals(const Grid& g,
                                                          const Lift& lift,
                                                          const MaterialParams&,
                                                          const Field& Uplus,
                                                          const Field& Uminus) {
  const int d = g.d;
  const Layout L(d);
  BoundaryInvolutionResiduals out;
  out.rho_fjn_jump = Mat::Zero(d, g.ntt());
  out.fjn_tangential = Mat::Zero(2 * (d - 1), g.ntt());
  out.key_identity = Mat::Zero(2, g.ntt());
  out.antisym_jump = Mat::Zero(d * d * (d - 1) / 2, g.ntt());

  for (int it = 0; it < g.ntt(); ++it) {
    const int q = g.pid(0, it);
    // Common boundary normal: both lifts trace to the same front there.
    const LiftPoint lp = lift.point(+1, 0, it);
    const Eigen::VectorXd N = lp.normal();

    Mat F[2];
    double rho[2];
    Eigen::VectorXd FN[2];
    const Field* Us[2] = {&Uplus, &Uminus};
    for (int s = 0; s < 2; ++s) {
      F[s] = Mat(d, d);
      for (int j = 1; j <= d; ++j)
        for (int i = 1; i <= d; ++i) F[s](i - 1, j - 1) = Us[s]->m(L.F(i, j), q);
      rho[s] = density_from_F<double>(F[s]);
      FN[s] = Eigen::VectorXd(d);
      for (int j = 0; j < d; ++j) FN[s](j) = F[s].col(j).dot(N);
    }

    for (int j = 0; j < d; ++j)
      out.rho_fjn_jump(j, it) = rho[0] * FN[0](j) - rho[1] * FN[1](j);
    for (int j = 1; j < d; ++j) {
      out.fjn_tangential(j - 1, it) = FN[0](j);
      out.fjn_tangential(d - 1 + j - 1, it) = FN[1](j);
    }
    for (int s = 0; s < 2; ++s)
      out.key_identity(s, it) = rho[s] * FN[s](0) - varrho_eval(F[s]);

    int row = 0;
    for (int j = 0; j < d; ++j)
      for (int k = j + 1; k < d; ++k)
        for (int i = 0; i < d; ++i)
          out.antisym_jump(row++, it) =
              (rho[0] * FN[0](k) * F[0](i, j) - rho[0] * FN[0](j) * F[0](i, k)) -
              (rho[1] * FN[1](k) * F[1](i, j) - rho[1] * FN[1](j) * F[1](i, k));
  }
  return out;
}

}  // namespace tecd
