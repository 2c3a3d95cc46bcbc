#include "tecd/linearized.hpp"

namespace tecd {

namespace {

// x1 profile equal to 1 at the wall with slope -1/2 there; the Gaussian
// factor kills it long before the outflow boundary
Jet wall_profile(const Chi&, double x1) {
  Jet j;
  const double s = x1 / 1.1;
  if (s * s > 600.0) return j;
  const double G = std::exp(-s * s);
  j.v = (1.0 - 0.5 * x1) * G;
  j.d(1) = -0.5 * G + (1.0 - 0.5 * x1) * (-2.0 * s / 1.1) * G;
  return j;
}

// interior bump; the Gaussian tail at both walls is far below the
// constraint tolerance
Jet interior_profile(const Chi&, double x1) {
  Jet j;
  const double s = (x1 - 2.4) / 0.5;
  if (s * s > 600.0) return j;
  j.v = std::exp(-s * s);
  j.d(1) = -2.0 * s / 0.5 * std::exp(-s * s);
  return j;
}

Jet cos_mode(double x, int slot) {
  Jet j;
  j.v = std::cos(2.0 * M_PI * x);
  j.d(slot) = -2.0 * M_PI * std::sin(2.0 * M_PI * x);
  return j;
}

Jet sin_mode(double x, int slot) {
  Jet j;
  j.v = std::sin(2.0 * M_PI * x);
  j.d(slot) = 2.0 * M_PI * std::cos(2.0 * M_PI * x);
  return j;
}

Jet det_jet(const std::vector<std::vector<Jet>>& F, int d) {
  if (d == 2) return F[0][0] * F[1][1] - F[0][1] * F[1][0];
  return F[0][0] * (F[1][1] * F[2][2] - F[1][2] * F[2][1]) -
         F[0][1] * (F[1][0] * F[2][2] - F[1][2] * F[2][0]) +
         F[0][2] * (F[1][0] * F[2][1] - F[1][1] * F[2][0]);
}

}  // namespace

BasicState BasicState::background(const Grid& grid, const BackgroundState& bgs,
                                  const Chi& chi) {
  return perturbed(grid, bgs, PerturbationSpec{}, chi);
}

BasicState BasicState::perturbed(const Grid& grid, const BackgroundState& bgs,
                                 const PerturbationSpec& spec, const Chi& chi) {
  BasicState bs;
  bs.g = grid;
  bs.mp = bgs.params;
  bs.bg = bgs;
  const int d = grid.d;
  const Layout L(d);
  const double gamma = bs.mp.eos.gamma;

  // static front
  Eigen::ArrayXd phi(grid.ntt());
  for (int it = 0; it < grid.ntt(); ++it) {
    double p = std::cos(2.0 * M_PI * grid.x2(it));
    if (d == 3) p += std::cos(2.0 * M_PI * grid.x3(it));
    phi(it) = spec.amp_phi * p;
  }
  bs.lift = Lift::make(grid, chi, phi, Eigen::ArrayXd::Zero(grid.ntt()));
  // closed-form front derivatives instead of the stencil defaults
  for (int it = 0; it < grid.ntt(); ++it) {
    bs.lift.dtan_phi[0](it) =
        -spec.amp_phi * 2.0 * M_PI * std::sin(2.0 * M_PI * grid.x2(it));
    bs.lift.d2tan_phi[0][0](it) =
        -spec.amp_phi * 4.0 * M_PI * M_PI * std::cos(2.0 * M_PI * grid.x2(it));
    if (d == 3) {
      bs.lift.dtan_phi[1](it) =
          -spec.amp_phi * 2.0 * M_PI * std::sin(2.0 * M_PI * grid.x3(it));
      bs.lift.d2tan_phi[1][1](it) =
          -spec.amp_phi * 4.0 * M_PI * M_PI * std::cos(2.0 * M_PI * grid.x3(it));
      bs.lift.d2tan_phi[0][1](it) = 0.0;
      bs.lift.d2tan_phi[1][0](it) = 0.0;
    }
  }

  for (int s = 0; s < 2; ++s) {
    bs.U[s] = Field(L.n(), grid);
    bs.dU[s].assign(d + 1, Field(L.n(), grid));
  }

  const double a1[2] = {spec.amp_f11, 0.6 * spec.amp_f11};
  const double f11_0[2] = {bgs.stretch_plus(0) + a1[0], bgs.stretch_minus(0) + a1[1]};
  const double jump_f11_0 = f11_0[0] - f11_0[1];

  double Kmax = spec.amp_phi;

  for (int i1 = 0; i1 <= grid.n1; ++i1) {
    const Jet eta = wall_profile(chi, grid.x1(i1));
    const Jet bump = interior_profile(chi, grid.x1(i1));
    for (int it = 0; it < grid.ntt(); ++it) {
      const int q = grid.pid(i1, it);
      const double x2 = grid.x2(it), x3 = grid.x3(it);
      const Jet c2m = cos_mode(x2, 2);
      const Jet s2m = sin_mode(x2, 2);
      const Jet c3m = d == 3 ? cos_mode(x3, 3) : Jet::c(1.0);

      // front gradient as jets in the tangential slots
      std::vector<Jet> dphi(d - 1);
      {
        Jet t;
        t.v = -spec.amp_phi * 2.0 * M_PI * std::sin(2.0 * M_PI * x2);
        t.d(2) = -spec.amp_phi * 4.0 * M_PI * M_PI * std::cos(2.0 * M_PI * x2);
        dphi[0] = t;
        if (d == 3) {
          Jet u;
          u.v = -spec.amp_phi * 2.0 * M_PI * std::sin(2.0 * M_PI * x3);
          u.d(3) = -spec.amp_phi * 4.0 * M_PI * M_PI * std::cos(2.0 * M_PI * x3);
          dphi[1] = u;
        }
      }

      // tangential diagonal stretches at the wall, common to both sides
      std::vector<Jet> diag0(d);
      for (int j = 1; j < d; ++j)
        diag0[j] = Jet::c(bgs.stretch_plus(j)) +
                   0.5 * spec.amp_tan * (j == 1 ? c2m : c3m);

      for (int s = 0; s < 2; ++s) {
        const double sideamp = s == 0 ? 1.0 : -0.8;
        std::vector<std::vector<Jet>> F(d, std::vector<Jet>(d));

        F[0][0] = Jet::c(s == 0 ? bgs.stretch_plus(0) : bgs.stretch_minus(0)) +
                  a1[s] * eta;
        for (int j = 1; j < d; ++j)
          F[j][j] = diag0[j] + (sideamp * spec.amp_tan) * bump;
        // off-diagonal blocks: wall values forced by the front, bumps inside
        for (int j = 1; j < d; ++j) {
          F[0][j] = dphi[j - 1] * diag0[j] * eta +
                    (spec.amp_offdiag * sideamp) * bump * c2m;
          F[j][0] = Jet::c(-f11_0[s]) * dphi[j - 1] * eta +
                    (spec.amp_offdiag * sideamp) * bump * s2m;
        }
        if (d == 3) {
          F[1][2] = (spec.amp_offdiag * sideamp) * bump * c3m;
          F[2][1] = (0.7 * spec.amp_offdiag) * bump * s2m;
        }

        // entropy: free profile on the plus side, wall-matched on the minus
        Jet S;
        if (s == 0) {
          S = Jet::c(bgs.S_plus) + spec.amp_S * eta + spec.amp_S * bump * c2m;
        } else {
          // wall traces of both sides as jets in x' only
          auto wall_F = [&](int side) {
            std::vector<std::vector<Jet>> W0(d, std::vector<Jet>(d, Jet::c(0.0)));
            W0[0][0] = Jet::c(f11_0[side]);
            for (int j = 1; j < d; ++j) W0[j][j] = diag0[j];
            for (int j = 1; j < d; ++j) {
              W0[0][j] = dphi[j - 1] * diag0[j];
              W0[j][0] = Jet::c(-f11_0[side]) * dphi[j - 1];
            }
            return W0;
          };
          const auto Fp0 = wall_F(0);
          const auto Fm0 = wall_F(1);
          const Jet Sp0 = Jet::c(bgs.S_plus + spec.amp_S);
          const Jet rho_p0 = Jet::c(1.0) / det_jet(Fp0, d);
          const Jet p_p0 = jet_exp(Sp0) * jet_pow(rho_p0, gamma);
          Jet F1N0 = Fp0[0][0];
          for (int l = 1; l < d; ++l) F1N0 = F1N0 - dphi[l - 1] * Fp0[l][0];
          const Jet rho_m0 = Jet::c(1.0) / det_jet(Fm0, d);
          const Jet p_req = p_p0 - rho_p0 * F1N0 * Jet::c(jump_f11_0);
          if (!(p_req.v > 0.0)) throw NegativeTargetPressure(p_req.v);
          const Jet Sm0 = jet_log(p_req) - Jet::c(gamma) * jet_log(rho_m0);
          S = Jet::c(bgs.S_minus) + (Sm0 - Jet::c(bgs.S_minus)) * eta +
              spec.amp_S * bump * s2m;
        }

        // interior-only velocity
        std::vector<Jet> v(d);
        v[0] = (spec.amp_v * sideamp) * bump * c2m;
        v[1] = spec.amp_v * bump * s2m;
        if (d == 3) v[2] = (0.5 * spec.amp_v) * bump * c3m;

        const Jet det = det_jet(F, d);
        if (!(det.v > 0.0)) throw NonOrientationPreserving(det.v);
        const Jet rho = Jet::c(1.0) / det;
        const Jet p = jet_exp(S) * jet_pow(rho, gamma);

        auto put = [&](int comp, const Jet& jet) {
          bs.U[s].m(comp, q) = jet.v;
          for (int mu = 0; mu <= d; ++mu) bs.dU[s][mu].m(comp, q) = jet.d(mu);
        };
        put(L.p(), p);
        for (int i = 1; i <= d; ++i) put(L.v(i), v[i - 1]);
        for (int j = 1; j <= d; ++j)
          for (int i = 1; i <= d; ++i) put(L.F(i, j), F[i - 1][j - 1]);
        put(L.S(), S);

        const Vec ubg = bgs.state(s == 0 ? +1 : -1).to_vector(bs.mp);
        Kmax = std::max(Kmax, (bs.U[s].m.col(q) - ubg).lpNorm<Eigen::Infinity>());
      }
    }
  }
  bs.K = spec.trivial() ? 0.0 : Kmax;

  if (bs.lift.min_d1(+1) < 0.5 || bs.lift.min_d1(-1) < 0.5)
    throw DegenerateLift(std::min(bs.lift.min_d1(+1), bs.lift.min_d1(-1)));

  // boundary caches
  bs.bdry.resize(grid.ntt());
  for (int it = 0; it < grid.ntt(); ++it) {
    BoundaryPoint& bp = bs.bdry[it];
    const int q = grid.pid(0, it);
    bp.N = bs.lift.point(+1, 0, it).normal();
    bp.F_plus = Mat(d, d);
    Mat Fm(d, d);
    for (int j = 1; j <= d; ++j)
      for (int i = 1; i <= d; ++i) {
        bp.F_plus(i - 1, j - 1) = bs.U[0].m(L.F(i, j), q);
        Fm(i - 1, j - 1) = bs.U[1].m(L.F(i, j), q);
      }
    bp.varrho = varrho_eval(bp.F_plus);
    bp.dvarrho = varrho_grad(bp.F_plus);
    bp.jump_f11 = bp.F_plus(0, 0) - Fm(0, 0);
    bp.d1v_plus = Eigen::VectorXd(d);
    bp.d1v_minus = Eigen::VectorXd(d);
    for (int i = 1; i <= d; ++i) {
      bp.d1v_plus(i - 1) = bs.dU[0][1].m(L.v(i), q);
      bp.d1v_minus(i - 1) = bs.dU[1][1].m(L.v(i), q);
    }
    bp.c1_row1 = bp.N.dot(bp.d1v_plus);
    bp.vtan_plus = Eigen::VectorXd(d - 1);
    for (int i = 2; i <= d; ++i) bp.vtan_plus(i - 2) = bs.U[0].m(L.v(i), q);

    double b1 = bs.dU[0][1].m(L.p(), q) + bs.dU[1][1].m(L.p(), q) -
                bp.varrho *
                    (bs.dU[0][1].m(L.F(1, 1), q) + bs.dU[1][1].m(L.F(1, 1), q));
    for (int j = 1; j <= d; ++j)
      for (int i = 1; i <= d; ++i)
        b1 -= bp.jump_f11 * bp.dvarrho(i - 1, j - 1) * bs.dU[0][1].m(L.F(i, j), q);
    bp.b1 = b1;
    bp.bj = Eigen::VectorXd(d - 1);
    for (int j = 2; j <= d; ++j)
      bp.bj(j - 2) =
          (bs.dU[0][1].m(L.F(1, 1), q) + bs.dU[1][1].m(L.F(1, 1), q)) *
              bs.lift.dtan_phi[j - 2](it) +
          bs.dU[0][1].m(L.F(j, 1), q) + bs.dU[1][1].m(L.F(j, 1), q);
  }

  const double resid = bs.constraint_residual();
  if (resid > 1e-10)
    throw ConstraintViolated("basic state violates the interface constraints: " +
                             std::to_string(resid));
  return bs;
}

CoefficientDerivs BasicState::coeff_derivs(int side, int i1, int it) const {
  const int s = side_index(side);
  const int q = g.pid(i1, it);
  CoefficientDerivs cd = CoefficientDerivs::zero(g.d, Layout(g.d).n());
  for (int mu = 0; mu <= g.d; ++mu) {
    cd.dU[mu] = dU[s][mu].m.col(q);
    double ddt, dd1;
    Eigen::VectorXd ddtan;
    // chi is even, so the tabulated profiles serve both lifting functions
    lift.point_second(i1, it, mu, ddt, dd1, ddtan);
    cd.d_dt(mu) = ddt;
    cd.d_d1(mu) = dd1;
    cd.d_dtan[mu] = ddtan;
  }
  return cd;
}

double BasicState::constraint_residual() const {
  const int d = g.d;
  const Layout L(d);
  double worst = 0.0;

  const BoundaryInvolutionResiduals binv =
      boundary_involution_residuals(g, lift, mp, U[0], U[1]);
  worst = std::max(worst, binv.rho_fjn_jump.lpNorm<Eigen::Infinity>());
  worst = std::max(worst, binv.fjn_tangential.lpNorm<Eigen::Infinity>());
  worst = std::max(worst, binv.antisym_jump.lpNorm<Eigen::Infinity>());
  worst = std::max(worst, binv.key_identity.lpNorm<Eigen::Infinity>());

  for (int it = 0; it < g.ntt(); ++it) {
    const int q = g.pid(0, it);
    JumpState js;
    js.plus = ThermoState::from_vector(U[0].m.col(q), mp);
    js.minus = ThermoState::from_vector(U[1].m.col(q), mp);
    js.front.grad = Eigen::VectorXd(d - 1);
    for (int j = 0; j < d - 1; ++j) js.front.grad(j) = lift.dtan_phi[j](it);
    js.front.dt_phi = lift.dt_phi(it);
    worst = std::max(
        worst,
        boundary_operator(js, mp, BoundaryForm::General).lpNorm<Eigen::Infinity>());

    // EOS consistency of the carried pressure
    for (int s = 0; s < 2; ++s) {
      const ThermoState st = s == 0 ? js.plus : js.minus;
      const double pe = mp.eos.eval(density_from_F<double>(st.F), st.S).p;
      worst = std::max(worst, std::abs(pe - st.p));
    }

    // tangential transport of the tangential columns on the wall
    for (int s = 0; s < 2; ++s)
      for (int j = 2; j <= d; ++j)
        for (int i = 1; i <= d; ++i) {
          double r = dU[s][0].m(L.F(i, j), q);
          for (int l = 2; l <= d; ++l) {
            r += U[s].m(L.v(l), q) * dU[s][l].m(L.F(i, j), q);
            r -= U[s].m(L.F(l, j), q) * dU[s][l].m(L.v(i), q);
          }
          worst = std::max(worst, std::abs(r));
        }
  }
  return worst;
}

}  // namespace tecd
