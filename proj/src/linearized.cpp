#include "tecd/linearized.hpp"

namespace tecd {

Field lift_front_perturbation(const Grid& g, const Lift& lift,
                              const Eigen::ArrayXd& psi) {
  Field out(1, g);
  for (int i1 = 0; i1 <= g.n1; ++i1)
    for (int it = 0; it < g.ntt(); ++it)
      out.m(0, g.pid(i1, it)) = lift.chi_v(i1) * psi(it);
  return out;
}

Field good_unknowns(const Field& V, const Eigen::ArrayXd& psi, const BasicState& bs,
                    int side) {
  const int s = bs.side_index(side);
  Field out = V;
  for (int i1 = 0; i1 <= bs.g.n1; ++i1)
    for (int it = 0; it < bs.g.ntt(); ++it) {
      const int q = bs.g.pid(i1, it);
      const double d1 = bs.lift.point(side, i1, it).d1;
      out.m.col(q) -= (bs.lift.chi_v(i1) * psi(it) / d1) * bs.dU[s][1].m.col(q);
    }
  return out;
}

Field good_unknowns_inverse(const Field& Vdot, const Eigen::ArrayXd& psi,
                            const BasicState& bs, int side) {
  const int s = bs.side_index(side);
  Field out = Vdot;
  for (int i1 = 0; i1 <= bs.g.n1; ++i1)
    for (int it = 0; it < bs.g.ntt(); ++it) {
      const int q = bs.g.pid(i1, it);
      const double d1 = bs.lift.point(side, i1, it).d1;
      out.m.col(q) += (bs.lift.chi_v(i1) * psi(it) / d1) * bs.dU[s][1].m.col(q);
    }
  return out;
}

Field apply_Lprime_e(const Field& Vdot, const Field& dVdot_dt, const BasicState& bs,
                     int side) {
  const Grid& g = bs.g;
  const Field d1 = deriv_x1(g, Vdot);
  std::vector<Field> dtan;
  for (int dir = 2; dir <= g.d; ++dir) dtan.push_back(deriv_tan(g, Vdot, dir));

  Field out(Vdot.ncomp(), g);
  for (int i1 = 0; i1 <= g.n1; ++i1)
    for (int it = 0; it < g.ntt(); ++it) {
      const int q = g.pid(i1, it);
      const StatePoint sp = bs.state_point(side, q);
      const LiftPoint lp = bs.lift_point(side, i1, it);
      const CoefficientDerivs cd = bs.coeff_derivs(side, i1, it);
      Vec r = assemble_a0(sp, bs.mp) * dVdot_dt.m.col(q) +
              assemble_a1tilde(sp, bs.mp, lp) * d1.m.col(q);
      for (int dir = 2; dir <= g.d; ++dir)
        r += assemble_ai(sp, bs.mp, dir) * dtan[dir - 2].m.col(q);
      r += apply_C(sp, bs.mp, lp, cd, Vec(Vdot.m.col(q)));
      out.m.col(q) = r;
    }
  return out;
}

Field apply_Lprime_full(const Field& V, const Field& dV_dt, const Eigen::ArrayXd& psi,
                        const Eigen::ArrayXd& dpsi_dt, const BasicState& bs,
                        int side) {
  const Grid& g = bs.g;
  const int s = bs.side_index(side);
  Field out = apply_Lprime_e(V, dV_dt, bs, side);

  std::vector<Eigen::ArrayXd> dtan_psi;
  for (int dir = 2; dir <= g.d; ++dir) dtan_psi.push_back(trace_deriv_tan(g, psi, dir));

  for (int i1 = 0; i1 <= g.n1; ++i1)
    for (int it = 0; it < g.ntt(); ++it) {
      const int q = g.pid(i1, it);
      const StatePoint sp = bs.state_point(side, q);
      const LiftPoint lp = bs.lift_point(side, i1, it);
      // derivatives of Psi = chi(x1) psi(x'): the cutoff profile is even,
      // so both lifting functions share them
      const double dPsi_t = bs.lift.chi_v(i1) * dpsi_dt(it);
      const double dPsi_1 = bs.lift.chi_d1(i1) * psi(it);
      Mat LPsi = assemble_a0(sp, bs.mp) * dPsi_t +
                 assemble_a1tilde(sp, bs.mp, lp) * dPsi_1;
      for (int dir = 2; dir <= g.d; ++dir)
        LPsi += assemble_ai(sp, bs.mp, dir) * (bs.lift.chi_v(i1) * dtan_psi[dir - 2](it));
      out.m.col(q) -= (LPsi * bs.dU[s][1].m.col(q)) / lp.d1;
    }
  return out;
}

Mat apply_Bprime_e(const BoundaryTrace& tr, const BasicState& bs) {
  const Grid& g = bs.g;
  const int d = g.d;
  const Layout L(d);
  Mat out = Mat::Zero(2 * d + 1, g.ntt());

  std::vector<Eigen::ArrayXd> dtan_psi;
  for (int dir = 2; dir <= d; ++dir) dtan_psi.push_back(trace_deriv_tan(g, tr.psi, dir));

  for (int it = 0; it < g.ntt(); ++it) {
    const BasicState::BoundaryPoint& bp = bs.bdry[it];
    const Vec vp = tr.Vplus.col(it), vm = tr.Vminus.col(it);
    const double psi = tr.psi(it);

    double row0 = tr.dpsi_dt(it);
    for (int i = 2; i <= d; ++i) row0 += bp.vtan_plus(i - 2) * dtan_psi[i - 2](it);
    for (int i = 1; i <= d; ++i) row0 -= vp(L.v(i)) * bp.N(i - 1);
    row0 -= bp.c1_row1 * psi;
    out(0, it) = row0;

    for (int i = 1; i <= d; ++i)
      out(i, it) = vp(L.v(i)) - vm(L.v(i)) +
                   psi * (bp.d1v_plus(i - 1) + bp.d1v_minus(i - 1));

    double row3 = vp(L.p()) - vm(L.p()) -
                  bp.varrho * (vp(L.F(1, 1)) - vm(L.F(1, 1))) + bp.b1 * psi;
    for (int j = 1; j <= d; ++j)
      for (int i = 1; i <= d; ++i)
        row3 -= bp.jump_f11 * bp.dvarrho(i - 1, j - 1) * vp(L.F(i, j));
    out(d + 1, it) = row3;

    for (int j = 2; j <= d; ++j) {
      const double dphi = bs.lift.dtan_phi[j - 2](it);
      out(d + j, it) = (vp(L.F(1, 1)) - vm(L.F(1, 1))) * dphi + vp(L.F(j, 1)) -
                       vm(L.F(j, 1)) + bp.jump_f11 * dtan_psi[j - 2](it) +
                       bp.bj(j - 2) * psi;
    }
  }
  return out;
}

Field to_W(const Field& Vdot, const BasicState& bs, int side) {
  const Grid& g = bs.g;
  Field out(Vdot.ncomp(), g);
  for (int i1 = 0; i1 <= g.n1; ++i1)
    for (int it = 0; it < g.ntt(); ++it) {
      const int q = g.pid(i1, it);
      const Mat J = assemble_J(bs.state_point(side, q), bs.mp,
                               bs.lift_point(side, i1, it));
      out.m.col(q) = J.partialPivLu().solve(Vdot.m.col(q));
    }
  return out;
}

Field from_W(const Field& W, const BasicState& bs, int side) {
  const Grid& g = bs.g;
  Field out(W.ncomp(), g);
  for (int i1 = 0; i1 <= g.n1; ++i1)
    for (int it = 0; it < g.ntt(); ++it) {
      const int q = g.pid(i1, it);
      const Mat J = assemble_J(bs.state_point(side, q), bs.mp,
                               bs.lift_point(side, i1, it));
      out.m.col(q) = J * W.m.col(q);
    }
  return out;
}

Mat boundary_conditions_W(const Mat& Wplus, const Mat& Wminus,
                          const Eigen::ArrayXd& psi, const Eigen::ArrayXd& dpsi_dt,
                          const Mat& gdata, const BasicState& bs) {
  const Grid& g = bs.g;
  const int d = g.d;
  const WLayout W(d);
  Mat out = Mat::Zero(2 * d + 1, g.ntt());

  std::vector<Eigen::ArrayXd> dtan_psi;
  for (int dir = 2; dir <= d; ++dir) dtan_psi.push_back(trace_deriv_tan(g, psi, dir));

  for (int it = 0; it < g.ntt(); ++it) {
    const BasicState::BoundaryPoint& bp = bs.bdry[it];
    const Vec wp = Wplus.col(it), wm = Wminus.col(it);

    double r1 = dpsi_dt(it);
    for (int i = 2; i <= d; ++i) r1 += bp.vtan_plus(i - 2) * dtan_psi[i - 2](it);
    r1 -= wp(W.w2()) + bp.c1_row1 * psi(it) + gdata(0, it);
    out(0, it) = r1;

    // velocity rows: the first is contracted with the normal
    Eigen::VectorXd gn(d);
    for (int i = 1; i <= d; ++i) gn(i - 1) = gdata(i, it);
    out(1, it) = wp(W.w2()) - wm(W.w2()) +
                 psi(it) * bp.N.dot(bp.d1v_plus + bp.d1v_minus) - bp.N.dot(gn);
    for (int i = 2; i <= d; ++i)
      out(i, it) = wp(W.wv(i)) - wm(W.wv(i)) +
                   psi(it) * (bp.d1v_plus(i - 1) + bp.d1v_minus(i - 1)) - gn(i - 1);

    double r3 = wp(W.wd2()) - wm(W.wd2()) + bp.b1 * psi(it) - gdata(d + 1, it);
    for (int j = 2; j <= d; ++j)
      for (int i = 2; i <= d; ++i)
        r3 -= bp.jump_f11 * bp.dvarrho(i - 1, j - 1) * wp(W.wF(i, j));
    out(d + 1, it) = r3;

    for (int j = 2; j <= d; ++j)
      out(d + j, it) = wp(W.wdj(j)) - wm(W.wdj(j)) +
                       bp.jump_f11 * dtan_psi[j - 2](it) + bp.bj(j - 2) * psi(it) -
                       gdata(d + j, it);
  }
  return out;
}

BoundaryLift lift_boundary_source(const Mat& gdata, const Mat& dgdata_dt,
                                  const Field& f_plus, const Field& f_minus,
                                  const BasicState& bs) {
  const Grid& g = bs.g;
  const int d = g.d;
  const Layout L(d);

  auto solve_rows = [&](const Mat& rows) {
    Mat Gp = Mat::Zero(L.n(), g.ntt());
    Mat Gm = Mat::Zero(L.n(), g.ntt());
    for (int it = 0; it < g.ntt(); ++it) {
      const BasicState::BoundaryPoint& bp = bs.bdry[it];
      const double n2 = bp.N.squaredNorm();
      if (n2 < 1e-8) throw SingularBoundarySystem("degenerate boundary normal");
      Eigen::VectorXd gv(d);
      for (int i = 1; i <= d; ++i) gv(i - 1) = rows(i, it);
      const double gamma = (-rows(0, it) - gv.dot(bp.N)) / n2;
      for (int i = 1; i <= d; ++i) {
        Gp(L.v(i), it) = gv(i - 1) + gamma * bp.N(i - 1);
        Gm(L.v(i), it) = gamma * bp.N(i - 1);
      }
      Gp(L.p(), it) = rows(d + 1, it);
      for (int j = 2; j <= d; ++j) Gp(L.F(j, 1), it) = rows(d + j, it);
    }
    return std::make_pair(Gp, Gm);
  };

  const auto [Gp, Gm] = solve_rows(gdata);
  const auto [Gpt, Gmt] = solve_rows(dgdata_dt);

  auto extrude = [&](const Mat& G) {
    Field f(L.n(), g);
    for (int i1 = 0; i1 <= g.n1; ++i1)
      for (int it = 0; it < g.ntt(); ++it)
        f.m.col(g.pid(i1, it)) = bs.lift.chi_v(i1) * G.col(it);
    return f;
  };

  BoundaryLift out;
  out.Vnat_plus = extrude(Gp);
  out.Vnat_minus = extrude(Gm);
  out.dVnat_dt_plus = extrude(Gpt);
  out.dVnat_dt_minus = extrude(Gmt);
  out.ftilde_plus = f_plus;
  out.ftilde_minus = f_minus;
  out.ftilde_plus.m -= apply_Lprime_e(out.Vnat_plus, out.dVnat_dt_plus, bs, +1).m;
  out.ftilde_minus.m -= apply_Lprime_e(out.Vnat_minus, out.dVnat_dt_minus, bs, -1).m;
  return out;
}

// --------------------------------------------------------------------------
// Auxiliary quantities
// --------------------------------------------------------------------------

AuxiliaryQuantities auxiliary_eval(const Field& Wplus, const Field& Wminus,
                                   const Eigen::ArrayXd& psi, const BasicState& bs) {
  const Grid& g = bs.g;
  const int d = g.d;
  const Layout L(d);
  AuxiliaryQuantities aux;

  for (int s = 0; s < 2; ++s) {
    const int side = s == 0 ? +1 : -1;
    const Field& W = s == 0 ? Wplus : Wminus;
    const Field V = from_W(W, bs, side);

    // flux G_i = c^-2 F_i1 p + rho F_i1(V), its phi-gradient sum, and the
    // product-inside divergence form for the reconstruction residual
    Field G(d, g);
    Field q1(1, g);
    Field qi(d - 1, g);
    Field etaflux(d * d, g);  // products F_k1 F_i2 - F_k2 F_i1, k-major
    for (int i1 = 0; i1 <= g.n1; ++i1)
      for (int it = 0; it < g.ntt(); ++it) {
        const int q = g.pid(i1, it);
        const StatePoint sp = bs.state_point(side, q);
        const LiftPoint lp = bs.lift_point(side, i1, it);
        const Eigen::VectorXd N = lp.normal();
        const double p = V.m(L.p(), q);
        for (int i = 1; i <= d; ++i)
          G.m(i - 1, q) = sp.st.F(i - 1, 0) * p / sp.c2 + sp.rho * V.m(L.F(i, 1), q);
        double f1n = 0.0, nf1 = 0.0;
        for (int l = 1; l <= d; ++l) {
          f1n += sp.st.F(l - 1, 0) * N(l - 1);
          nf1 += V.m(L.F(l, 1), q) * N(l - 1);
        }
        q1.m(0, q) = f1n * p / sp.c2 + sp.rho * nf1;
        for (int i = 2; i <= d; ++i)
          qi.m(i - 2, q) =
              lp.d1 * (sp.st.F(i - 1, 0) * p / sp.c2 + sp.rho * V.m(L.F(i, 1), q));
        for (int k = 1; k <= d; ++k)
          for (int i = 1; i <= d; ++i)
            etaflux.m((k - 1) * d + (i - 1), q) =
                sp.st.F(k - 1, 0) * V.m(L.F(i, 2), q) -
                sp.st.F(k - 1, 1) * V.m(L.F(i, 1), q);
      }

    Field zt(d, g);
    const PhiDerivs dG = phi_differentials(g, bs.lift, side, G, zt);
    aux.varsigma[s] = Field(1, g);
    for (int q = 0; q < g.npoints(); ++q) {
      double sum = dG.d1.m(0, q);
      for (int i = 2; i <= d; ++i) sum += dG.dtan[i - 2].m(i - 1, q);
      aux.varsigma[s].m(0, q) = sum;
    }

    // eta and zeta from phi-gradients of the linear deformation columns
    Field zF(V.ncomp(), g);
    const PhiDerivs dV = phi_differentials(g, bs.lift, side, V, zF);
    auto dphiF = [&](int k, int i, int j, int q) {
      const int row = L.F(i, j);
      return k == 1 ? dV.d1.m(row, q) : dV.dtan[k - 2].m(row, q);
    };
    aux.eta[s] = Field(d, g);
    if (d == 3) aux.zeta[s] = Field(d, g);
    for (int q = 0; q < g.npoints(); ++q) {
      const StatePoint sp = bs.state_point(side, q);
      for (int i = 1; i <= d; ++i) {
        double e = 0.0, z = 0.0;
        for (int k = 1; k <= d; ++k) {
          e += sp.st.F(k - 1, 0) * dphiF(k, i, 2, q) -
               sp.st.F(k - 1, 1) * dphiF(k, i, 1, q);
          if (d == 3)
            z += sp.st.F(k - 1, 0) * dphiF(k, i, 3, q) -
                 sp.st.F(k - 1, 2) * dphiF(k, i, 1, q);
        }
        aux.eta[s].m(i - 1, q) = e;
        if (d == 3) aux.zeta[s].m(i - 1, q) = z;
      }
    }

    // divergence-form reconstruction residual for varsigma
    const Field dq1 = deriv_x1(g, q1);
    std::vector<Field> dqi;
    for (int dir = 2; dir <= d; ++dir) dqi.push_back(deriv_tan(g, qi, dir));
    aux.varsigma_recon[s] = Field(1, g);
    for (int i1 = 0; i1 <= g.n1; ++i1)
      for (int it = 0; it < g.ntt(); ++it) {
        const int q = g.pid(i1, it);
        const LiftPoint lp = bs.lift_point(side, i1, it);
        double r = lp.d1 * aux.varsigma[s].m(0, q) - dq1.m(0, q);
        for (int i = 2; i <= d; ++i) r -= dqi[i - 2].m(i - 2, q);
        aux.varsigma_recon[s].m(0, q) = r;
      }

    // product-inside form for eta, with the analytic coefficient gradients
    const Field zE(d * d, g);
    const PhiDerivs dEf = phi_differentials(g, bs.lift, side, etaflux, zE);
    aux.eta_recon[s] = Field(d, g);
    for (int i1 = 0; i1 <= g.n1; ++i1)
      for (int it = 0; it < g.ntt(); ++it) {
        const int q = g.pid(i1, it);
        const LiftPoint lp = bs.lift_point(side, i1, it);
        const CoefficientDerivs cd = bs.coeff_derivs(side, i1, it);
        for (int i = 1; i <= d; ++i) {
          double r = aux.eta[s].m(i - 1, q);
          for (int k = 1; k <= d; ++k) {
            const int row = (k - 1) * d + (i - 1);
            r -= k == 1 ? dEf.d1.m(row, q) : dEf.dtan[k - 2].m(row, q);
            // analytic phi-gradients of the coefficient columns
            double dFk1 = cd.dU[k](L.F(k, 1)), dFk2 = cd.dU[k](L.F(k, 2));
            if (k == 1) {
              dFk1 /= lp.d1;
              dFk2 /= lp.d1;
            } else {
              dFk1 -= lp.dtan(k - 2) / lp.d1 * cd.dU[1](L.F(k, 1));
              dFk2 -= lp.dtan(k - 2) / lp.d1 * cd.dU[1](L.F(k, 2));
            }
            r += dFk1 * V.m(L.F(i, 2), q) - dFk2 * V.m(L.F(i, 1), q);
          }
          aux.eta_recon[s].m(i - 1, q) = r;
        }
      }
  }

  // boundary fields R_j = F_j+ . N - sum_i F_ij+ di psi
  const Field Vp = from_W(Wplus, bs, +1);
  aux.Rj = Mat::Zero(d - 1, g.ntt());
  std::vector<Eigen::ArrayXd> dtan_psi;
  for (int dir = 2; dir <= d; ++dir) dtan_psi.push_back(trace_deriv_tan(g, psi, dir));
  for (int it = 0; it < g.ntt(); ++it) {
    const int q = g.pid(0, it);
    const BasicState::BoundaryPoint& bp = bs.bdry[it];
    for (int j = 2; j <= d; ++j) {
      double r = 0.0;
      for (int l = 1; l <= d; ++l) r += Vp.m(L.F(l, j), q) * bp.N(l - 1);
      for (int i = 2; i <= d; ++i)
        r -= bp.F_plus(i - 1, j - 1) * dtan_psi[i - 2](it);
      aux.Rj(j - 2, it) = r;
    }
  }
  return aux;
}

// --------------------------------------------------------------------------
// Boundary energy pieces
// --------------------------------------------------------------------------

namespace {

// tangential-time derivative D^beta on a recorded trace series; beta is
// (beta_t, beta_2[, beta_3]) and time derivatives use centered differences
Mat dtan_beta(const TraceSeries& ts, const std::vector<Mat>& rows, int k,
              const Eigen::VectorXi& beta, const Grid& g) {
  Mat cur = rows[k];
  if (beta(0) > 0) {
    // recurse on the time-differenced series
    std::vector<Mat> dt(rows.size());
    for (std::size_t i = 1; i + 1 < rows.size(); ++i)
      dt[i] = (rows[i + 1] - rows[i - 1]) / (2.0 * ts.dt);
    if (!rows.empty()) {
      dt[0] = Mat::Zero(rows[0].rows(), rows[0].cols());
      dt[rows.size() - 1] = dt[0];
    }
    Eigen::VectorXi b = beta;
    b(0) -= 1;
    return dtan_beta(ts, dt, k, b, g);
  }
  for (int dir = 2; dir <= g.d; ++dir)
    for (int rep = 0; rep < beta(dir - 1); ++rep) {
      Mat next(cur.rows(), cur.cols());
      for (int it = 0; it < g.ntt(); ++it)
        next.col(it) = (cur.col(g.tan_shift(it, dir, +1)) -
                        cur.col(g.tan_shift(it, dir, -1))) /
                       (2.0 * g.htan());
      cur = next;
    }
  return cur;
}

double tan_l2(const Grid& g, const Eigen::ArrayXd& a) {
  return std::sqrt(a.square().sum() * std::pow(g.htan(), g.d - 1));
}

}  // namespace

CancellationReport cancellation_check(const TraceSeries& series, const BasicState& bs,
                                      const Eigen::VectorXi& beta,
                                      double precondition_tol) {
  const Grid& g = bs.g;
  const int d = g.d;
  const WLayout W(d);
  CancellationReport rep;
  const std::size_t nsteps = series.t.size();
  if (nsteps < 7) throw InsufficientHistory("trace series too short");

  // rho F_1N per side on the wall (equal across sides for constrained data)
  std::vector<double> rf(2 * g.ntt());
  for (int s = 0; s < 2; ++s)
    for (int it = 0; it < g.ntt(); ++it) {
      const int q = g.pid(0, it);
      const StatePoint sp = bs.state_point(s == 0 ? +1 : -1, q);
      rf[s * g.ntt() + it] =
          sp.rho * sp.st.F.col(0).dot(bs.lift.point(s == 0 ? +1 : -1, 0, it).normal());
    }

  // psi series, its transport derivative, and the explicit front remainder
  std::vector<Mat> psi_rows(nsteps), d0psi_rows(nsteps), c1psi_rows(nsteps);
  for (std::size_t k = 0; k < nsteps; ++k) {
    psi_rows[k] = series.psi[k].matrix().transpose();
    d0psi_rows[k] = Mat::Zero(1, g.ntt());
    c1psi_rows[k] = Mat(1, g.ntt());
    for (int it = 0; it < g.ntt(); ++it)
      c1psi_rows[k](0, it) = bs.bdry[it].c1_row1 * series.psi[k](it);
  }
  for (std::size_t k = 1; k + 1 < nsteps; ++k) {
    Eigen::ArrayXd d0 = (series.psi[k + 1] - series.psi[k - 1]) / (2.0 * series.dt);
    for (int dir = 2; dir <= d; ++dir) {
      const Eigen::ArrayXd dj = trace_deriv_tan(g, series.psi[k], dir);
      for (int it = 0; it < g.ntt(); ++it)
        d0(it) += bs.bdry[it].vtan_plus(dir - 2) * dj(it);
    }
    d0psi_rows[k] = d0.matrix().transpose();
  }

  // transported tangential-block deformation traces and the contracted
  // minor-gradient series used by Q2c and the divergence identity
  std::vector<Mat> d0F_rows(nsteps), inner_rows(nsteps);
  for (std::size_t k = 0; k < nsteps; ++k) {
    d0F_rows[k] = Mat::Zero((d - 1) * (d - 1), g.ntt());
    inner_rows[k] = Mat::Zero(1, g.ntt());
  }
  for (std::size_t k = 1; k + 1 < nsteps; ++k) {
    for (int j = 2; j <= d; ++j)
      for (int i = 2; i <= d; ++i) {
        const int row = (j - 2) * (d - 1) + (i - 2);
        for (int it = 0; it < g.ntt(); ++it) {
          double v = (series.Wplus[k + 1](W.wF(i, j), it) -
                      series.Wplus[k - 1](W.wF(i, j), it)) /
                     (2.0 * series.dt);
          for (int dir = 2; dir <= d; ++dir) {
            const double djF =
                (series.Wplus[k](W.wF(i, j), g.tan_shift(it, dir, +1)) -
                 series.Wplus[k](W.wF(i, j), g.tan_shift(it, dir, -1))) /
                (2.0 * g.htan());
            v += bs.bdry[it].vtan_plus(dir - 2) * djF;
          }
          d0F_rows[k](row, it) = v;
        }
      }
    for (int it = 0; it < g.ntt(); ++it) {
      const BasicState::BoundaryPoint& bp = bs.bdry[it];
      double v = 0.0;
      for (int j = 2; j <= d; ++j)
        for (int i = 2; i <= d; ++i)
          v += bp.dvarrho(i - 1, j - 1) / bp.varrho *
               d0F_rows[k]((j - 2) * (d - 1) + (i - 2), it);
      inner_rows[k](0, it) = v;
    }
  }

  // precondition: the traces satisfy the algebraic wall rows. The front
  // transport row is excluded: its discrete residual is exactly what the
  // cancellation measures.
  for (std::size_t k = 1; k + 1 < nsteps; ++k) {
    const Eigen::ArrayXd dpsi_dt =
        (series.psi[k + 1] - series.psi[k - 1]) / (2.0 * series.dt);
    const Mat bc = boundary_conditions_W(series.Wplus[k], series.Wminus[k],
                                         series.psi[k], dpsi_dt,
                                         Mat::Zero(2 * d + 1, g.ntt()), bs);
    rep.bc_residual = std::max(
        rep.bc_residual, bc.bottomRows(2 * d).lpNorm<Eigen::Infinity>());
  }
  if (rep.bc_residual > precondition_tol)
    throw PreconditionResidualTooLarge(
        "boundary traces violate the boundary conditions: " +
        std::to_string(rep.bc_residual));

  const int margin = 2 + beta(0);
  for (std::size_t k = margin; k + margin < nsteps; ++k) {
    const Mat DWp = dtan_beta(series, series.Wplus, k, beta, g);
    const Mat DWm = dtan_beta(series, series.Wminus, k, beta, g);
    const Mat Dpsi = dtan_beta(series, psi_rows, k, beta, g);
    const Mat Dd0psi = dtan_beta(series, d0psi_rows, k, beta, g);
    const Mat Dc1psi = dtan_beta(series, c1psi_rows, k, beta, g);
    const Mat Dinner = dtan_beta(series, inner_rows, k, beta, g);

    Eigen::ArrayXd Q(g.ntt()), Q1(g.ntt()), Q2(g.ntt()), Q1a(g.ntt()), Q2a(g.ntt()),
        Q2b(g.ntt()), Q2c(g.ntt()), Q2d(g.ntt()), canc(g.ntt()), key(g.ntt());

    Mat dj_DWp[2];
    for (int dir = 2; dir <= d; ++dir) {
      dj_DWp[dir - 2] = Mat(DWp.rows(), DWp.cols());
      for (int it = 0; it < g.ntt(); ++it)
        dj_DWp[dir - 2].col(it) = (DWp.col(g.tan_shift(it, dir, +1)) -
                                   DWp.col(g.tan_shift(it, dir, -1))) /
                                  (2.0 * g.htan());
    }
    Mat dj_psi[2];
    for (int dir = 2; dir <= d; ++dir) {
      dj_psi[dir - 2] = Mat(1, g.ntt());
      for (int it = 0; it < g.ntt(); ++it)
        dj_psi[dir - 2](0, it) = (Dpsi(0, g.tan_shift(it, dir, +1)) -
                                  Dpsi(0, g.tan_shift(it, dir, -1))) /
                                 (2.0 * g.htan());
    }

    for (int it = 0; it < g.ntt(); ++it) {
      const BasicState::BoundaryPoint& bp = bs.bdry[it];
      const double rfp = rf[it], rfm = rf[g.ntt() + it];

      const double q1 = 2.0 * (DWp(W.w2(), it) * DWp(W.wd2(), it) -
                               DWm(W.w2(), it) * DWm(W.wd2(), it));
      double q2 = 0.0;
      for (int j = 2; j <= d; ++j)
        q2 += -2.0 * (rfp * DWp(W.wv(j), it) * DWp(W.wdj(j), it) -
                      rfm * DWm(W.wv(j), it) * DWm(W.wdj(j), it));
      Q1(it) = q1;
      Q2(it) = q2;
      Q(it) = q1 + q2;

      double q1a = 0.0;
      for (int j = 2; j <= d; ++j)
        for (int i = 2; i <= d; ++i)
          q1a += 2.0 * bp.jump_f11 * bp.dvarrho(i - 1, j - 1) * DWp(W.wF(i, j), it) *
                 DWp(W.w2(), it);
      Q1a(it) = q1a;

      double q2a = 0.0, q2b = 0.0;
      for (int j = 2; j <= d; ++j) {
        q2a += 2.0 * bp.varrho * bp.jump_f11 * dj_psi[j - 2](0, it) *
               DWp(W.wv(j), it);
        q2b += -2.0 * bp.varrho * bp.jump_f11 * Dpsi(0, it) *
               dj_DWp[j - 2](W.wv(j), it);
      }
      Q2a(it) = q2a;
      Q2b(it) = q2b;
      Q2c(it) = 2.0 * bp.varrho * bp.jump_f11 * Dpsi(0, it) * Dinner(0, it);

      double q2d = 0.0, rem = 0.0;
      for (int j = 2; j <= d; ++j)
        for (int i = 2; i <= d; ++i) {
          const double c = -2.0 * bp.jump_f11 * bp.dvarrho(i - 1, j - 1) *
                           DWp(W.wF(i, j), it);
          q2d += c * Dd0psi(0, it);
          rem += c * Dc1psi(0, it);
        }
      Q2d(it) = q2d;
      canc(it) = q1a + q2d - rem;

      double r = 0.0;
      for (int j = 2; j <= d; ++j) {
        const double djW = (series.Wplus[k](W.wv(j), g.tan_shift(it, j, +1)) -
                            series.Wplus[k](W.wv(j), g.tan_shift(it, j, -1))) /
                           (2.0 * g.htan());
        r += djW;
      }
      for (int j = 2; j <= d; ++j)
        for (int i = 2; i <= d; ++i)
          r += bp.dvarrho(i - 1, j - 1) / bp.varrho *
               d0F_rows[k]((j - 2) * (d - 1) + (i - 2), it);
      key(it) = r;
    }

    rep.Q = std::max(rep.Q, tan_l2(g, Q));
    rep.Q1 = std::max(rep.Q1, tan_l2(g, Q1));
    rep.Q2 = std::max(rep.Q2, tan_l2(g, Q2));
    rep.Q1a = std::max(rep.Q1a, tan_l2(g, Q1a));
    rep.Q2a = std::max(rep.Q2a, tan_l2(g, Q2a));
    rep.Q2b = std::max(rep.Q2b, tan_l2(g, Q2b));
    rep.Q2c = std::max(rep.Q2c, tan_l2(g, Q2c));
    rep.Q2d = std::max(rep.Q2d, tan_l2(g, Q2d));
    rep.cancellation_residual = std::max(rep.cancellation_residual, tan_l2(g, canc));
    rep.key_identity_residual = std::max(rep.key_identity_residual, tan_l2(g, key));
  }
  return rep;
}

}  // namespace tecd
