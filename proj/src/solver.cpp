#include "tecd/solver.hpp"

#include <Eigen/Eigenvalues>

namespace tecd {

void BumpSource::fill(double t, const Grid& g, Field& fplus, Field& fminus) const {
  const double r = amplitude * ramp(t);
  fplus.m.setZero();
  fminus.m.setZero();
  if (r == 0.0) return;
  for (int i1 = 0; i1 <= g.n1; ++i1) {
    const double bx = bump(g.x1(i1));
    if (bx == 0.0) continue;
    for (int it = 0; it < g.ntt(); ++it) {
      double tanf = std::cos(2.0 * M_PI * mode * g.x2(it));
      if (g.d == 3) tanf *= std::cos(2.0 * M_PI * mode * g.x3(it));
      const double val = r * bx * tanf;
      const int q = g.pid(i1, it);
      for (int c : components) {
        fplus.m(c, q) = val;
        fminus.m(c, q) = 0.7 * val;
      }
    }
  }
}

Sources BumpSource::as_sources(const Grid& g) const {
  Sources s;
  const BumpSource copy = *this;
  s.f = [copy, g](double t, Field& fp, Field& fm) { copy.fill(t, g, fp, fm); };
  s.has_f = amplitude != 0.0;
  s.has_g = false;
  return s;
}

std::vector<double> EnergyLedger::column(const std::string& name) const {
  const int idx = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const Vec& r : rows) out.push_back(r(idx));
  return out;
}

int EnergyLedger::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  throw ConfigError("no ledger column named " + name);
}

// --------------------------------------------------------------------------
// setup
// --------------------------------------------------------------------------

Solver::Solver(const BasicState& bs, const SolverOptions& opts)
    : bs_(bs), opts_(opts), g_(bs.g) {
  const int d = g_.d;
  n_ = Layout(d).n();
  const bool constant = bs.K == 0.0;

  double lam1_max = 0.0, lamt_max = 0.0;
  for (int s = 0; s < 2; ++s) {
    const int side = s == 0 ? +1 : -1;
    SideOps& ops = side_[s];
    ops.constant = constant;
    const int npts = constant ? 1 : g_.npoints();
    ops.M.resize(static_cast<std::size_t>(npts) * d);
    ops.M4.resize(npts);
    ops.Msrc.resize(npts);
    ops.Jmap.resize(npts);
    ops.alpha.resize(constant ? 1 : g_.npoints());

    for (int i1 = 0; i1 <= (constant ? 0 : g_.n1); ++i1)
      for (int it = 0; it < (constant ? 1 : g_.ntt()); ++it) {
        const int q = constant ? 0 : g_.pid(i1, it);
        const StatePoint sp = bs.state_point(side, q);
        const LiftPoint lp = bs.lift_point(side, i1, it);
        const CoefficientMatrices cm = assemble_coefficients(sp, bs.mp, lp, side);
        const Mat calA4 =
            assemble_calA4(sp, bs.mp, lp, bs.coeff_derivs(side, i1, it));
        Eigen::LLT<Mat> llt(cm.calA[0]);
        if (llt.info() != Eigen::Success)
          throw ModelError("transformed symmetrizer not positive definite");
        for (int j = 1; j <= d; ++j)
          ops.M[static_cast<std::size_t>(q) * d + (j - 1)] = llt.solve(cm.calA[j]);
        ops.M4[q] = llt.solve(calA4);
        ops.Msrc[q] = llt.solve(cm.J.transpose());
        ops.Jmap[q] = cm.J;

        Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges1(cm.calA[1], cm.calA[0]);
        const double a1 = ges1.eigenvalues().cwiseAbs().maxCoeff();
        ops.alpha(q) = a1;
        lam1_max = std::max(lam1_max, a1);
        for (int j = 2; j <= d; ++j) {
          Eigen::GeneralizedSelfAdjointEigenSolver<Mat> gesj(cm.calA[j], cm.calA[0]);
          lamt_max = std::max(lamt_max, gesj.eigenvalues().cwiseAbs().maxCoeff());
        }
      }

    // exact-state symmetrizer for the instant tangential energy
    LiftPoint lp0 = LiftPoint::identity(d);
    lp0.d1 = side;
    etan_A0_[s] =
        assemble_coefficients(StatePoint::make(bs.bg.state(side), bs.mp), bs.mp, lp0,
                              side)
            .calA[0];
  }

  lambda_max_ = std::max(lam1_max, lamt_max);
  const double rate = lam1_max / g_.h1() + (d - 1) * lamt_max / g_.htan();
  const double dt_raw = opts.cfl / rate;
  steps_ = static_cast<long>(std::ceil(opts.T / dt_raw));
  dt_ = opts.T / static_cast<double>(steps_);
  if (!(dt_ > 0.0) || !(dt_ <= opts.cfl / rate * 1.0000001))
    throw CFLViolation("time step does not satisfy the CFL bound");

  // boundary closure, one factored system per tangential node
  closure_.resize(g_.ntt());
  const WLayout W(d);
  double worst_cond = 0.0;
  for (int it = 0; it < g_.ntt(); ++it) {
    BoundaryClosure& bc = closure_[it];
    Mat A = Mat::Zero(2 * n_, 2 * n_);
    int row = 0;

    for (int s = 0; s < 2; ++s) {
      const int side = s == 0 ? +1 : -1;
      const int q = g_.pid(0, it);
      const StatePoint sp = bs.state_point(side, q);
      const LiftPoint lp = bs.lift_point(side, 0, it);
      const CoefficientMatrices cm = assemble_coefficients(sp, bs.mp, lp, side);
      Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(cm.calA[1], cm.calA[0]);
      const double scale = std::max(1.0, ges.eigenvalues().cwiseAbs().maxCoeff());
      Mat rows(n_ - d, n_);
      int r = 0;
      for (int k = 0; k < n_; ++k) {
        if (ges.eigenvalues()(k) > 1e-8 * scale) continue;  // incoming: solved for
        if (r == n_ - d)
          throw BoundarySolveSingular("wrong incoming characteristic count");
        rows.row(r++) = ges.eigenvectors().col(k).transpose() * cm.calA[0];
      }
      if (r != n_ - d)
        throw BoundarySolveSingular("wrong incoming characteristic count");
      if (s == 0)
        bc.out_rows_plus = rows;
      else
        bc.out_rows_minus = rows;
      A.block(row, s * n_, n_ - d, n_) = rows;
      row += n_ - d;
    }

    // boundary-condition rows
    const BasicState::BoundaryPoint& bp = bs.bdry[it];
    bc.bc_plus = Mat::Zero(2 * d, n_);
    bc.bc_minus = Mat::Zero(2 * d, n_);
    bc.bc_psi = Vec::Zero(2 * d);
    bc.bc_dpsi = Mat::Zero(2 * d, d - 1);

    bc.bc_plus(0, W.w2()) = 1.0;
    bc.bc_minus(0, W.w2()) = -1.0;
    bc.bc_psi(0) = -bp.N.dot(bp.d1v_plus + bp.d1v_minus);
    for (int i = 2; i <= d; ++i) {
      bc.bc_plus(i - 1, W.wv(i)) = 1.0;
      bc.bc_minus(i - 1, W.wv(i)) = -1.0;
      bc.bc_psi(i - 1) = -(bp.d1v_plus(i - 1) + bp.d1v_minus(i - 1));
    }
    bc.bc_plus(d, W.wd2()) = 1.0;
    bc.bc_minus(d, W.wd2()) = -1.0;
    for (int j = 2; j <= d; ++j)
      for (int i = 2; i <= d; ++i)
        bc.bc_plus(d, W.wF(i, j)) = -bp.jump_f11 * bp.dvarrho(i - 1, j - 1);
    bc.bc_psi(d) = -bp.b1;
    for (int j = 2; j <= d; ++j) {
      bc.bc_plus(d + j - 1, W.wdj(j)) = 1.0;
      bc.bc_minus(d + j - 1, W.wdj(j)) = -1.0;
      bc.bc_psi(d + j - 1) = -bp.bj(j - 2);
      bc.bc_dpsi(d + j - 1, j - 2) = -bp.jump_f11;
    }

    A.block(row, 0, 2 * d, n_) = bc.bc_plus;
    A.block(row, n_, 2 * d, n_) = bc.bc_minus;

    Eigen::JacobiSVD<Mat> svd(A);
    const double cond = svd.singularValues()(0) /
                        svd.singularValues()(svd.singularValues().size() - 1);
    worst_cond = std::max(worst_cond, cond);
    if (cond > 1e8)
      throw BoundarySolveSingular("boundary closure condition number " +
                                  std::to_string(cond));
    bc.lu = Eigen::PartialPivLU<Mat>(A);
  }
}

// --------------------------------------------------------------------------
// semi-discrete operator
// --------------------------------------------------------------------------

void Solver::fill_outflow(Mat& W) const {
  for (int it = 0; it < g_.ntt(); ++it)
    W.col(g_.pid(g_.n1, it)) = 3.0 * W.col(g_.pid(g_.n1 - 1, it)) -
                               3.0 * W.col(g_.pid(g_.n1 - 2, it)) +
                               W.col(g_.pid(g_.n1 - 3, it));
}

void Solver::rhs(const Mat& Wp, const Mat& Wm, const Eigen::ArrayXd& psi, double t,
                 const Sources& src, Mat& Rp, Mat& Rm, Eigen::ArrayXd& rpsi) const {
  const int d = g_.d;
  const double h1 = g_.h1();
  const double ht = g_.htan();

  Field fp(n_, g_), fm(n_, g_);
  if (src.has_f) src.f(t, fp, fm);

  for (int s = 0; s < 2; ++s) {
    const SideOps& ops = side_[s];
    const Mat& W = s == 0 ? Wp : Wm;
    const Mat& fsrc = s == 0 ? fp.m : fm.m;
    Mat& R = s == 0 ? Rp : Rm;
    R.setZero();

    for (int i1 = 1; i1 < g_.n1; ++i1)
      for (int it = 0; it < g_.ntt(); ++it) {
        const int q = g_.pid(i1, it);
        Vec Dm(n_), Dp(n_);
        if (i1 >= 2)
          Dm = (3.0 * W.col(q) - 4.0 * W.col(g_.pid(i1 - 1, it)) +
                W.col(g_.pid(i1 - 2, it))) /
               (2.0 * h1);
        else  // centered fallback keeps second order beside the wall
          Dm = (W.col(g_.pid(i1 + 1, it)) - W.col(g_.pid(i1 - 1, it))) / (2.0 * h1);
        if (i1 + 2 <= g_.n1)
          Dp = (-3.0 * W.col(q) + 4.0 * W.col(g_.pid(i1 + 1, it)) -
                W.col(g_.pid(i1 + 2, it))) /
               (2.0 * h1);
        else
          Dp = (W.col(g_.pid(i1 + 1, it)) - W.col(g_.pid(i1 - 1, it))) / (2.0 * h1);

        const int qq = ops.constant ? 0 : q;
        const double alpha = ops.alpha(qq);
        Vec r = -(ops.M[static_cast<std::size_t>(qq) * d] * Vec(0.5 * (Dm + Dp))) -
                0.5 * alpha * (Dm - Dp);
        for (int dir = 2; dir <= d; ++dir) {
          const Vec Dt = (W.col(g_.pid(i1, g_.tan_shift(it, dir, +1))) -
                          W.col(g_.pid(i1, g_.tan_shift(it, dir, -1)))) /
                         (2.0 * ht);
          r -= ops.M[static_cast<std::size_t>(qq) * d + (dir - 1)] * Dt;
        }
        r -= ops.M4[qq] * W.col(q);
        if (src.has_f) r += ops.Msrc[qq] * fsrc.col(q);
        R.col(q) = r;
      }
  }

  // front transport: dt psi = W2+ + c1 psi - vtan . grad psi + g_row0
  Mat grow;
  if (src.has_g) grow = src.g(t);
  const WLayout W(d);
  for (int it = 0; it < g_.ntt(); ++it) {
    const BasicState::BoundaryPoint& bp = bs_.bdry[it];
    double r = Wp(W.w2(), g_.pid(0, it)) + bp.c1_row1 * psi(it);
    for (int dir = 2; dir <= d; ++dir) {
      const double dj = (psi(g_.tan_shift(it, dir, +1)) -
                         psi(g_.tan_shift(it, dir, -1))) /
                        (2.0 * ht);
      r -= bp.vtan_plus(dir - 2) * dj;
    }
    if (src.has_g) r += grow(0, it);
    rpsi(it) = r;
  }
}

void Solver::close_boundary(Mat& Wp, Mat& Wm, const Eigen::ArrayXd& psi, double t,
                            const Sources& src) const {
  const int d = g_.d;
  Mat grow;
  if (src.has_g) grow = src.g(t);

  for (int it = 0; it < g_.ntt(); ++it) {
    const BoundaryClosure& bc = closure_[it];
    Vec rhs(2 * n_);
    int row = 0;
    for (int s = 0; s < 2; ++s) {
      const Mat& W = s == 0 ? Wp : Wm;
      const Vec ext = 3.0 * W.col(g_.pid(1, it)) - 3.0 * W.col(g_.pid(2, it)) +
                      W.col(g_.pid(3, it));
      rhs.segment(row, n_ - d) =
          (s == 0 ? bc.out_rows_plus : bc.out_rows_minus) * ext;
      row += n_ - d;
    }
    Vec bcr = bc.bc_psi * psi(it);
    for (int dir = 2; dir <= d; ++dir) {
      const double dj = (psi(g_.tan_shift(it, dir, +1)) -
                         psi(g_.tan_shift(it, dir, -1))) /
                        (2.0 * g_.htan());
      bcr += bc.bc_dpsi.col(dir - 2) * dj;
    }
    if (src.has_g) bcr += grow.col(it).tail(2 * d);
    rhs.segment(row, 2 * d) = bcr;

    const Vec y = bc.lu.solve(rhs);
    Wp.col(g_.pid(0, it)) = y.head(n_);
    Wm.col(g_.pid(0, it)) = y.tail(n_);
  }
}

// --------------------------------------------------------------------------
// time loop and ledger
// --------------------------------------------------------------------------

namespace {

Field wrap_field(const Mat& m, const Grid& g) {
  Field f(static_cast<int>(m.rows()), g);
  f.m = m;
  return f;
}

}  // namespace

RunResult Solver::run(const Sources& src, const Field* W0_plus, const Field* W0_minus,
                      const Eigen::ArrayXd* psi0) const {
  const int d = g_.d;
  const int s_ord = opts_.norm_order;
  const WLayout WL(d);

  Mat Wp = W0_plus ? Mat(W0_plus->m) : Mat::Zero(n_, g_.npoints());
  Mat Wm = W0_minus ? Mat(W0_minus->m) : Mat::Zero(n_, g_.npoints());
  Eigen::ArrayXd psi =
      psi0 ? Eigen::ArrayXd(*psi0) : Eigen::ArrayXd::Zero(g_.ntt());

  RunResult out;
  out.dt = dt_;
  out.steps = steps_;
  out.lambda_max = lambda_max_;
  out.traces.dt = dt_;

  // ledger columns
  EnergyLedger& led = out.ledger;
  led.columns.push_back("t");
  for (int m = 0; m <= s_ord; ++m) led.columns.push_back("W_m" + std::to_string(m));
  for (int m = 0; m <= s_ord; ++m)
    led.columns.push_back("Wtan_m" + std::to_string(m));
  const auto betas = tangential_multiindices(d, s_ord);
  for (const auto& b : betas) {
    std::string lab = "Etan_b";
    for (int i = 0; i < b.size(); ++i) lab += std::to_string(b(i));
    led.columns.push_back(lab);
  }
  led.columns.push_back("Etan_agree");
  led.columns.push_back("W_H1_acc");
  led.columns.push_back("V_H1_acc");
  led.columns.push_back("f_H1_acc");
  led.columns.push_back("psi_L2");
  led.columns.push_back("psi_H32");
  led.columns.push_back("g_H32");
  led.columns.push_back("varsigma_L2");
  led.columns.push_back("eta_L2");
  led.columns.push_back("zeta_L2");
  led.columns.push_back("Rj_L2");
  led.columns.push_back("front_resid");

  FieldHistory histW[2], histV[2], histF[2];
  for (int s = 0; s < 2; ++s) {
    histW[s].dt = dt_;
    histW[s].depth = s_ord + 3;
    histV[s].dt = dt_;
    histV[s].depth = 3;
    histF[s].dt = dt_;
    histF[s].depth = 3;
  }
  std::vector<Eigen::ArrayXd> psi_hist;

  double accW = 0.0, accV = 0.0, accF = 0.0;
  std::vector<Eigen::ArrayXd> psi_series;
  std::vector<Mat> g_series;

  auto to_V = [&](const Mat& W, int s) {
    Mat V(n_, g_.npoints());
    if (side_[s].constant) {
      V = side_[s].Jmap[0] * W;
    } else {
      for (int q = 0; q < g_.npoints(); ++q) V.col(q) = side_[s].Jmap[q] * W.col(q);
    }
    return V;
  };

  auto etan_pair = [&](const Eigen::VectorXi& beta) {
    // congruence route and the written-out closed form
    double quad = 0.0, expanded = 0.0;
    for (int s = 0; s < 2; ++s) {
      const Field db = dtan_beta_field(g_, histW[s], beta);
      const double rho = s == 0 ? bs_.bg.rho_plus : bs_.bg.rho_minus;
      const double c = s == 0 ? bs_.bg.c_plus : bs_.bg.c_minus;
      const double f11 =
          s == 0 ? bs_.bg.stretch_plus(0) : bs_.bg.stretch_minus(0);
      for (int i1 = 0; i1 <= g_.n1; ++i1) {
        const double w = g_.quad_weight(i1);
        for (int it = 0; it < g_.ntt(); ++it) {
          const Vec x = db.m.col(g_.pid(i1, it));
          quad += w * x.dot(etan_A0_[s] * x);
          double e = x(WL.w1()) * x(WL.w1()) / (rho * c * c) +
                     std::pow(x(WL.w1()) - x(WL.wd2()), 2) / (rho * f11 * f11) +
                     x(WL.wS()) * x(WL.wS());
          for (int j = 1; j < n_ - 1; ++j)
            if (j != WL.wd2()) e += rho * x(j) * x(j);
          expanded += w * e;
        }
      }
    }
    return std::make_pair(quad, expanded);
  };

  auto record = [&](double t, long step) {
    Vec row(led.columns.size());
    int c = 0;
    row(c++) = t;
    for (int m = 0; m <= s_ord; ++m) {
      double a = 0.0;
      if (step >= s_ord || m == 0)
        for (int s = 0; s < 2; ++s) {
          const double nm = instant_norm(g_, histW[s], m, NormKind::Full);
          a += nm * nm;
        }
      row(c++) = std::sqrt(a);
    }
    for (int m = 0; m <= s_ord; ++m) {
      double a = 0.0;
      if (step >= s_ord || m == 0)
        for (int s = 0; s < 2; ++s) {
          const double nm = instant_norm(g_, histW[s], m, NormKind::Tangential);
          a += nm * nm;
        }
      row(c++) = std::sqrt(a);
    }
    double agree = 0.0;
    for (const auto& b : betas) {
      if (step < s_ord && b(0) > 0) {
        row(c++) = 0.0;
        continue;
      }
      const auto [quad, expanded] = etan_pair(b);
      row(c++) = quad;
      agree = std::max(agree,
                       std::abs(quad - expanded) / std::max(1e-300, std::abs(quad)));
    }
    row(c++) = agree;
    row(c++) = std::sqrt(accW);
    row(c++) = std::sqrt(accV);
    row(c++) = std::sqrt(accF);
    row(c++) = l2_norm_trace(g_, psi);
    row(c++) = psi_series.size() >= 2
                   ? fractional_trace_norm(g_, psi_series, dt_, 1.5)
                   : 0.0;
    if (src.has_g && g_series.size() >= 2) {
      double gn = 0.0;
      std::vector<Eigen::ArrayXd> rowseries(g_series.size());
      for (int r = 0; r < 2 * g_.d + 1; ++r) {
        for (std::size_t k = 0; k < g_series.size(); ++k)
          rowseries[k] = g_series[k].row(r).transpose().array();
        const double nr = fractional_trace_norm(g_, rowseries, dt_, 1.5);
        gn += nr * nr;
      }
      row(c++) = std::sqrt(gn);
    } else {
      row(c++) = 0.0;
    }

    if (opts_.record_aux) {
      const Field fWp = wrap_field(Wp, g_), fWm = wrap_field(Wm, g_);
      const AuxiliaryQuantities aux = auxiliary_eval(fWp, fWm, psi, bs_);
      auto two_sided = [&](const Field* a) {
        return std::sqrt(std::pow(l2_norm(g_, a[0]), 2) +
                         std::pow(l2_norm(g_, a[1]), 2));
      };
      row(c++) = two_sided(aux.varsigma);
      row(c++) = two_sided(aux.eta);
      row(c++) = d == 3 ? two_sided(aux.zeta) : 0.0;
      double rj = 0.0;
      for (int j = 0; j < d - 1; ++j) {
        const double nj = l2_norm_trace(g_, aux.Rj.row(j).transpose().array());
        rj += nj * nj;
      }
      row(c++) = std::sqrt(rj);
    } else {
      row(c++) = 0.0;
      row(c++) = 0.0;
      row(c++) = 0.0;
      row(c++) = 0.0;
    }

    // trailing residual of the discrete front condition
    double fres = 0.0;
    if (psi_hist.size() >= 3) {
      const auto& p0 = psi_hist[psi_hist.size() - 1];
      const auto& p1 = psi_hist[psi_hist.size() - 2];
      const auto& p2 = psi_hist[psi_hist.size() - 3];
      Mat grow;
      if (src.has_g) grow = src.g(t);
      for (int it = 0; it < g_.ntt(); ++it) {
        const BasicState::BoundaryPoint& bp = bs_.bdry[it];
        double r = (3.0 * p0(it) - 4.0 * p1(it) + p2(it)) / (2.0 * dt_) -
                   Wp(WL.w2(), g_.pid(0, it)) - bp.c1_row1 * p0(it);
        for (int dir = 2; dir <= d; ++dir)
          r += bp.vtan_plus(dir - 2) *
               (p0(g_.tan_shift(it, dir, +1)) - p0(g_.tan_shift(it, dir, -1))) /
               (2.0 * g_.htan());
        if (src.has_g) r -= grow(0, it);
        fres = std::max(fres, std::abs(r));
      }
    }
    row(c++) = fres;
    led.rows.push_back(row);
  };

  // initial closure and records
  close_boundary(Wp, Wm, psi, 0.0, src);
  auto push_state = [&](double t) {
    histW[0].push(wrap_field(Wp, g_));
    histW[1].push(wrap_field(Wm, g_));
    histV[0].push(wrap_field(to_V(Wp, 0), g_));
    histV[1].push(wrap_field(to_V(Wm, 1), g_));
    if (src.has_f) {
      Field fp(n_, g_), fm(n_, g_);
      src.f(t, fp, fm);
      histF[0].push(fp);
      histF[1].push(fm);
    }
    psi_hist.push_back(psi);
    if (static_cast<int>(psi_hist.size()) > 4)
      psi_hist.erase(psi_hist.begin());
    psi_series.push_back(psi);
    if (src.has_g) g_series.push_back(src.g(t));
    if (opts_.record_traces) {
      Mat tp(n_, g_.ntt()), tm(n_, g_.ntt());
      for (int it = 0; it < g_.ntt(); ++it) {
        tp.col(it) = Wp.col(g_.pid(0, it));
        tm.col(it) = Wm.col(g_.pid(0, it));
      }
      out.traces.t.push_back(t);
      out.traces.Wplus.push_back(tp);
      out.traces.Wminus.push_back(tm);
      out.traces.psi.push_back(psi);
    }
  };
  push_state(0.0);
  record(0.0, 0);

  Mat Rp(n_, g_.npoints()), Rm(n_, g_.npoints());
  Mat R2p(n_, g_.npoints()), R2m(n_, g_.npoints());
  Eigen::ArrayXd rpsi(g_.ntt()), r2psi(g_.ntt());
  Mat W1p = Wp, W1m = Wm;
  Eigen::ArrayXd psi1 = psi;

  double t = 0.0;
  for (long step = 1; step <= steps_; ++step) {
    rhs(Wp, Wm, psi, t, src, Rp, Rm, rpsi);
    W1p = Wp + dt_ * Rp;
    W1m = Wm + dt_ * Rm;
    psi1 = psi + dt_ * rpsi;
    fill_outflow(W1p);
    fill_outflow(W1m);
    close_boundary(W1p, W1m, psi1, t + dt_, src);

    rhs(W1p, W1m, psi1, t + dt_, src, R2p, R2m, r2psi);
    Wp += 0.5 * dt_ * (Rp + R2p);
    Wm += 0.5 * dt_ * (Rm + R2m);
    psi += 0.5 * dt_ * (rpsi + r2psi);
    fill_outflow(Wp);
    fill_outflow(Wm);
    close_boundary(Wp, Wm, psi, t + dt_, src);
    t += dt_;

    // space-time accumulation needs one step of history
    push_state(t);
    if (step >= 1) {
      double inst = 0.0;
      for (int s = 0; s < 2; ++s) {
        const double nw = instant_norm(g_, histW[s], 1, NormKind::Full);
        inst += nw * nw;
      }
      accW += dt_ * inst;
      inst = 0.0;
      for (int s = 0; s < 2; ++s) {
        const double nv = instant_norm(g_, histV[s], 1, NormKind::Full);
        inst += nv * nv;
      }
      accV += dt_ * inst;
      if (src.has_f) {
        inst = 0.0;
        for (int s = 0; s < 2; ++s) {
          const double nf = instant_norm(g_, histF[s], 1, NormKind::Full);
          inst += nf * nf;
        }
        accF += dt_ * inst;
      }
    }

    if (step % opts_.nan_check_every == 0 || step == steps_)
      if (!Wp.allFinite() || !Wm.allFinite() || !psi.allFinite())
        throw NaNDetected(step);

    if (step % opts_.record_every == 0 || step == steps_) record(t, step);
  }

  out.Wplus = wrap_field(Wp, g_);
  out.Wminus = wrap_field(Wm, g_);
  out.psi = psi;
  out.W_h1_spacetime = std::sqrt(accW);
  out.V_h1_spacetime = std::sqrt(accV);
  out.f_h1_spacetime = std::sqrt(accF);
  out.psi_h32 = fractional_trace_norm(g_, psi_series, dt_, 1.5);
  if (src.has_g) {
    double gn = 0.0;
    std::vector<Eigen::ArrayXd> rowseries(g_series.size());
    for (int r = 0; r < 2 * d + 1; ++r) {
      for (std::size_t k = 0; k < g_series.size(); ++k)
        rowseries[k] = g_series[k].row(r).transpose().array();
      const double nr = fractional_trace_norm(g_, rowseries, dt_, 1.5);
      gn += nr * nr;
    }
    out.g_h32 = std::sqrt(gn);
  }
  return out;
}

RunResult run_linearized(const BasicState& bs, const SolverOptions& opts,
                         const Sources& src) {
  return Solver(bs, opts).run(src);
}

}  // namespace tecd
