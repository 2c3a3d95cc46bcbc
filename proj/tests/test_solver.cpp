#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tecd/io.hpp"
#include "tecd/solver.hpp"
#include "tecd/synthetic.hpp"

using namespace tecd;

namespace {

BackgroundState stable_bg(int d) {
  const MaterialParams mp = MaterialParams::make(d, 1.4);
  Eigen::VectorXd stretch = Eigen::VectorXd::Ones(d);
  return build_background(stretch, 0.8, 0.0, mp);
}

SolverOptions quick_opts(double T, int record = 1) {
  SolverOptions o;
  o.T = T;
  o.record_every = record;
  o.norm_order = 1;
  return o;
}

BumpSource default_source() {
  BumpSource src;
  src.amplitude = 1.0;
  src.components = {0, 1, 2};
  return src;
}

}  // namespace

TEST_CASE("zero data and zero sources stay exactly zero") {
  const Grid g = Grid::make(2, 32, 8);
  const BasicState bs = BasicState::background(g, stable_bg(2));
  const RunResult out = run_linearized(bs, quick_opts(0.2, 5), Sources{});
  CHECK(out.Wplus.m.cwiseAbs().maxCoeff() == 0.0);
  CHECK(out.Wminus.m.cwiseAbs().maxCoeff() == 0.0);
  CHECK(out.psi.abs().maxCoeff() == 0.0);
  for (const Vec& row : out.ledger.rows) CHECK(row.tail(row.size() - 1).norm() == 0.0);
}

TEST_CASE("identical runs are bit identical") {
  const Grid g = Grid::make(2, 32, 8);
  const BasicState bs = BasicState::background(g, stable_bg(2));
  const Sources src = default_source().as_sources(g);
  const RunResult a = run_linearized(bs, quick_opts(0.3, 3), src);
  const RunResult b = run_linearized(bs, quick_opts(0.3, 3), src);
  CHECK((a.Wplus.m - b.Wplus.m).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(a.ledger.rows.size() == b.ledger.rows.size());
  for (std::size_t i = 0; i < a.ledger.rows.size(); ++i)
    CHECK((a.ledger.rows[i] - b.ledger.rows[i]).cwiseAbs().maxCoeff() == 0.0);

  write_ledger_csv("/tmp/tecd_ledger_a.csv", a.ledger);
  write_ledger_csv("/tmp/tecd_ledger_b.csv", b.ledger);
  CHECK(file_hash_hex("/tmp/tecd_ledger_a.csv") ==
        file_hash_hex("/tmp/tecd_ledger_b.csv"));
}

TEST_CASE("boundary closure reproduces the wall conditions on a driven run") {
  const Grid g = Grid::make(2, 48, 12);
  const BasicState bs = BasicState::background(g, stable_bg(2));
  const RunResult out =
      run_linearized(bs, quick_opts(0.8, 1), default_source().as_sources(g));
  CHECK(out.Wplus.m.cwiseAbs().maxCoeff() > 1e-4);  // the run did something

  // traces satisfy the discrete boundary conditions; the checker throws if
  // its precondition fails
  const Eigen::VectorXi beta = (Eigen::VectorXi(2) << 1, 0).finished();
  const CancellationReport rep = cancellation_check(out.traces, bs, beta, 1e-3);
  CHECK(rep.bc_residual <= 2e-4);
  CHECK(rep.Q1 > 0.0);
}

TEST_CASE("constant tangential data reduce to the one-dimensional scheme") {
  const int d = 2;
  const Grid g = Grid::make(d, 48, 8);
  const BasicState bs = BasicState::background(g, stable_bg(d));
  const Layout L(d);
  const int n = L.n();

  // tangentially constant source
  BumpSource bump = default_source();
  Sources src;
  src.has_f = true;
  src.f = [bump, g](double t, Field& fp, Field& fm) {
    fp.m.setZero();
    fm.m.setZero();
    const double r = bump.amplitude * bump.ramp(t);
    if (r == 0.0) return;
    for (int i1 = 0; i1 <= g.n1; ++i1) {
      const double v = r * bump.bump(g.x1(i1));
      for (int it = 0; it < g.ntt(); ++it)
        for (int c : bump.components) {
          fp.m(c, g.pid(i1, it)) = v;
          fm.m(c, g.pid(i1, it)) = 0.7 * v;
        }
    }
  };

  SolverOptions opts = quick_opts(0.5, 1);
  opts.record_aux = false;
  const Solver solver(bs, opts);
  const RunResult out = solver.run(src);

  // independent 1-d reference: same split scheme, same closure algebra,
  // written directly against per-node arrays
  const StatePoint spP = StatePoint::make(bs.bg.state(+1), bs.mp);
  const StatePoint spM = StatePoint::make(bs.bg.state(-1), bs.mp);
  LiftPoint lpP = LiftPoint::identity(d), lpM = LiftPoint::identity(d);
  lpM.d1 = -1.0;
  const CoefficientMatrices cmP = assemble_coefficients(spP, bs.mp, lpP, +1);
  const CoefficientMatrices cmM = assemble_coefficients(spM, bs.mp, lpM, -1);

  struct Side1D {
    Mat M1, Msrc, J;
    double alpha;
    Mat out_rows;
  };
  auto side1d = [&](const CoefficientMatrices& cm) {
    Side1D s;
    Eigen::LLT<Mat> llt(cm.calA[0]);
    s.M1 = llt.solve(cm.calA[1]);
    s.Msrc = llt.solve(cm.J.transpose());
    s.J = cm.J;
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(cm.calA[1], cm.calA[0]);
    s.alpha = ges.eigenvalues().cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, s.alpha);
    s.out_rows = Mat(n - d, n);
    int r = 0;
    for (int k = 0; k < n; ++k)
      if (ges.eigenvalues()(k) <= 1e-8 * scale)
        s.out_rows.row(r++) = ges.eigenvectors().col(k).transpose() * cm.calA[0];
    REQUIRE(r == n - d);
    return s;
  };
  const Side1D sP = side1d(cmP), sM = side1d(cmM);

  // boundary rows for the flat interface state
  const WLayout W(d);
  Mat bcP = Mat::Zero(2 * d, n), bcM = Mat::Zero(2 * d, n);
  bcP(0, W.w2()) = 1.0;
  bcM(0, W.w2()) = -1.0;
  for (int i = 2; i <= d; ++i) {
    bcP(i - 1, W.wv(i)) = 1.0;
    bcM(i - 1, W.wv(i)) = -1.0;
  }
  bcP(d, W.wd2()) = 1.0;
  bcM(d, W.wd2()) = -1.0;
  const double jump = bs.bg.stretch_plus(0) - bs.bg.stretch_minus(0);
  const Mat dvr = varrho_grad(bs.bg.state(+1).F);
  for (int j = 2; j <= d; ++j)
    for (int i = 2; i <= d; ++i) bcP(d, W.wF(i, j)) -= jump * dvr(i - 1, j - 1);
  for (int j = 2; j <= d; ++j) {
    bcP(d + j - 1, W.wdj(j)) = 1.0;
    bcM(d + j - 1, W.wdj(j)) = -1.0;
  }
  Mat A = Mat::Zero(2 * n, 2 * n);
  A.block(0, 0, n - d, n) = sP.out_rows;
  A.block(n - d, n, n - d, n) = sM.out_rows;
  A.block(2 * (n - d), 0, 2 * d, n) = bcP;
  A.block(2 * (n - d), n, 2 * d, n) = bcM;
  Eigen::PartialPivLU<Mat> lu(A);

  const int nx = g.n1 + 1;
  const double h = g.h1();
  Mat Wp = Mat::Zero(n, nx), Wm = Mat::Zero(n, nx);

  auto rhs1d = [&](const Mat& Wf, const Side1D& s, double t, double famp) {
    Mat R = Mat::Zero(n, nx);
    for (int i = 1; i < g.n1; ++i) {
      Vec Dm(n), Dp(n);
      if (i >= 2)
        Dm = (3.0 * Wf.col(i) - 4.0 * Wf.col(i - 1) + Wf.col(i - 2)) / (2 * h);
      else
        Dm = (Wf.col(i + 1) - Wf.col(i - 1)) / (2 * h);
      if (i + 2 <= g.n1)
        Dp = (-3.0 * Wf.col(i) + 4.0 * Wf.col(i + 1) - Wf.col(i + 2)) / (2 * h);
      else
        Dp = (Wf.col(i + 1) - Wf.col(i - 1)) / (2 * h);
      Vec r = -(s.M1 * Vec(0.5 * (Dm + Dp))) - 0.5 * s.alpha * (Dm - Dp);
      Vec f = Vec::Zero(n);
      const double v = famp * bump.amplitude * bump.ramp(t) * bump.bump(g.x1(i));
      for (int c : bump.components) f(c) = v;
      r += s.Msrc * f;
      R.col(i) = r;
    }
    return R;
  };
  auto outflow = [&](Mat& Wf) {
    Wf.col(g.n1) =
        3.0 * Wf.col(g.n1 - 1) - 3.0 * Wf.col(g.n1 - 2) + Wf.col(g.n1 - 3);
  };
  auto close = [&](Mat& Wfp, Mat& Wfm) {
    Vec rhs(2 * n);
    rhs.head(n - d) =
        sP.out_rows * Vec(3.0 * Wfp.col(1) - 3.0 * Wfp.col(2) + Wfp.col(3));
    rhs.segment(n - d, n - d) =
        sM.out_rows * Vec(3.0 * Wfm.col(1) - 3.0 * Wfm.col(2) + Wfm.col(3));
    rhs.tail(2 * d).setZero();
    const Vec y = lu.solve(rhs);
    Wfp.col(0) = y.head(n);
    Wfm.col(0) = y.tail(n);
  };

  const double dt = solver.dt();
  double t = 0.0;
  close(Wp, Wm);
  for (long step = 1; step <= solver.steps(); ++step) {
    const Mat k1p = rhs1d(Wp, sP, t, 1.0), k1m = rhs1d(Wm, sM, t, 0.7);
    Mat W1p = Wp + dt * k1p, W1m = Wm + dt * k1m;
    outflow(W1p);
    outflow(W1m);
    close(W1p, W1m);
    const Mat k2p = rhs1d(W1p, sP, t + dt, 1.0), k2m = rhs1d(W1m, sM, t + dt, 0.7);
    Wp += 0.5 * dt * (k1p + k2p);
    Wm += 0.5 * dt * (k1m + k2m);
    outflow(Wp);
    outflow(Wm);
    close(Wp, Wm);
    t += dt;
  }

  // every tangential column of the 2-d run equals the 1-d reference
  double worst = 0.0;
  for (int i1 = 0; i1 <= g.n1; ++i1)
    for (int it = 0; it < g.ntt(); ++it)
      worst = std::max(worst, (out.Wplus.m.col(g.pid(i1, it)) - Wp.col(i1))
                                  .lpNorm<Eigen::Infinity>());
  CHECK(worst <= 1e-11);
  CHECK(Wp.cwiseAbs().maxCoeff() > 1e-4);
}

TEST_CASE("self convergence of the driven problem") {
  const int d = 2;
  std::vector<Field> finals;
  std::vector<Grid> grids;
  for (int n1 : {64, 128, 256}) {
    const Grid g = Grid::make(d, n1, n1 / 4);
    const BasicState bs = BasicState::background(g, stable_bg(d));
    SolverOptions opts = quick_opts(0.6, 1000000);
    opts.record_traces = false;
    opts.record_aux = false;
    const RunResult out = run_linearized(bs, opts, default_source().as_sources(g));
    finals.push_back(out.Wplus);
    grids.push_back(g);
  }
  // restrict fine to coarse nodes (nested uniform grids)
  auto diff = [&](const Field& coarse, const Grid& gc, const Field& fine,
                  const Grid& gf) {
    double s = 0.0;
    int cnt = 0;
    for (int i1 = 0; i1 <= gc.n1; ++i1)
      for (int it = 0; it < gc.ntt(); ++it) {
        const int qf = gf.pid(2 * i1, gf.it_of(2 * (gc.d == 2 ? it : it / gc.ntan),
                                               gc.d == 2 ? 0 : 2 * (it % gc.ntan)));
        s += (coarse.m.col(gc.pid(i1, it)) - fine.m.col(qf)).squaredNorm();
        ++cnt;
      }
    return std::sqrt(s / cnt);
  };
  const double e1 = diff(finals[0], grids[0], finals[1], grids[1]);
  const double e2 = diff(finals[1], grids[1], finals[2], grids[2]);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 1.8);
}

TEST_CASE("interface energy stays bounded before waves reach the walls") {
  const Grid g = Grid::make(2, 64, 16);
  const BasicState bs = BasicState::background(g, stable_bg(2));
  Field W0p, W0m;
  involution_clean_data(bs, 1.0, W0p, W0m);
  SolverOptions opts = quick_opts(0.3, 2);
  const Solver solver(bs, opts);
  const RunResult out = solver.run(Sources{}, &W0p, &W0m);

  const auto e0 = out.ledger.column("Etan_b00");
  REQUIRE(e0.size() >= 3);
  CHECK(e0.front() > 0.0);
  for (std::size_t i = 1; i < e0.size(); ++i)
    CHECK(e0[i] <= e0[i - 1] * (1.0 + 20.0 * g.h1() * out.dt) + 1e-14);

  // both evaluations of the quadratic form agree
  for (const Vec& row : out.ledger.rows)
    CHECK(row(out.ledger.column_index("Etan_agree")) <= 1e-12);
}

TEST_CASE("clean data keep the linearized involutions small") {
  std::vector<double> drifts;
  for (int n1 : {48, 96}) {
    const Grid g = Grid::make(2, n1, n1 / 4);
    const BasicState bs = BasicState::background(g, stable_bg(2));
    Field W0p, W0m;
    involution_clean_data(bs, 1.0, W0p, W0m);
    SolverOptions opts = quick_opts(0.4, 4);
    const Solver solver(bs, opts);
    const RunResult out = solver.run(Sources{}, &W0p, &W0m);
    const auto vs = out.ledger.column("varsigma_L2");
    const auto et = out.ledger.column("eta_L2");
    double drift = 0.0;
    for (double v : vs) drift = std::max(drift, v);
    for (double v : et) drift = std::max(drift, v);
    drifts.push_back(drift);
  }
  CHECK(drifts[0] / drifts[1] > 2.5);
}

TEST_CASE("front condition residual decays at second order") {
  std::vector<double> resid;
  for (int n1 : {32, 64}) {
    const Grid g = Grid::make(2, n1, 8);
    const BasicState bs = BasicState::background(g, stable_bg(2));
    const RunResult out =
        run_linearized(bs, quick_opts(0.5, 1), default_source().as_sources(g));
    const auto fr = out.ledger.column("front_resid");
    double worst = 0.0;
    for (double v : fr) worst = std::max(worst, v);
    resid.push_back(worst);
  }
  CHECK(resid[0] / resid[1] > 3.0);
}

TEST_CASE("perturbed coefficient runs stay finite and recorded") {
  PerturbationSpec sp;
  sp.amp_f11 = 0.03;
  sp.amp_tan = 0.02;
  sp.amp_v = 0.03;
  sp.amp_phi = 0.015;
  const Grid g = Grid::make(2, 32, 8);
  const BasicState bs = BasicState::perturbed(g, stable_bg(2), sp);
  const RunResult out =
      run_linearized(bs, quick_opts(0.3, 3), default_source().as_sources(g));
  CHECK(out.Wplus.m.allFinite());
  CHECK(out.ledger.rows.size() >= 3);
  CHECK(out.W_h1_spacetime > 0.0);
}

TEST_CASE("front trajectories are insensitive to the admissible cutoff") {
  PerturbationSpec sp;
  sp.amp_f11 = 0.03;
  sp.amp_phi = 0.02;
  auto run_chi = [&](double steep, int n1) {
    const Grid g = Grid::make(2, n1, 8);
    const BasicState bs = BasicState::perturbed(g, stable_bg(2), sp, Chi{steep});
    SolverOptions opts = quick_opts(0.4, 1000000);
    opts.record_aux = false;
    opts.record_traces = false;
    return run_linearized(bs, opts, default_source().as_sources(g));
  };
  auto gap = [&](int n1) {
    const RunResult a = run_chi(0.8, n1);
    const RunResult b = run_chi(0.5, n1);
    return (a.psi - b.psi).abs().maxCoeff();
  };
  const double g1 = gap(24), g2 = gap(48);
  CHECK(g2 < g1);
  CHECK(g1 < 5e-3);
}
