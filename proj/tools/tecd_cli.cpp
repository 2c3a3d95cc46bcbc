// Command-line front end: background construction, stability classification,
// structure checks, rigidity probes, identity verification, and linearized
// interface runs, all driven by a JSON config or direct flags.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "tecd/config.hpp"
#include "tecd/io.hpp"
#include "tecd/norms.hpp"
#include "tecd/solver.hpp"
#include "tecd/stability.hpp"
#include "tecd/synthetic.hpp"

using namespace tecd;
using nlohmann::json;

namespace {

json verdict_json(const StabilityVerdict& v) {
  json j;
  j["dim"] = v.d;
  j["lhs"] = v.lhs;
  j["rhs"] = v.rhs;
  j["margin"] = v.margin;
  j["satisfied"] = v.satisfied;
  j["boundary"] = v.boundary;
  if (v.d == 2) {
    j["c0"] = v.c0;
  } else {
    j["cbar"] = v.cbar;
    j["c1"] = v.c1;
    j["c2"] = v.c2;
    j["c3"] = v.c3;
    j["c4"] = v.c4;
    j["alt_criterion"] = v.alt_criterion;
  }
  return j;
}

json background_json(const BackgroundState& bg) {
  json j;
  j["dim"] = bg.params.d;
  j["gamma"] = bg.params.eos.gamma;
  j["stretch_plus"] = std::vector<double>(bg.stretch_plus.data(),
                                          bg.stretch_plus.data() + bg.stretch_plus.size());
  j["stretch_minus"] = std::vector<double>(
      bg.stretch_minus.data(), bg.stretch_minus.data() + bg.stretch_minus.size());
  j["S_plus"] = bg.S_plus;
  j["S_minus"] = bg.S_minus;
  j["rho_plus"] = bg.rho_plus;
  j["rho_minus"] = bg.rho_minus;
  j["p_plus"] = bg.p_plus;
  j["p_minus"] = bg.p_minus;
  j["c_plus"] = bg.c_plus;
  j["c_minus"] = bg.c_minus;
  j["jump_residual"] =
      rh_residual(bg.traces(), bg.params).lpNorm<Eigen::Infinity>();
  return j;
}

struct StretchFlags {
  int dim = 2;
  double gamma = 1.4;
  double f11p = 1.0, f11m = 0.5, f22 = 1.0, f33 = 1.0, Sp = 0.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--dim", dim)->check(CLI::IsMember({2, 3}));
    cmd->add_option("--gamma", gamma);
    cmd->add_option("--f11p", f11p);
    cmd->add_option("--f11m", f11m);
    cmd->add_option("--f22", f22);
    cmd->add_option("--f33", f33);
    cmd->add_option("--Sp", Sp);
  }
  BackgroundState build() const {
    const MaterialParams mp = MaterialParams::make(dim, gamma);
    Eigen::VectorXd stretch(dim);
    stretch(0) = f11p;
    stretch(1) = f22;
    if (dim == 3) stretch(2) = f33;
    return build_background(stretch, f11m, Sp, mp);
  }
};

void ensure_dir(const std::string& dir) {
  std::filesystem::create_directories(dir);
}

int cmd_check_hyperbolicity(int dim, int samples, std::uint64_t seed) {
  const MaterialParams mp = MaterialParams::make(dim, 1.4);
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

  int spectrum_checked = 0;
  double worst_sym = 0.0;
  for (int k = 0; k < samples; ++k) {
    ThermoState st;
    do {
      st.F = Mat::Identity(dim, dim);
      for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i) st.F(i, j) += uni(-0.35, 0.35);
    } while (st.F.determinant() < 0.3);
    st.v = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < dim; ++i) st.v(i) = uni(-0.5, 0.5);
    st.S = uni(-0.4, 0.4);
    st.p = mp.eos.eval(density_from_F<double>(st.F), st.S).p;

    const StatePoint sp = StatePoint::make(st, mp);
    const Mat A0 = assemble_a0(sp, mp);
    if (Eigen::LLT<Mat>(A0).info() != Eigen::Success)
      throw ModelError("symmetrizer lost positivity");
    for (int i = 1; i <= dim; ++i) {
      const Mat Ai = assemble_ai(sp, mp, i);
      worst_sym = std::max(worst_sym, (Ai - Ai.transpose()).lpNorm<Eigen::Infinity>());
    }

    // contact-trace spectrum on a constrained variant of the state
    FrontGeometry front;
    front.grad = Eigen::VectorXd(dim - 1);
    for (int j = 0; j < dim - 1; ++j) front.grad(j) = uni(-0.3, 0.3);
    ThermoState tr = st;
    const Eigen::VectorXd N = front.normal();
    for (int j = 1; j < dim; ++j)
      tr.F.col(j) -= (tr.F.col(j).dot(N) / N.squaredNorm()) * N;
    if (tr.F.determinant() < 0.2) continue;
    front.dt_phi = tr.v.dot(N);
    boundary_matrix_eigencheck(tr, tr, front, mp);
    ++spectrum_checked;
  }

  json j;
  j["dim"] = dim;
  j["samples"] = samples;
  j["spectrum_checked"] = spectrum_checked;
  j["max_symmetry_defect"] = worst_sym;
  j["status"] = "ok";
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_verify_identities(int dim, std::uint64_t seed, std::ostream& out) {
  const MaterialParams mp = MaterialParams::make(dim, 1.4);
  Eigen::VectorXd stretch = Eigen::VectorXd::Ones(dim);
  stretch(0) = 1.1;
  const BackgroundState bg = build_background(stretch, 0.85, 0.05, mp);
  PerturbationSpec spec;
  spec.amp_f11 = 0.04;
  spec.amp_tan = 0.03;
  spec.amp_offdiag = 0.03;
  spec.amp_v = 0.05;
  spec.amp_S = 0.04;
  spec.amp_phi = 0.02;
  const Layout L(dim);

  auto emit = [&](const std::string& name, int grid, double resid, double order) {
    json j;
    j["name"] = name;
    j["dim"] = dim;
    j["grid"] = grid;
    j["residual"] = resid;
    if (order == order) j["order"] = order;
    out << j.dump() << "\n";
  };

  // linearity of the interior operator
  {
    const Grid g = Grid::make(dim, 24, 8);
    const BasicState bs = BasicState::perturbed(g, bg, spec);
    const SyntheticField f1 = SyntheticField::random(dim, L.n(), seed + 1, 1.0);
    const SyntheticField f2 = SyntheticField::random(dim, L.n(), seed + 2, 1.0);
    Field A(L.n(), g), At(L.n(), g), B(L.n(), g), Bt(L.n(), g);
    f1.sample(g, 0.3, A, At);
    f2.sample(g, 0.3, B, Bt);
    Field sum(L.n(), g), sumt(L.n(), g);
    sum.m = 2.0 * A.m + 0.7 * B.m;
    sumt.m = 2.0 * At.m + 0.7 * Bt.m;
    const double lin = (apply_Lprime_e(sum, sumt, bs, +1).m -
                        2.0 * apply_Lprime_e(A, At, bs, +1).m -
                        0.7 * apply_Lprime_e(B, Bt, bs, +1).m)
                           .lpNorm<Eigen::Infinity>();
    emit("interior-linearity", 24, lin, NAN);
  }

  // directional consistency of the boundary linearization
  {
    const Grid g = Grid::make(dim, 24, 8);
    const BasicState bs = BasicState::perturbed(g, bg, spec);
    const SyntheticField sf = SyntheticField::random(dim, L.n(), seed + 3, 1.0, true);
    Field V(L.n(), g), Vt(L.n(), g);
    sf.sample(g, 0.8, V, Vt);
    SyntheticFront fr{0.4, 1, 1, 0.9};
    Eigen::ArrayXd psi, dpsi;
    fr.sample(g, 0.8, psi, dpsi);
    const Field Vdot = good_unknowns(V, psi, bs, +1);
    const Field VdotM = good_unknowns(V, psi, bs, -1);
    BoundaryTrace tr;
    tr.Vplus = Mat(L.n(), g.ntt());
    tr.Vminus = Mat(L.n(), g.ntt());
    for (int it = 0; it < g.ntt(); ++it) {
      tr.Vplus.col(it) = Vdot.m.col(g.pid(0, it));
      tr.Vminus.col(it) = VdotM.m.col(g.pid(0, it));
    }
    tr.psi = psi;
    tr.dpsi_dt = dpsi;
    const Mat Bp = apply_Bprime_e(tr, bs);
    auto nonlinear = [&](double eps) {
      Mat o(2 * dim + 1, g.ntt());
      for (int it = 0; it < g.ntt(); ++it) {
        const int q = g.pid(0, it);
        JumpState js;
        js.plus = ThermoState::from_vector(bs.U[0].m.col(q) + eps * V.m.col(q), mp);
        js.minus = ThermoState::from_vector(bs.U[1].m.col(q) + eps * V.m.col(q), mp);
        js.front.grad = Eigen::VectorXd(dim - 1);
        for (int j = 0; j < dim - 1; ++j)
          js.front.grad(j) =
              bs.lift.dtan_phi[j](it) + eps * trace_deriv_tan(g, psi, j + 2)(it);
        js.front.dt_phi = eps * dpsi(it);
        o.col(it) = boundary_operator(js, mp, BoundaryForm::Varrho, 1e9);
      }
      return o;
    };
    const Mat B0 = nonlinear(0.0);
    const double d1 = ((nonlinear(1e-2) - B0) / 1e-2 - Bp).lpNorm<Eigen::Infinity>();
    const double d2 = ((nonlinear(1e-3) - B0) / 1e-3 - Bp).lpNorm<Eigen::Infinity>();
    emit("boundary-consistency", 24, d2, std::log10(d1 / d2));
  }

  // reconstruction residuals under refinement
  {
    double prev = NAN;
    for (int n1 : {24, 48}) {
      const Grid g = Grid::make(dim, n1, n1 / 4);
      const BasicState bs = BasicState::perturbed(g, bg, spec);
      const SyntheticField sf = SyntheticField::random(dim, L.n(), seed + 4, 1.0);
      Field V(L.n(), g), Vt(L.n(), g);
      sf.sample(g, 0.7, V, Vt);
      const Field W = to_W(V, bs, +1);
      const Field Wm = to_W(V, bs, -1);
      const Eigen::ArrayXd psi = Eigen::ArrayXd::Zero(g.ntt());
      const AuxiliaryQuantities aux = auxiliary_eval(W, Wm, psi, bs);
      double worst = 0.0;
      for (int i1 = 2; i1 <= g.n1 - 2; ++i1)
        for (int it = 0; it < g.ntt(); ++it) {
          worst = std::max(worst, std::abs(aux.varsigma_recon[0].m(0, g.pid(i1, it))));
          for (int r = 0; r < dim; ++r)
            worst = std::max(worst, std::abs(aux.eta_recon[0].m(r, g.pid(i1, it))));
        }
      emit("reconstruction", n1, worst,
           prev == prev ? std::log2(prev / worst) : NAN);
      prev = worst;
    }
  }

  // cancellation on a short driven run at the exact interface state
  if (dim == 2) {
    const Grid g = Grid::make(2, 48, 12);
    const BasicState bsb = BasicState::background(g, bg);
    BumpSource src;
    src.components = {0, 1, 2};
    SolverOptions opts;
    opts.T = 0.6;
    opts.record_every = 8;
    const RunResult run = run_linearized(bsb, opts, src.as_sources(g));
    const Eigen::VectorXi beta = (Eigen::VectorXi(2) << 1, 0).finished();
    const CancellationReport rep = cancellation_check(run.traces, bsb, beta);
    json j;
    j["name"] = "cancellation";
    j["dim"] = dim;
    j["grid"] = 48;
    j["Q1a"] = rep.Q1a;
    j["Q2d"] = rep.Q2d;
    j["residual"] = rep.cancellation_residual;
    j["key_identity"] = rep.key_identity_residual;
    j["bc_residual"] = rep.bc_residual;
    out << j.dump() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermoelastic contact-interface toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path, out_dir = "out";
  std::uint64_t seed = 0;
  int threads = 1;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads for trivially parallel commands");

  auto* cmd_bg = app.add_subcommand("background", "construct a piecewise-constant interface state");
  StretchFlags bgf;
  bgf.attach(cmd_bg);

  auto* cmd_stab = app.add_subcommand("stability", "evaluate the interface stability condition");
  StretchFlags stf;
  stf.attach(cmd_stab);
  std::string sweep_spec_path;
  cmd_stab->add_option("--sweep-spec", sweep_spec_path, "JSON sweep description");

  auto* cmd_sweep = app.add_subcommand("sweep", "classify a grid of stretch ratios");
  std::string sweep_path;
  cmd_sweep->add_option("--sweep-spec", sweep_path, "JSON sweep description")->required();

  auto* cmd_hyp = app.add_subcommand("check-hyperbolicity", "structure checks on random states");
  int hyp_dim = 2, hyp_samples = 200;
  cmd_hyp->add_option("--dim", hyp_dim)->check(CLI::IsMember({2, 3}));
  cmd_hyp->add_option("--samples", hyp_samples);

  auto* cmd_rig = app.add_subcommand("rigidity", "random-seed root search of the contact system");
  StretchFlags rgf;
  rgf.attach(cmd_rig);
  int rig_trials = 100;
  double rig_spread = 0.1, rig_dS = 0.0;
  cmd_rig->add_option("--trials", rig_trials);
  cmd_rig->add_option("--spread", rig_spread);
  cmd_rig->add_option("--dS", rig_dS, "pinned entropy jump");

  auto* cmd_ver = app.add_subcommand("verify-identities", "linearity, consistency, and cancellation suites");
  int ver_dim = 2;
  cmd_ver->add_option("--dim", ver_dim)->check(CLI::IsMember({2, 3}));

  auto* cmd_sim = app.add_subcommand("simulate", "advance the linearized interface problem");

  auto* cmd_tame = app.add_subcommand("probe-tame", "solution-to-source ratio over a grid family");
  std::vector<int> tame_grids{64, 128, 256};
  cmd_tame->add_option("--grids", tame_grids, "x1 cell counts");

  auto* cmd_trace = app.add_subcommand("probe-trace", "discrete trace-estimate checks");
  int trace_dim = 2, trace_samples = 200, trace_n1 = 64;
  cmd_trace->add_option("--dim", trace_dim)->check(CLI::IsMember({2, 3}));
  cmd_trace->add_option("--samples", trace_samples);
  cmd_trace->add_option("--n1", trace_n1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // any usage problem is a validation failure
  }

  try {
    if (cmd_bg->parsed()) {
      std::cout << background_json(bgf.build()).dump(2) << "\n";
      return 0;
    }

    if (cmd_stab->parsed() && sweep_spec_path.empty()) {
      const StabilityVerdict v = evaluate_condition(stf.build());
      std::cout << verdict_json(v).dump(2) << "\n";
      return 0;
    }
    if (cmd_stab->parsed()) sweep_path = sweep_spec_path;

    if (cmd_sweep->parsed() || !sweep_path.empty()) {
      std::ifstream in(sweep_path);
      if (!in) throw ConfigError("cannot open sweep spec " + sweep_path);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("sweep spec parse error: ") + e.what());
      }
      SweepSpec spec;
      spec.d = j.value("dim", 2);
      spec.gamma = j.value("gamma", 1.4);
      spec.f11p = j.value("f11p", 1.0);
      spec.ratio_f11m = j.at("ratio_f11m").get<std::vector<double>>();
      spec.ratio_f22 = j.at("ratio_f22").get<std::vector<double>>();
      if (spec.d == 3) spec.ratio_f33 = j.at("ratio_f33").get<std::vector<double>>();
      const auto rows = sweep(spec);
      std::string csv = "f11m_ratio,f22_ratio,f33_ratio,lhs,rhs,margin,satisfied,boundary\n";
      char buf[256];
      for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d\n",
                      r.f11m_ratio, r.f22_ratio, r.f33_ratio, r.verdict.lhs,
                      r.verdict.rhs, r.verdict.margin, r.verdict.satisfied ? 1 : 0,
                      r.verdict.boundary ? 1 : 0);
        csv += buf;
      }
      ensure_dir(out_dir);
      std::ofstream f(out_dir + "/sweep.csv", std::ios::binary);
      f << csv;
      std::cout << "wrote " << out_dir << "/sweep.csv (" << rows.size() << " rows)\n";
      return 0;
    }

    if (cmd_hyp->parsed()) return cmd_check_hyperbolicity(hyp_dim, hyp_samples, seed);

    if (cmd_rig->parsed()) {
      const BackgroundState bg = rgf.build();
      ThermoState plus = bg.state(+1);
      FrontGeometry front = FrontGeometry::flat(bg.params.d);
      const RigidityReport rep =
          rigidity_probe(plus, front, bg.params, rig_trials, seed, rig_dS, rig_spread);
      for (const auto& tr : rep.trials) {
        json j;
        j["trial"] = tr.trial;
        j["converged"] = tr.converged;
        j["iterations"] = tr.iterations;
        j["residual"] = tr.residual;
        j["distance_to_plus"] = tr.distance_to_plus;
        std::cout << j.dump() << "\n";
      }
      json summary;
      summary["converged"] = rep.converged_count;
      summary["nontrivial_roots"] = rep.nontrivial_roots;
      summary["trials"] = static_cast<int>(rep.trials.size());
      std::cout << summary.dump() << "\n";
      return 0;
    }

    if (cmd_ver->parsed()) return cmd_verify_identities(ver_dim, seed, std::cout);

    if (cmd_sim->parsed()) {
      if (config_path.empty()) throw ConfigError("simulate requires --config");
      RunConfig cfg = RunConfig::from_file(config_path);
      if (seed != 0) cfg.seed = seed;
      if (out_dir != "out") cfg.out_dir = out_dir;
      ensure_dir(cfg.out_dir);
      {
        std::ofstream f(cfg.out_dir + "/config.resolved.json", std::ios::binary);
        f << cfg.to_json_text() << "\n";
      }
      const BasicState bs = cfg.basic_state();
      const Solver solver(bs, cfg.solver_options());
      const RunResult out = solver.run(cfg.source.as_sources(cfg.grid()));
      write_ledger_csv(cfg.out_dir + "/ledger.csv", out.ledger);
      if (cfg.snapshots) {
        write_snapshot(cfg.out_dir + "/final_plus", cfg.grid(), out.Wplus, "plus");
        write_snapshot(cfg.out_dir + "/final_minus", cfg.grid(), out.Wminus, "minus");
      }
      json j;
      j["steps"] = out.steps;
      j["dt"] = out.dt;
      j["lambda_max"] = out.lambda_max;
      j["W_H1_spacetime"] = out.W_h1_spacetime;
      j["V_H1_spacetime"] = out.V_h1_spacetime;
      j["psi_H32"] = out.psi_h32;
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (cmd_tame->parsed()) {
      if (config_path.empty()) throw ConfigError("probe-tame requires --config");
      const RunConfig base = RunConfig::from_file(config_path);
      json report;
      report["grids"] = tame_grids;
      std::vector<double> ratios;
      for (int n1 : tame_grids) {
        RunConfig cfg = base;
        cfg.n1 = n1;
        const BasicState bs = cfg.basic_state();
        const Solver solver(bs, cfg.solver_options());
        const RunResult out = solver.run(cfg.source.as_sources(cfg.grid()));
        if (!(out.f_h1_spacetime + out.g_h32 > 0.0))
          throw ConfigError("ratio probe requires a nonzero source");
        ratios.push_back((out.V_h1_spacetime + out.psi_h32) /
                         (out.f_h1_spacetime + out.g_h32));
      }
      report["ratios"] = ratios;
      const std::size_t m = ratios.size();
      report["plateau"] =
          m >= 2 && std::abs(ratios[m - 1] - ratios[m - 2]) <=
                        0.2 * std::max(ratios[m - 1], ratios[m - 2]);
      std::cout << report.dump(2) << "\n";
      return 0;
    }

    if (cmd_trace->parsed()) {
      const Grid g = Grid::make(trace_dim, trace_n1, trace_dim == 2 ? 32 : 16);
      const TraceProbeResult res = trace_inequality_probe(g, trace_samples, seed);
      json j;
      j["samples"] = res.samples;
      j["violations_trace"] = res.violations_a;
      j["violations_pairing"] = res.violations_b;
      j["max_ratio_trace"] = res.max_ratio_a;
      j["max_ratio_pairing"] = res.max_ratio_b;
      j["slack"] = 1.0 + 10.0 * g.h1();
      std::cout << j.dump(2) << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config-error: " << e.what() << "\n";
    return 1;
  } catch (const NaNDetected& e) {
    std::cerr << "numerical-abort: " << e.what() << "\n";
    return 2;
  } catch (const CFLViolation& e) {
    std::cerr << "numerical-abort: " << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    std::cerr << "model-error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
