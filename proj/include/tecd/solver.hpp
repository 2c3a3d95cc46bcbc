#pragma once

#include <functional>
#include <optional>
#include <string>

#include "tecd/linearized.hpp"
#include "tecd/norms.hpp"

namespace tecd {

// Interior source in the primary-variable coordinates and boundary data in
// the 2d+1 operator rows, both as functions of time. Trivial flags let the
// zero paths stay exactly zero.
struct Sources {
  std::function<void(double, Field&, Field&)> f;  // fills both sides
  std::function<Mat(double)> g;                   // (2d+1, ntt)
  bool has_f = false;
  bool has_g = false;
};

// Ramp-and-bump source used by the command line and the probes: zero for
// t <= 0 with a C^3 polynomial turn-on over [0, t_scale], a Gaussian
// profile in x1 whose tails are below roundoff at both artificial
// boundaries, one cosine mode tangentially, carried by selected components.
struct BumpSource {
  double amplitude = 1.0;
  double x1_center = 1.8;
  double x1_width = 0.35;
  double t_scale = 0.2;  // ramp duration
  int mode = 1;
  std::vector<int> components = {1};  // rows of the primary unknowns

  double ramp(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= t_scale) return 1.0;
    const double s = t / t_scale;
    return s * s * s * s * (35.0 + s * (-84.0 + s * (70.0 - 20.0 * s)));
  }
  double bump(double x1) const {
    const double s = (x1 - x1_center) / x1_width;
    return s * s > 600.0 ? 0.0 : std::exp(-s * s);
  }
  void fill(double t, const Grid& g, Field& fplus, Field& fminus) const;
  Sources as_sources(const Grid& g) const;
  bool operator==(const BumpSource&) const = default;
};

struct SolverOptions {
  double T = 1.0;
  double cfl = 0.4;
  int record_every = 10;
  int norm_order = 1;          // s in the recorded norms
  bool record_traces = true;
  bool record_aux = true;
  int nan_check_every = 25;
};

// One ledger: fixed column order, one row per record step.
struct EnergyLedger {
  std::vector<std::string> columns;
  std::vector<Vec> rows;

  std::vector<double> column(const std::string& name) const;
  int column_index(const std::string& name) const;
};

struct RunResult {
  EnergyLedger ledger;
  TraceSeries traces;
  Field Wplus, Wminus;       // final fields
  Eigen::ArrayXd psi;        // final front perturbation
  double dt = 0.0;
  long steps = 0;
  double lambda_max = 0.0;

  // accumulated space-time norms at the final time
  double W_h1_spacetime = 0.0;
  double V_h1_spacetime = 0.0;
  double f_h1_spacetime = 0.0;
  double psi_h32 = 0.0;
  double g_h32 = 0.0;
};

// Precomputed discrete operator over a static basic state.
class Solver {
 public:
  Solver(const BasicState& bs, const SolverOptions& opts);

  double dt() const { return dt_; }
  long steps() const { return steps_; }
  double lambda_max() const { return lambda_max_; }

  // Advance from the given initial data (which may be empty for zero) under
  // the given sources, recording the ledger.
  RunResult run(const Sources& src, const Field* W0_plus = nullptr,
                const Field* W0_minus = nullptr,
                const Eigen::ArrayXd* psi0 = nullptr) const;

 private:
  struct SideOps {
    // constant-coefficient fast path: one matrix set per side
    bool constant = false;
    std::vector<Mat> M;      // A0^{-1} calA_j for j = 1..d at each point (or one)
    std::vector<Mat> M4;     // A0^{-1} calA4
    std::vector<Mat> Msrc;   // A0^{-1} J^T
    std::vector<Mat> Jmap;   // J itself (W -> V)
    Eigen::ArrayXd alpha;    // local spectral radius of A0^{-1} calA1
  };

  struct BoundaryClosure {
    Eigen::PartialPivLU<Mat> lu;
    // rows applied to extrapolated interior data per side
    Mat out_rows_plus, out_rows_minus;    // (n - d, n)
    // boundary-condition rows: coefficient blocks and psi couplings
    Mat bc_plus, bc_minus;                // (2d, n)
    Vec bc_psi;                            // psi coefficients
    Mat bc_dpsi;                           // (2d, d-1) tangential psi gradients
  };

  void rhs(const Mat& Wp, const Mat& Wm, const Eigen::ArrayXd& psi, double t,
           const Sources& src, Mat& Rp, Mat& Rm, Eigen::ArrayXd& rpsi) const;
  void close_boundary(Mat& Wp, Mat& Wm, const Eigen::ArrayXd& psi, double t,
                      const Sources& src) const;
  void fill_outflow(Mat& W) const;

  const BasicState& bs_;
  SolverOptions opts_;
  Grid g_;
  int n_ = 0;
  double dt_ = 0.0;
  long steps_ = 0;
  double lambda_max_ = 0.0;
  SideOps side_[2];
  std::vector<BoundaryClosure> closure_;  // per tangential node
  Mat etan_A0_[2];                        // exact-state symmetrizer per side
};

// Convenience wrapper: build, run, return.
RunResult run_linearized(const BasicState& bs, const SolverOptions& opts,
                         const Sources& src);

}  // namespace tecd
