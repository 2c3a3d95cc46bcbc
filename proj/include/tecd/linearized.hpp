#pragma once

#include <array>
#include <functional>
#include <vector>

#include "tecd/interface.hpp"
#include "tecd/straightening.hpp"

namespace tecd {

// --------------------------------------------------------------------------
// Forward-mode jet: value plus first derivatives in (t, x1, x2, x3).
// The perturbed coefficient states are built from closed-form profiles, so
// their derivative fields come out exact instead of stencil-approximate.
// --------------------------------------------------------------------------

struct Jet {
  double v = 0.0;
  Eigen::Vector4d d = Eigen::Vector4d::Zero();

  static Jet c(double value) { return {value, Eigen::Vector4d::Zero()}; }

  friend Jet operator+(const Jet& a, const Jet& b) { return {a.v + b.v, a.d + b.d}; }
  friend Jet operator-(const Jet& a, const Jet& b) { return {a.v - b.v, a.d - b.d}; }
  friend Jet operator-(const Jet& a) { return {-a.v, -a.d}; }
  friend Jet operator*(const Jet& a, const Jet& b) {
    return {a.v * b.v, a.v * b.d + b.v * a.d};
  }
  friend Jet operator*(double s, const Jet& a) { return {s * a.v, s * a.d}; }
  friend Jet operator/(const Jet& a, const Jet& b) {
    const double inv = 1.0 / b.v;
    return {a.v * inv, (a.d - (a.v * inv) * b.d) * inv};
  }
};

inline Jet jet_exp(const Jet& a) {
  const double e = std::exp(a.v);
  return {e, e * a.d};
}
inline Jet jet_log(const Jet& a) { return {std::log(a.v), a.d / a.v}; }
inline Jet jet_pow(const Jet& a, double p) {
  const double f = std::pow(a.v, p);
  return {f, p * std::pow(a.v, p - 1.0) * a.d};
}

// --------------------------------------------------------------------------
// Basic state: coefficient fields for the linearized problem
// --------------------------------------------------------------------------

struct PerturbationSpec {
  double amp_f11 = 0.0;
  double amp_tan = 0.0;
  double amp_offdiag = 0.0;
  double amp_v = 0.0;
  double amp_S = 0.0;
  double amp_phi = 0.0;

  bool trivial() const {
    return amp_f11 == 0.0 && amp_tan == 0.0 && amp_offdiag == 0.0 && amp_v == 0.0 &&
           amp_S == 0.0 && amp_phi == 0.0;
  }
  PerturbationSpec scaled(double s) const {
    return {s * amp_f11, s * amp_tan, s * amp_offdiag, s * amp_v, s * amp_S,
            s * amp_phi};
  }
  bool operator==(const PerturbationSpec&) const = default;
};

// Static, constraint-satisfying coefficient state: the exact piecewise
// constant interface state, optionally carrying a smooth perturbation whose
// traces still satisfy every interface constraint. All derivative fields
// are closed-form.
struct BasicState {
  Grid g;
  MaterialParams mp;
  BackgroundState bg;
  Lift lift;                          // static front, dt_phi = 0
  std::array<Field, 2> U;             // side 0 = plus, 1 = minus
  std::array<std::vector<Field>, 2> dU;  // derivative fields, mu = 0..d
  double K = 0.0;                     // sup-norm size of the perturbation

  struct BoundaryPoint {
    Eigen::VectorXd N;
    double varrho = 0.0;        // varrho(F+) = rho F_1N, both sides
    Mat dvarrho;                // gradient of varrho at F+
    double jump_f11 = 0.0;      // [F11] of the coefficient state
    Eigen::VectorXd d1v_plus, d1v_minus;
    double b1 = 0.0;            // psi coefficient in the pressure row
    Eigen::VectorXd bj;         // psi coefficients in the tangential rows
    double c1_row1 = 0.0;       // N . d1 v+ (front row psi coefficient)
    Eigen::VectorXd vtan_plus;  // tangential velocity of the plus state
    Mat F_plus;
  };
  std::vector<BoundaryPoint> bdry;

  static BasicState background(const Grid& grid, const BackgroundState& bgs,
                               const Chi& chi = Chi{});
  static BasicState perturbed(const Grid& grid, const BackgroundState& bgs,
                              const PerturbationSpec& spec, const Chi& chi = Chi{});

  int side_index(int side) const { return side >= 0 ? 0 : 1; }
  StatePoint state_point(int side, int q) const {
    return StatePoint::make(ThermoState::from_vector(U[side_index(side)].m.col(q), mp),
                            mp);
  }
  LiftPoint lift_point(int side, int i1, int it) const {
    return lift.point(side, i1, it);
  }
  CoefficientDerivs coeff_derivs(int side, int i1, int it) const;

  // largest violation of the interface constraints on the boundary slice
  double constraint_residual() const;
};

// --------------------------------------------------------------------------
// Linear fields, good unknowns, and the effective operators
// --------------------------------------------------------------------------

// Psi(t,x) = chi(x1) psi(t,x') realized on the grid for one time instant.
Field lift_front_perturbation(const Grid& g, const Lift& lift,
                              const Eigen::ArrayXd& psi);

// Vdot = V - (Psi / d1 Phi) d1 U_basic, and its inverse.
Field good_unknowns(const Field& V, const Eigen::ArrayXd& psi, const BasicState& bs,
                    int side);
Field good_unknowns_inverse(const Field& Vdot, const Eigen::ArrayXd& psi,
                            const BasicState& bs, int side);

// Effective interior operator L Vdot + C Vdot; the time derivative of the
// argument is supplied by the caller.
Field apply_Lprime_e(const Field& Vdot, const Field& dVdot_dt, const BasicState& bs,
                     int side);

// Full linearized interior operator, including the front term that the
// effective problem drops.
Field apply_Lprime_full(const Field& V, const Field& dV_dt, const Eigen::ArrayXd& psi,
                        const Eigen::ArrayXd& dpsi_dt, const BasicState& bs, int side);

// Boundary traces for the linearized boundary operator.
struct BoundaryTrace {
  Mat Vplus, Vminus;            // (n, ntt) traces of the good unknowns
  Eigen::ArrayXd psi;           // front perturbation
  Eigen::ArrayXd dpsi_dt;       // its time derivative
};

// The 2d+1 rows of the effective linearized boundary operator, evaluated
// with the explicit coefficient fields of the basic state.
Mat apply_Bprime_e(const BoundaryTrace& tr, const BasicState& bs);

// W = J^{-1} Vdot per point and back.
Field to_W(const Field& Vdot, const BasicState& bs, int side);
Field from_W(const Field& W, const BasicState& bs, int side);

// Residuals of the boundary conditions written in the W variables, with
// every generic coefficient instantiated from the explicit rows. g holds
// the 2d+1 boundary data rows (zero for the homogeneous problem).
Mat boundary_conditions_W(const Mat& Wplus, const Mat& Wminus,
                          const Eigen::ArrayXd& psi, const Eigen::ArrayXd& dpsi_dt,
                          const Mat& gdata, const BasicState& bs);

// Lift of a boundary source: V_nat = chi(x1) G(t,x') with G solving the
// boundary rows pointwise, plus the corrected interior source
// f_tilde = f - (L + C) V_nat.
struct BoundaryLift {
  Field Vnat_plus, Vnat_minus;
  Field dVnat_dt_plus, dVnat_dt_minus;
  Field ftilde_plus, ftilde_minus;
};

BoundaryLift lift_boundary_source(const Mat& gdata, const Mat& dgdata_dt,
                                  const Field& f_plus, const Field& f_minus,
                                  const BasicState& bs);

// --------------------------------------------------------------------------
// Auxiliary linearized quantities
// --------------------------------------------------------------------------

struct AuxiliaryQuantities {
  Field varsigma[2];           // 1 row: linearized divergence
  Field eta[2];                // d rows
  Field zeta[2];               // d rows (d = 3 only, else empty)
  Mat Rj;                      // (d-1, ntt) boundary fields R_2..R_d
  Field varsigma_recon[2];     // divergence-form reconstruction residual
  Field eta_recon[2];          // reconstruction residuals for eta rows
};

AuxiliaryQuantities auxiliary_eval(const Field& Wplus, const Field& Wminus,
                                   const Eigen::ArrayXd& psi, const BasicState& bs);

// --------------------------------------------------------------------------
// Boundary energy pieces and the cancellation checker
// --------------------------------------------------------------------------

// Recorded interface history of a run: one entry per stored step.
struct TraceSeries {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<Mat> Wplus, Wminus;     // (n, ntt) each step
  std::vector<Eigen::ArrayXd> psi;
};

struct CancellationReport {
  // max over interior record times of the tangential L2 norm
  double Q = 0.0, Q1 = 0.0, Q2 = 0.0;
  double Q1a = 0.0, Q2a = 0.0, Q2b = 0.0, Q2c = 0.0, Q2d = 0.0;
  double cancellation_residual = 0.0;  // |Q1a + Q2d - explicit remainder|
  double key_identity_residual = 0.0;  // tangential-velocity divergence identity
  double bc_residual = 0.0;            // boundary-condition residual of the traces
};

CancellationReport cancellation_check(const TraceSeries& series, const BasicState& bs,
                                      const Eigen::VectorXi& beta,
                                      double precondition_tol = 1e-6);

}  // namespace tecd
