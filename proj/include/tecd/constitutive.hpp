#pragma once

#include <Eigen/Dense>

#include "tecd/eos.hpp"
#include "tecd/errors.hpp"
#include "tecd/layout.hpp"

namespace tecd {

// Material description: spatial dimension, one elastic constant per column
// of the deformation gradient, and the thermal closure. The reference
// density is fixed to one; the divergence constraints are normalized
// against it and nothing else in the model refers to it.
struct MaterialParams {
  int d = 2;
  Eigen::VectorXd a;     // a_j > 0, one per column; defaults to ones
  EosKind eos_kind = EosKind::GammaLaw;
  GammaLawEos eos{};
  static constexpr double rho_ref = 1.0;

  static MaterialParams make(int dim, double gamma = 1.4) {
    if (!valid_dim(dim)) throw ConfigError("dimension must be 2 or 3");
    if (!(gamma > 1.0)) throw ConfigError("gamma must exceed 1");
    MaterialParams mp;
    mp.d = dim;
    mp.a = Eigen::VectorXd::Ones(dim);
    mp.eos.gamma = gamma;
    return mp;
  }

  void validate() const {
    if (!valid_dim(d)) throw ConfigError("dimension must be 2 or 3");
    if (a.size() != d || (a.array() <= 0.0).any())
      throw ConfigError("elastic coefficients a_j must be positive, one per column");
    if (!(eos.gamma > 1.0)) throw ConfigError("gamma must exceed 1");
  }
};

// rho = (det F)^{-1}. Orientation must be preserved; a non-positive
// determinant is a modeling failure, not a numerical one.
template <typename Scalar>
Scalar density_from_F(const MatX<Scalar>& F) {
  const Scalar det = F.determinant();
  if (!(det > Scalar(0))) throw NonOrientationPreserving(static_cast<double>(det));
  return Scalar(1) / det;
}

inline EosEval eos_eval(double rho, double S, const MaterialParams& mp) {
  return mp.eos.eval(rho, S);
}

// eps(F,S) = sum_ij a_j/2 F_ij^2 + e(rho(F), S)
inline double internal_energy(const Mat& F, double S, const MaterialParams& mp) {
  const double rho = density_from_F<double>(F);
  double elastic = 0.0;
  for (int j = 0; j < mp.d; ++j) elastic += 0.5 * mp.a(j) * F.col(j).squaredNorm();
  return elastic + mp.eos.eval(rho, S).e;
}

// Pointwise thermodynamic state. p, v, F, S are the primary fields;
// everything else is derived through the EOS and rho = (det F)^{-1}.
struct ThermoState {
  double p = 0.0;
  Eigen::VectorXd v;
  Mat F;
  double S = 0.0;

  double rho(const MaterialParams&) const { return density_from_F<double>(F); }
  EosEval thermo(const MaterialParams& mp) const {
    return mp.eos.eval(density_from_F<double>(F), S);
  }

  Vec to_vector(const MaterialParams& mp) const {
    const Layout L(mp.d);
    Vec u(L.n());
    u(L.p()) = p;
    for (int i = 1; i <= mp.d; ++i) u(L.v(i)) = v(i - 1);
    for (int j = 1; j <= mp.d; ++j)
      for (int i = 1; i <= mp.d; ++i) u(L.F(i, j)) = F(i - 1, j - 1);
    u(L.S()) = S;
    return u;
  }

  static ThermoState from_vector(const Vec& u, const MaterialParams& mp) {
    const Layout L(mp.d);
    ThermoState st;
    st.p = u(L.p());
    st.v = Eigen::VectorXd(mp.d);
    st.F = Mat(mp.d, mp.d);
    for (int i = 1; i <= mp.d; ++i) st.v(i - 1) = u(L.v(i));
    for (int j = 1; j <= mp.d; ++j)
      for (int i = 1; i <= mp.d; ++i) st.F(i - 1, j - 1) = u(L.F(i, j));
    st.S = u(L.S());
    return st;
  }
};

// Cauchy stress T = rho F diag(a) F^T - p I. Symmetric by construction.
inline Mat cauchy_stress(const ThermoState& st, const MaterialParams& mp) {
  const double rho = density_from_F<double>(st.F);
  Mat T = rho * st.F * mp.a.asDiagonal() * st.F.transpose();
  T = ((T + T.transpose()) / 2.0).eval();
  T.diagonal().array() -= st.p;
  return T;
}

}  // namespace tecd
