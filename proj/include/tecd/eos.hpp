#pragma once

#include <cmath>

#include "tecd/errors.hpp"

namespace tecd {

// One EOS evaluation: pressure, squared sound speed, temperature, and the
// thermal part of the specific internal energy, all at (rho, S).
struct EosEval {
  double p;
  double c2;
  double theta;
  double e;
};

// Partial derivatives needed by the linearization of the coefficient
// matrices (they depend on the state only through rho and c^2).
struct EosDerivs {
  double p_rho;       // = c^2
  double p_rho_rho;
  double p_rho_S;
};

enum class EosKind { GammaLaw };

// Gamma-law closure e(rho,S) = exp(S) rho^(gamma-1) / (gamma-1), so
//   p = exp(S) rho^gamma,  c^2 = gamma p / rho,  theta = e.
// Any closure with p_rho > 0 and theta > 0 is admissible; this is the
// default because it keeps both positive for every rho > 0 and the
// piecewise-constant interface states invert in closed form.
struct GammaLawEos {
  double gamma = 1.4;

  EosEval eval(double rho, double S) const {
    if (!(rho > 0.0)) throw InvalidDensity(rho);
    const double es = std::exp(S);
    const double e = es * std::pow(rho, gamma - 1.0) / (gamma - 1.0);
    const double p = es * std::pow(rho, gamma);
    return {p, gamma * p / rho, e, e};
  }

  EosDerivs derivs(double rho, double S) const {
    if (!(rho > 0.0)) throw InvalidDensity(rho);
    const double es = std::exp(S);
    const double c2 = gamma * es * std::pow(rho, gamma - 1.0);
    return {c2, gamma * (gamma - 1.0) * es * std::pow(rho, gamma - 2.0), c2};
  }

  // Entropy that realizes a prescribed pressure at a given density.
  double entropy_for_pressure(double p, double rho) const {
    if (!(rho > 0.0)) throw InvalidDensity(rho);
    if (!(p > 0.0)) throw NegativeTargetPressure(p);
    return std::log(p) - gamma * std::log(rho);
  }
};

}  // namespace tecd
