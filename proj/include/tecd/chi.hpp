#pragma once

#include <cmath>

namespace tecd {

// Even C-infinity cutoff: identically 1 on [-1,1], identically 0 outside
// [-3,3], slope bounded strictly below 1. The transition is a logistic in
// u(s) = 1/(1-s) - 1/s, which keeps every derivative elementary. The center
// slope is -steepness/2 per unit r, so steepness <= 0.9 bounds |chi'| by
// roughly steepness (checked in the tests).
struct Chi {
  double steepness = 0.8;

  bool operator==(const Chi&) const = default;

  double operator()(double r) const { return value(r); }

  double value(double r) const {
    const double s = (std::abs(r) - 1.0) / 2.0;
    if (s <= 1e-9) return 1.0;
    if (s >= 1.0 - 1e-9) return 0.0;
    return sigma(s);
  }

  double d1(double r) const {
    const double s = (std::abs(r) - 1.0) / 2.0;
    if (s <= 1e-9 || s >= 1.0 - 1e-9) return 0.0;
    return dsigma(s) * 0.5 * (r < 0 ? -1.0 : 1.0);
  }

  double d2(double r) const {
    const double s = (std::abs(r) - 1.0) / 2.0;
    if (s <= 1e-9 || s >= 1.0 - 1e-9) return 0.0;
    return d2sigma(s) * 0.25;
  }

 private:
  double sigma(double s) const {
    const double ku = steepness * (1.0 / (1.0 - s) - 1.0 / s);
    if (ku > 500.0) return 0.0;
    if (ku < -500.0) return 1.0;
    return 1.0 / (1.0 + std::exp(ku));
  }

  double dsigma(double s) const {
    const double k = steepness;
    const double u = 1.0 / (1.0 - s) - 1.0 / s;
    if (std::abs(k * u) > 500.0) return 0.0;
    const double up = 1.0 / ((1.0 - s) * (1.0 - s)) + 1.0 / (s * s);
    const double E = std::exp(k * u);
    return -k * up * E / ((1.0 + E) * (1.0 + E));
  }

  double d2sigma(double s) const {
    const double k = steepness;
    const double u = 1.0 / (1.0 - s) - 1.0 / s;
    if (std::abs(k * u) > 500.0) return 0.0;
    const double up = 1.0 / ((1.0 - s) * (1.0 - s)) + 1.0 / (s * s);
    const double upp = 2.0 / std::pow(1.0 - s, 3) - 2.0 / std::pow(s, 3);
    const double E = std::exp(k * u);
    const double Ep = k * up * E;
    const double Epp = k * E * (upp + k * up * up);
    const double den = 1.0 + E;
    return -Epp / (den * den) + 2.0 * Ep * Ep / (den * den * den);
  }
};

}  // namespace tecd
